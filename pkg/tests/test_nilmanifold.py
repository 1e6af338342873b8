import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import elements
from nilergodic.group import GroupElement, heisenberg, lcs_degree, mat_exp
from nilergodic.nilmanifold import (
    TestFunction,
    coordinate_order,
    coset_equal,
    cube_integral,
    from_malcev,
    haar_coords,
    haar_sample,
    in_lattice_level,
    is_lattice,
    reduce,
    to_malcev,
)
from nilergodic.scalars import sqrt
from nilergodic.suites import default_measure_functions

ns = st.sampled_from([2, 3, 4, 5])


def test_coordinate_order():
    assert coordinate_order(3) == ((0, 1), (1, 2), (0, 2))
    assert coordinate_order(4)[3:] == ((0, 2), (1, 3), (0, 3))


def test_malcev_examples():
    assert to_malcev(GroupElement.identity(4)) == (0,) * 6
    p, q, r = Fraction(1, 2), Fraction(-3), Fraction(5, 7)
    assert to_malcev(heisenberg(p, q, r)) == (p, q, r - p * q)
    # the chart is the ordered product of one-parameter subgroups
    t = (Fraction(2), Fraction(1, 3), Fraction(-1))
    E = lambda i, j, v: GroupElement.from_upper(3, {(i, j): v})
    assert from_malcev(3, t) == E(0, 1, t[0]) * E(1, 2, t[1]) * E(0, 2, t[2])


def test_reduce_example():
    g = heisenberg(1.5, 0.25, 0.75)
    g0, gamma = reduce(g)
    assert g0.allclose(heisenberg(0.5, 0.25, 0.75), 1e-15)
    assert gamma == GroupElement.from_upper(3, {(0, 1): -1})
    g1 = heisenberg(0.25, 0.5, 0.125)
    g0, gamma = reduce(g1)
    assert g0 == g1 and gamma.is_identity


def test_reduce_exact_radicals():
    g = GroupElement.from_upper(3, {(0, 1): 3 * sqrt(2), (1, 2): -sqrt(3), (0, 2): sqrt(5)})
    g0, gamma = reduce(g)
    assert is_lattice(gamma) and g * gamma == g0
    assert all(0 <= t < 1 for t in to_malcev(g0))


def test_lattice_membership():
    z = GroupElement.from_upper(4, {(0, 2): 3, (1, 3): -2, (0, 3): 7})
    assert is_lattice(z) and in_lattice_level(z, 2) and not in_lattice_level(z, 3)
    assert not is_lattice(heisenberg(Fraction(1, 2), 0, 0))
    assert is_lattice(heisenberg(1.0 + 1e-12, 2.0, 0.0))
    assert not is_lattice(heisenberg(1.0 + 1e-6, 2.0, 0.0))


def test_haar_sample_levels():
    rng = np.random.default_rng(1)
    for n in (3, 4, 5):
        for i in range(1, n):
            g = haar_sample(n, i, rng)
            assert lcs_degree(g) >= i
    top = haar_coords(4, 3, 10, rng)
    assert top.shape == (10, 6)
    assert not top[:, :5].any() and np.all((top[:, 5] >= 0) & (top[:, 5] < 1))
    with pytest.raises(ValueError):
        haar_sample(3, 3, rng)
    with pytest.raises(ValueError):
        haar_sample(3, 0, rng)


def test_haar_character_mean():
    rng = np.random.default_rng(2)
    t = haar_coords(4, 1, 10**6, rng)
    for e in range(t.shape[1]):
        m = np.mean(np.exp(2j * np.pi * t[:, e]))
        assert abs(m) < 3e-3


def test_test_function_basics():
    one = TestFunction.constant(3)
    g = heisenberg(0.3, 0.7, 0.1)
    assert one(g) == 1
    chi = TestFunction.character(3, {(0, 1): 1})
    assert chi(g) == pytest.approx(np.exp(2j * np.pi * 0.3))
    assert chi.bound == 1.0
    with pytest.raises(ValueError):
        TestFunction(3, {(1, 0): 1.0})
    f = TestFunction(3, {(1, 0, 0): 1 + 2j, (0, 0, 2): 0.5}, window=2)
    assert TestFunction.from_config(3, f.to_config()) == f


def test_cube_integral_examples():
    assert cube_integral(TestFunction.character(3, (1, 0, 0))) == 0
    assert cube_integral(TestFunction.constant(3)) == 1
    assert cube_integral(TestFunction.constant(3), points=4) == 1
    # one windowed coordinate in U3: 16 * int t^2 (1 - t)^2 = 8/15
    assert cube_integral(TestFunction(3, {(0, 0, 0): 1.0}, window=2)) == pytest.approx(8 / 15, abs=1e-14)
    # U4 has three coordinates at distance >= 2
    assert cube_integral(TestFunction(4, {(0,) * 6: 1.0}, window=1)) == pytest.approx((2 / 3) ** 3)


def test_cube_integral_against_scipy():
    from scipy import integrate
    f = TestFunction(3, {(0, 0, 1): 0.7, (0, 0, 0): 0.3, (1, 0, 0): 2.0}, window=1)
    re = integrate.quad(lambda t: (0.3 + 0.7 * math.cos(2 * math.pi * t)) * 4 * t * (1 - t), 0, 1)[0]
    im = integrate.quad(lambda t: 0.7 * math.sin(2 * math.pi * t) * 4 * t * (1 - t), 0, 1)[0]
    assert cube_integral(f) == pytest.approx(complex(re, im), abs=1e-12)


def test_horizontal_character_is_continuous():
    chi = TestFunction.character(3, {(0, 1): 1, (1, 2): -2})
    delta = 1e-11
    for q, r in [(0.3, 0.6), (0.9, 0.05), (0.5, 0.999)]:
        g = heisenberg(1 - delta, q, r)
        h = g * mat_exp([[0, 2 * delta, 0], [0, 0, 0], [0, 0, 0]])
        assert to_malcev(reduce(h)[0])[0] < 0.5  # crossed the boundary
        assert abs(chi(g) - chi(h)) < 1e-9


def test_window_makes_vertical_terms_continuous():
    f = TestFunction(3, {(0, 0, 1): 1.0}, window=1)
    delta = 1e-11
    g = heisenberg(0.3, 0.6, 1 - delta)
    h = g * mat_exp([[0, 0, 2 * delta], [0, 0, 0], [0, 0, 0]])
    assert abs(f(g) - f(h)) < 1e-9


# -- properties -----------------------------------------------------------------

@settings(max_examples=100)
@given(st.data())
def test_malcev_round_trip_and_levels(data):
    n = data.draw(ns)
    lvl = data.draw(st.integers(1, n - 1))
    g = data.draw(elements(n, lvl))
    t = to_malcev(g)
    assert from_malcev(n, t) == g
    dist = [j - i for i, j in coordinate_order(n)]
    assert all(v == 0 for v, d in zip(t, dist) if d < lvl)


@settings(max_examples=100)
@given(st.data())
def test_reduce_properties(data):
    n = data.draw(ns)
    g = data.draw(elements(n))
    gp = data.draw(elements(n, integer=True))
    g0, gamma = reduce(g)
    assert g * gamma == g0 and is_lattice(gamma)
    assert all(0 <= t < 1 for t in to_malcev(g0))
    assert reduce(g0) == (g0, GroupElement.identity(n))
    assert reduce(g * gp)[0] == g0
    assert coset_equal(g, g * gp)


@settings(max_examples=1000)
@given(st.data())
def test_lattice_level_membership(data):
    n = data.draw(ns)
    lvl = data.draw(st.integers(1, n - 1))
    z = data.draw(elements(n, lvl, integer=True))
    assert in_lattice_level(z, lvl)
    # a non-integer entry anywhere breaks membership
    i = data.draw(st.integers(0, n - 2))
    j = data.draw(st.integers(i + max(lvl, 1), n - 1)) if i + lvl <= n - 1 else None
    if j is not None:
        w = GroupElement.from_upper(n, {(i, j): Fraction(1, 2)}) * z
        assert not in_lattice_level(w, lvl)


@given(st.data())
def test_eval_factors_through_cosets(data):
    n = data.draw(st.sampled_from([3, 4]))
    g = data.draw(elements(n)).to_float()
    gamma = data.draw(elements(n, integer=True))
    f = default_measure_functions(n)[4]
    assert abs(f(g * gamma) - f(g)) < 1e-9


def test_sampler_matches_cube_integral():
    M = 10**5
    rng = np.random.default_rng(3)
    for n in (3, 4):
        t = haar_coords(n, 1, M, rng)
        for f in default_measure_functions(n):
            mc = np.mean(f.phi_many(t))
            assert abs(mc - cube_integral(f)) <= 4 / math.sqrt(M) * f.bound
