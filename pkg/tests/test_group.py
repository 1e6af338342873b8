import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import elements
from nilergodic.group import (
    GroupContext,
    GroupElement,
    commutator,
    heisenberg,
    lcs_degree,
    mat_exp,
    mat_log,
    nested_commutator,
    real_pow,
)
from nilergodic.scalars import ModeError, sqrt


def H(p, q, r):
    return heisenberg(p, q, r)


# -- frozen examples (U3 triples are the (1,2), (2,3), (1,3) entries) -------------

def test_heisenberg_product_and_commutator():
    assert H(1, 0, 0) * H(0, 1, 0) == H(1, 1, 1)
    assert commutator(H(1, 0, 0), H(0, 1, 0)) == H(0, 0, 1)


def test_inverse_closed_form():
    p, q, r = Fraction(2, 3), Fraction(-5, 2), Fraction(7, 4)
    assert H(p, q, r).inverse() == H(-p, -q, -r + p * q)


def test_power_zero_and_negative():
    g = H(Fraction(1, 2), 3, -1)
    assert (g ** 0).is_identity
    assert g ** -1 == g.inverse()
    assert g ** 5 == g * g * g * g * g
    assert g ** -3 == (g.inverse()) ** 3


def test_log_exp_examples():
    n = 3
    assert mat_exp([[0] * n for _ in range(n)]).is_identity
    L = mat_log(H(0, 0, 1))
    assert L == ((0, 0, 1), (0, 0, 0), (0, 0, 0))


def test_lcs_degree_examples():
    assert lcs_degree(H(0, 0, 1)) == 2
    assert lcs_degree(H(1, 0, 0)) == 1
    assert lcs_degree(GroupElement.identity(3)) == math.inf


def test_real_pow_examples():
    g = H(1.0, 0.0, 0.0)
    assert real_pow(g, 0.5).allclose(H(0.5, 0.0, 0.0), 1e-15)
    h = H(0.3, -1.2, 0.7)
    assert real_pow(h, 1).allclose(h, 1e-12)
    assert real_pow(h, 2).allclose(h * h, 1e-12)
    with pytest.raises(ModeError):
        real_pow(H(Fraction(1, 2), 0, 0), 0.5)


def test_validation_and_modes():
    with pytest.raises(ValueError):
        GroupElement([[1, 2], [1, 1]])
    with pytest.raises(ValueError):
        GroupElement([[2, 0], [0, 1]])
    with pytest.raises(ModeError):
        H(0.5, 0.0, 0.0) * H(Fraction(1, 2), 0, 0)
    with pytest.raises(ValueError):
        H(1, 0, 0) * GroupElement.identity(4)
    a = GroupElement.from_upper(3, {(0, 1): sqrt(2), (1, 2): sqrt(3)})
    assert a.mode == "exact"
    z = GroupElement.from_upper(3, {(0, 1): 4})
    assert z.mode == "integer"
    assert (z * a).mode == "exact" and (z * H(0.5, 0.0, 0.0)).mode == "float"


def test_exact_radical_arithmetic():
    a = GroupElement.from_upper(3, {(0, 1): sqrt(2), (1, 2): sqrt(3)})
    assert (a * a)[0, 2] == sqrt(6)
    assert (a ** 10)[0, 2] == 45 * sqrt(6)


def test_float_matches_numpy():
    rng = np.random.default_rng(0)
    for n in (3, 4, 5, 6):
        A = np.triu(rng.normal(size=(n, n)), 1) + np.eye(n)
        B = np.triu(rng.normal(size=(n, n)), 1) + np.eye(n)
        g, h = GroupElement.from_array(A), GroupElement.from_array(B)
        assert np.allclose((g * h).to_array(), A @ B)
        assert np.allclose(g.inverse().to_array(), np.linalg.inv(A))


def test_context():
    ctx = GroupContext(4)
    assert ctx.k == 3
    assert ctx.identity().is_identity
    assert ctx.in_level(GroupElement.from_upper(4, {(0, 3): 1}), 3)
    assert not ctx.in_level(GroupElement.from_upper(4, {(0, 2): 1}), 3)


def test_nested_commutator_is_left_nested():
    x, y, z = H(1, 0, 0), H(0, 1, 0), H(2, 3, 1)
    assert nested_commutator(x, y, z) == commutator(commutator(x, y), z)


# -- properties -----------------------------------------------------------------

ns = st.sampled_from([3, 4, 5])


@settings(max_examples=1000)
@given(st.data())
def test_group_axioms(data):
    n = data.draw(ns)
    g, h, f = (data.draw(elements(n)) for _ in range(3))
    e = GroupElement.identity(n)
    assert (g * h) * f == g * (h * f)
    assert g * g.inverse() == e == g.inverse() * g
    assert g * e == g == e * g


@settings(max_examples=300)
@given(st.data())
def test_lcs_law(data):
    n = data.draw(ns)
    k = n - 1
    i, j = data.draw(st.integers(1, k)), data.draw(st.integers(1, k))
    g, h = data.draw(elements(n, i)), data.draw(elements(n, j))
    c = commutator(g, h)
    assert lcs_degree(c) >= lcs_degree(g) + lcs_degree(h)
    if lcs_degree(g) + lcs_degree(h) > k:
        assert c.is_identity


@given(st.data(), st.integers(-5, 7))
def test_power_identity(data, m):
    n = data.draw(ns)
    lvl = data.draw(st.integers(1, n - 1))
    x, y = data.draw(elements(n)), data.draw(elements(n, lvl))
    h0 = commutator(x ** m, y) * commutator(x, y) ** (-m)
    assert lcs_degree(h0) >= lvl + 1


@settings(max_examples=100)
@given(st.data())
def test_exp_log_round_trip(data):
    g = data.draw(elements(data.draw(ns)))
    assert mat_exp(mat_log(g)) == g


@given(st.data())
def test_commutator_convention(data):
    # a [a, x] = x^-1 a x
    n = data.draw(ns)
    a, x = data.draw(elements(n)), data.draw(elements(n))
    assert a * commutator(a, x) == x.inverse() * a * x


@given(st.data(), st.integers(-4, 4), st.integers(-4, 4))
def test_power_law(data, p, q):
    g = data.draw(elements(data.draw(ns)))
    assert g ** p * g ** q == g ** (p + q)
