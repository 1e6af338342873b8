"""Randomized verification suites for the exact algebra.

Each suite draws random rational elements from a seeded ``random.Random`` and
returns a JSON-ready dict of named checks with ``passed``/``total`` counts.
In ``float`` mode the same rationals are converted to floats and equalities are
judged with a relative tolerance.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .group import GroupElement, commutator, lcs_degree, mat_exp, mat_log
from .leibman import (
    StarClosureError,
    TildeElement,
    conj_coordinates,
    embed_I,
    intertwine_check,
    poly_seq_eval,
    star,
    star_identity,
    star_inverse,
)
from .nilmanifold import (
    TestFunction,
    coordinate_order,
    coset_equal,
    cube_integral,
    from_malcev,
    haar_coords,
    in_lattice_level,
    reduce,
    to_malcev,
)

__all__ = [
    "SUPPORTED_N",
    "Tally",
    "random_element",
    "random_tilde",
    "random_lattice_tilde",
    "verify_group",
    "verify_star",
    "verify_intertwine",
    "verify_lemma",
    "verify_measure",
    "default_measure_functions",
]

SUPPORTED_N = range(2, 7)
FLOAT_RTOL = 1e-9


class Tally:
    """Counts of named checks; ``record`` returns the outcome unchanged."""

    def __init__(self):
        self.counts: dict[str, list[int]] = {}

    def record(self, name: str, ok: bool) -> bool:
        c = self.counts.setdefault(name, [0, 0])
        c[0] += bool(ok)
        c[1] += 1
        return ok

    @property
    def passed(self) -> int:
        return sum(c[0] for c in self.counts.values())

    @property
    def total(self) -> int:
        return sum(c[1] for c in self.counts.values())

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def to_json(self) -> dict:
        return {
            "checks": {k: {"passed": p, "total": t} for k, (p, t) in sorted(self.counts.items())},
            "passed": self.passed,
            "total": self.total,
        }


# -- random inputs -------------------------------------------------------------


def _rational(rng: random.Random, height: int = 9, den: int = 6) -> Fraction:
    return Fraction(rng.randint(-height, height), rng.randint(1, den))


def random_element(rng: random.Random, n: int, level: int = 1, mode: str = "exact",
                   integer: bool = False) -> GroupElement:
    """Random element of ``N^level`` with small rational (or integer) entries."""
    entries = {}
    for i in range(n):
        for j in range(i + level, n):
            v = Fraction(rng.randint(-5, 5)) if integer else _rational(rng)
            entries[(i, j)] = float(v) if mode == "float" else v
    return GroupElement.from_upper(n, entries, mode="float" if mode == "float" else "exact")


def random_tilde(rng: random.Random, n: int, mode: str = "exact",
                 integer: bool = False) -> TildeElement:
    return TildeElement(tuple(random_element(rng, n, i, mode, integer) for i in range(1, n)))


def random_lattice_tilde(rng: random.Random, n: int) -> TildeElement:
    """Random element of the lattice ``Γ^1 x ... x Γ^k``."""
    return random_tilde(rng, n, "exact", integer=True)


# -- comparison helpers --------------------------------------------------------


def _close(g: GroupElement, h: GroupElement, mode: str) -> bool:
    if mode == "exact":
        return g == h
    A, B = g.to_array(), h.to_array()
    scale = max(1.0, float(np.abs(A).max()), float(np.abs(B).max()))
    return bool(np.allclose(A, B, rtol=0.0, atol=FLOAT_RTOL * scale))


def _tclose(x: TildeElement, y: TildeElement, mode: str) -> bool:
    return all(_close(a, b, mode) for a, b in zip(x, y))


def _degree(g: GroupElement, mode: str) -> float:
    if mode == "exact":
        return lcs_degree(g)
    n = g.n
    scale = max(1.0, float(np.abs(g.to_array()).max()))
    for d in range(1, n):
        if any(abs(g.rows[i][i + d]) > FLOAT_RTOL * scale for i in range(n - d)):
            return d
    return math.inf


def _safe(fn: Callable[[], bool]) -> bool:
    try:
        return bool(fn())
    except StarClosureError:
        return False


def _check_ns(ns: Iterable[int]) -> list[int]:
    ns = [int(n) for n in ns]
    bad = [n for n in ns if n not in SUPPORTED_N]
    if bad:
        raise ValueError(f"unsupported dimension(s) {bad}; expected 2 <= n <= 6")
    return ns


def _rng(seed: int, *tags: object) -> random.Random:
    return random.Random(f"{seed}:" + ":".join(str(t) for t in tags))


# -- suites --------------------------------------------------------------------


def verify_group(ns: Sequence[int], cases: int, seed: int = 0, mode: str = "exact") -> dict:
    """Group axioms, lower-central-series laws, charts and fundamental domain."""
    out = {}
    for n in _check_ns(ns):
        rng = _rng(seed, "group", n)
        t = Tally()
        k = n - 1
        e = GroupElement.identity(n, mode)
        for _ in range(cases):
            la, lb = rng.randint(1, k), rng.randint(1, k)
            g, h, f = (random_element(rng, n, la, mode), random_element(rng, n, lb, mode),
                       random_element(rng, n, 1, mode))
            t.record("associativity", _close((g * h) * f, g * (h * f), mode))
            t.record("inverse", _close(g * g.inverse(), e, mode) and _close(g.inverse() * g, e, mode))
            t.record("identity", _close(g * e, g, mode) and _close(e * g, g, mode))
            c = commutator(g, h)
            t.record("lcs_law", _degree(c, mode) >= la + lb)
            if la + lb > k:
                t.record("commutator_vanishes", _close(c, e, mode))
            m = rng.randint(-4, 6)
            y = random_element(rng, n, lb, mode)
            h0 = commutator(f ** m, y) * commutator(f, y) ** (-m)
            t.record("power_identity", _degree(h0, mode) >= lb + 1)
            t.record("exp_log", _close(mat_exp(mat_log(g)), g, mode))
            t.record("malcev_roundtrip", _close(from_malcev(n, to_malcev(g)), g, mode))
            g0, gamma = reduce(g)
            tc = [float(v) for v in to_malcev(g0)]
            t.record("reduce_domain", all(-1e-12 <= v < 1.0 for v in tc))
            t.record("reduce_coset", _close(g * gamma, g0, mode) and in_lattice_level(gamma, 1))
            lat = random_element(rng, n, 1, "exact", integer=True)
            t.record("reduce_invariant", _close(reduce(g * lat)[0], g0, mode))
            lvl = rng.randint(1, k)
            z = random_element(rng, n, lvl, "exact", integer=True)
            bump = GroupElement.from_upper(n, {(0, 1): 1})
            t.record("lattice_level", in_lattice_level(z, lvl)
                     and (lvl == 1 or not in_lattice_level(z * bump, lvl)))
        out[f"U{n}"] = t.to_json()
    return _summary(out)


def verify_star(ns: Sequence[int], cases: int, seed: int = 0, mode: str = "exact",
                homomorphism: dict | None = None) -> dict:
    """⋆-group axioms, lattice closure and (optionally) the sequence homomorphism."""
    out = {}
    for n in _check_ns(ns):
        if n < 3:
            raise ValueError("the ⋆-group needs n >= 3")
        rng = _rng(seed, "star", n)
        t = Tally()
        e = star_identity(n, mode)
        for _ in range(cases):
            x, y, z = (random_tilde(rng, n, mode) for _ in range(3))
            t.record("associativity", _safe(lambda: _tclose(star(star(x, y), z),
                                                            star(x, star(y, z)), mode)))
            t.record("identity", _safe(lambda: _tclose(star(x, e), x, mode)
                                       and _tclose(star(e, x), x, mode)))
            t.record("inverse", _safe(lambda: _tclose(star(x, star_inverse(x)), e, mode)
                                      and _tclose(star(star_inverse(x), x), e, mode)))
            t.record("closure", _safe(lambda: all(_degree(c, mode) >= i for i, c in
                                                  enumerate(star(x, y), start=1))))
            gx, gy = random_lattice_tilde(rng, n), random_lattice_tilde(rng, n)
            t.record("lattice_closure", _safe(
                lambda: all(in_lattice_level(c, i) for i, c in enumerate(star(gx, gy), start=1))
                and all(in_lattice_level(c, i) for i, c in enumerate(star_inverse(gx), start=1))))
        out[f"U{n}"] = t.to_json()
    if homomorphism:
        n = _check_ns([homomorphism.get("n", 4)])[0]
        lo, hi = homomorphism.get("range", [-3, 8])
        rng = _rng(seed, "homomorphism", n)
        t = Tally()
        for _ in range(int(homomorphism.get("cases", 100))):
            x, y = random_tilde(rng, n, mode), random_tilde(rng, n, mode)
            xy = star(x, y)
            t.record("poly_seq_homomorphism", all(
                _close(poly_seq_eval(xy, m), poly_seq_eval(x, m) * poly_seq_eval(y, m), mode)
                for m in range(int(lo), int(hi) + 1)))
        out[f"homomorphism_U{n}"] = t.to_json()
    return _summary(out)


def verify_intertwine(ns: Sequence[int], cases: int, seed: int = 0,
                      well_defined_cases: int = 0, well_defined_n: int = 4) -> dict:
    """The embedding intertwines S_x with the diagonal action; it is Γ̃-invariant."""
    out = {}
    for n in _check_ns(ns):
        rng = _rng(seed, "intertwine", n)
        t = Tally()
        for _ in range(cases):
            a, x = random_element(rng, n), random_element(rng, n)
            y = random_tilde(rng, n)
            t.record("intertwine", intertwine_check(a, x, y))
        out[f"U{n}"] = t.to_json()
    if well_defined_cases:
        n = _check_ns([well_defined_n])[0]
        rng = _rng(seed, "well_defined", n)
        t = Tally()
        for _ in range(well_defined_cases):
            x, y = random_element(rng, n), random_tilde(rng, n)
            gamma = random_lattice_tilde(rng, n)
            lhs, rhs = embed_I(x, star(y, gamma)), embed_I(x, y)
            t.record("well_defined", all(coset_equal(p, q) for p, q in zip(lhs, rhs)))
        out[f"well_defined_U{n}"] = t.to_json()
    return _summary(out)


def verify_lemma(n: int, levels: Sequence[int], cases: int, seed: int = 0,
                 mode: str = "exact") -> dict:
    """Coordinate pattern of the ⋆-commutator of ``(x, e, ...)`` and ``y`` in slot ``m``."""
    n = _check_ns([n])[0]
    out = {}
    k = n - 1
    for lvl in levels:
        lvl = int(lvl)
        if not 1 <= lvl <= k:
            raise ValueError(f"level {lvl} outside 1..{k}")
        t = Tally()
        rng = _rng(seed, "lemma", n, lvl)
        for _ in range(cases):
            x = random_element(rng, n, 1, mode)
            y = random_element(rng, n, lvl, mode)
            c = commutator(x, y)
            e = GroupElement.identity(n, mode)
            for m in range(1, min(lvl, k) + 1):
                z = conj_coordinates(x, y, lvl, m)
                t.record("leading_identity", all(_close(z[i], e, mode) for i in range(1, m)))
                t.record("slot_m", _degree(z[m] * c ** (-m), mode) >= lvl + 1)
                if m + 1 <= k:
                    t.record("slot_m_plus_1", _degree(z[m + 1] * c ** (-(m + 1)), mode) >= lvl + 1)
                for j in range(m + 2, k + 1):
                    t.record("tail", _degree(z[j], mode) >= lvl + 1)
                # sharper form: the remaining factors are double commutators
                sharp = [_degree(z[m] * c ** (-m), mode)]
                if m + 1 <= k:
                    sharp.append(_degree(z[m + 1] * c ** (-(m + 1)), mode))
                sharp += [_degree(z[j], mode) for j in range(m + 2, k + 1)]
                t.record("sharp_n_plus_2", all(d >= lvl + 2 for d in sharp))
        out[f"U{n}_level{lvl}"] = t.to_json()
    return _summary(out)


def default_measure_functions(n: int) -> list[TestFunction]:
    """Five test functions mixing horizontal, vertical and windowed terms."""
    d = len(coordinate_order(n))
    top = d - 1

    def vec(**pos):
        v = [0] * d
        for key, m in pos.items():
            v[int(key[1:])] = m
        return tuple(v)

    return [
        TestFunction(n, {vec(c0=0): 1.0}),
        TestFunction(n, {vec(c0=1): 0.5, vec(c1=-1): 0.5j}),
        TestFunction(n, {vec(c0=0): 0.3, vec(**{f"c{top}": 1}): 0.7}, window=1),
        TestFunction(n, {vec(c0=0): 1.0}, window=2),
        TestFunction(n, {vec(c0=1, c1=1): 0.25, vec(**{f"c{top}": 2}): -0.5,
                         vec(c0=0): 0.5}, window=1),
    ]


def verify_measure(n: int, samples: int, seed: int = 0,
                   functions: Sequence[TestFunction] | None = None) -> dict:
    """Monte-Carlo means under Haar sampling against the cube integral."""
    n = _check_ns([n])[0]
    functions = list(functions) if functions else default_measure_functions(n)
    coords = haar_coords(n, 1, samples, np.random.default_rng(seed))
    t = Tally()
    details = []
    for f in functions:
        mc = complex(np.mean(f.phi_many(coords)))
        exact = cube_integral(f)
        tol = 4.0 / math.sqrt(samples) * sum(abs(c) for c in f.terms.values())
        diff = abs(mc - exact)
        t.record("mean_vs_cube", diff <= tol)
        details.append({"monte_carlo": [mc.real, mc.imag], "cube": [exact.real, exact.imag],
                        "abs_difference": diff, "tolerance": tol})
    res = t.to_json()
    res["functions"] = details
    return _summary({f"U{n}": res})


def _summary(groups: dict) -> dict:
    passed = sum(g["passed"] for g in groups.values())
    total = sum(g["total"] for g in groups.values())
    return {"groups": groups, "passed": passed, "total": total,
            "verdict": "pass" if passed == total else "fail"}
