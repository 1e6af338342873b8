"""The compact quotient U_n / U_n(Z).

Coordinates are Mal'cev coordinates of the second kind,
``g = prod_e exp(t_e E_e)`` with positions ``e = (i, j)`` ordered by
superdiagonal distance ``j - i`` and then by row.  Lattice points are exactly
the elements with integer coordinates, and the half-open cube ``[0, 1)^d`` is
a fundamental domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from . import _kernels as K
from .group import GroupElement, lcs_degree
from .scalars import Radical, is_exact

__all__ = [
    "coordinate_order",
    "coordinate_arrays",
    "to_malcev",
    "from_malcev",
    "is_lattice",
    "in_lattice_level",
    "coset_equal",
    "reduce",
    "haar_sample",
    "haar_coords",
    "TestFunction",
    "cube_integral",
    "LATTICE_TOL",
]

LATTICE_TOL = 1e-9


@lru_cache(maxsize=None)
def coordinate_order(n: int) -> tuple[tuple[int, int], ...]:
    """0-based entry positions in coordinate order."""
    return tuple((i, i + d) for d in range(1, n) for i in range(n - d))


@lru_cache(maxsize=None)
def coordinate_arrays(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    order = coordinate_order(n)
    oi = np.array([i for i, _ in order], dtype=np.int64)
    oj = np.array([j for _, j in order], dtype=np.int64)
    return oi, oj, oj - oi


def n_coords(n: int) -> int:
    return n * (n - 1) // 2


def to_malcev(g: GroupElement) -> tuple:
    """Coordinates ``t`` with ``g = prod_e exp(t_e E_e)``; exact in exact mode.

    Peels one factor at a time from the left: when position ``e`` is reached,
    every shorter chain has already been removed, so the entry equals ``t_e``.
    """
    n = g.n
    h = [list(r) for r in g.rows]
    out = []
    for i, j in coordinate_order(n):
        c = h[i][j]
        out.append(c)
        if c:
            hj = h[j]
            hi = h[i]
            for l in range(j, n):
                if hj[l]:
                    hi[l] = hi[l] - c * hj[l]
    return tuple(out)


def from_malcev(n: int, t: Sequence[object]) -> GroupElement:
    order = coordinate_order(n)
    if len(t) != len(order):
        raise ValueError(f"expected {len(order)} coordinates, got {len(t)}")
    floaty = any(isinstance(v, (float, np.floating)) for v in t)
    one, zero = (1.0, 0.0) if floaty else (1, 0)
    g = [[one if i == j else zero for j in range(n)] for i in range(n)]
    for (i, j), c in zip(order, t):
        if c:
            for r in range(i + 1):
                if g[r][i]:
                    g[r][j] = g[r][j] + c * g[r][i]
    return GroupElement(g, check=False)


def _is_int(v, tol: float) -> bool:
    if isinstance(v, (float, np.floating)):
        return abs(v - round(v)) <= tol
    if isinstance(v, Radical):
        return v.is_integer()
    if isinstance(v, int):
        return True
    return v.denominator == 1


def is_lattice(g: GroupElement, tol: float = LATTICE_TOL) -> bool:
    """Membership in Gamma = integer unitriangular matrices."""
    return all(_is_int(g.rows[i][j], tol) for i in range(g.n) for j in range(i + 1, g.n))


def in_lattice_level(g: GroupElement, i: int, tol: float = LATTICE_TOL) -> bool:
    """Membership in ``Gamma^i = Gamma ∩ N^i``."""
    if not is_lattice(g, tol):
        return False
    if g.mode == "float":
        return all(abs(g.rows[r][r + d]) <= tol for d in range(1, i) for r in range(g.n - d))
    return lcs_degree(g) >= i


def coset_equal(g: GroupElement, h: GroupElement, tol: float = LATTICE_TOL) -> bool:
    """``g Gamma == h Gamma``, i.e. ``g^-1 h`` is a lattice point."""
    return is_lattice(g.inverse() * h, tol)


def _generator_power(n: int, i: int, j: int, m: int) -> GroupElement:
    return GroupElement.from_upper(n, {(i, j): m}, mode="exact")


def reduce(g: GroupElement) -> tuple[GroupElement, GroupElement]:
    """Return ``(g0, gamma)`` with ``g * gamma == g0`` and coordinates of ``g0`` in [0, 1).

    Sweeps superdiagonal distances in ascending order: right-multiplying by
    lattice elements of ``N^d`` shifts the distance-``d`` coordinates by
    integers and leaves the shorter ones alone.
    """
    n = g.n
    order = coordinate_order(n)
    gamma = GroupElement.identity(n, "exact")
    cur = g
    for d in range(1, n):
        t = to_malcev(cur)
        step = GroupElement.identity(n, "exact")
        for e, (i, j) in enumerate(order):
            if j - i != d:
                continue
            m = math.floor(t[e])
            if m:
                step = step * _generator_power(n, i, j, -m)
        if not step.is_identity:
            cur = cur * step
            gamma = gamma * step
    return cur, gamma


def haar_coords(n: int, level: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Coordinates of ``size`` Haar samples of ``N^level / Gamma^level``.

    Shape ``(size, d)``; positions at distance ``< level`` are zero.
    """
    k = n - 1
    if not 1 <= level <= k:
        raise ValueError(f"level must be in 1..{k}, got {level}")
    _, _, dist = coordinate_arrays(n)
    mask = dist >= level
    out = np.zeros((size, len(dist)))
    out[:, mask] = rng.random((size, int(mask.sum())))
    return out


def haar_sample(n: int, level: int, rng: np.random.Generator) -> GroupElement:
    """One Haar-random element of ``N^level`` in the fundamental domain."""
    t = haar_coords(n, level, 1, rng)[0]
    return from_malcev(n, [float(v) for v in t])


@dataclass
class TestFunction:
    """Trigonometric polynomial in fundamental-domain coordinates.

    ``terms`` maps integer frequency vectors (length ``n(n-1)/2``) to complex
    coefficients.  ``window = s > 0`` multiplies by ``prod (4 t (1 - t))^s``
    over the coordinates at superdiagonal distance >= 2.
    """

    __test__ = False  # not a pytest class

    n: int
    terms: dict[tuple[int, ...], complex] = field(default_factory=lambda: {})
    window: int = 0

    def __post_init__(self):
        d = n_coords(self.n)
        clean = {}
        for m, c in self.terms.items():
            m = tuple(int(v) for v in m)
            if len(m) != d:
                raise ValueError(f"frequency {m} has length {len(m)}, expected {d}")
            c = complex(c)
            if c != 0:
                clean[m] = clean.get(m, 0) + c
        self.terms = clean
        if self.window < 0:
            raise ValueError("window order must be >= 0")

    @classmethod
    def constant(cls, n: int, value: complex = 1.0) -> "TestFunction":
        return cls(n, {(0,) * n_coords(n): value})

    @classmethod
    def character(cls, n: int, freq: Mapping[tuple[int, int], int] | Sequence[int],
                  coeff: complex = 1.0, window: int = 0) -> "TestFunction":
        """Single exponential; ``freq`` is a full vector or ``{(i, j): m}`` (0-based)."""
        if isinstance(freq, Mapping):
            order = coordinate_order(n)
            m = [0] * len(order)
            for pos, v in freq.items():
                m[order.index(tuple(pos))] = int(v)
        else:
            m = list(freq)
        return cls(n, {tuple(m): coeff}, window)

    @property
    def bound(self) -> float:
        """``sum |c_m|``, an upper bound for ``|f|``."""
        return float(sum(abs(c) for c in self.terms.values()))

    def window_mask(self) -> np.ndarray:
        _, _, dist = coordinate_arrays(self.n)
        return dist >= 2

    def packed(self, nterms: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        d = n_coords(self.n)
        T = max(len(self.terms), 1) if nterms is None else nterms
        freqs = np.zeros((T, d), dtype=np.int64)
        coeffs = np.zeros(T, dtype=np.complex128)
        for s, (m, c) in enumerate(sorted(self.terms.items())):
            freqs[s] = m
            coeffs[s] = c
        return freqs, coeffs

    def phi(self, t: Sequence[float]) -> complex:
        """Value at fundamental-domain coordinates ``t``."""
        freqs, coeffs = self.packed()
        return K.eval_trig(np.asarray(t, dtype=float), freqs, coeffs, len(self.terms),
                           self.window, self.window_mask())

    def phi_many(self, coords: np.ndarray) -> np.ndarray:
        freqs, coeffs = self.packed()
        out = np.empty(coords.shape[0], dtype=np.complex128)
        K.eval_many(np.ascontiguousarray(coords, dtype=float), freqs, coeffs,
                    len(self.terms), self.window, self.window_mask(), out)
        return out

    def __call__(self, g: GroupElement) -> complex:
        if g.n != self.n:
            raise ValueError("dimension mismatch")
        g = g.to_float() if g.mode != "float" else g
        g0, _ = reduce(g)
        return self.phi([float(v) for v in to_malcev(g0)])

    def to_config(self) -> dict:
        return {
            "window": self.window,
            "terms": [{"m": list(m), "re": c.real, "im": c.imag}
                      for m, c in sorted(self.terms.items())],
        }

    @classmethod
    def from_config(cls, n: int, spec: Mapping) -> "TestFunction":
        terms = {}
        for term in spec.get("terms", []):
            m = tuple(int(v) for v in term["m"])
            terms[m] = terms.get(m, 0) + complex(float(term.get("re", 0.0)),
                                                  float(term.get("im", 0.0)))
        return cls(n, terms, int(spec.get("window", 0)))


@lru_cache(maxsize=None)
def _gauss_legendre(points: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(points)
    return (x + 1) / 2, w / 2


def cube_integral(f: TestFunction, points: int = 48) -> complex:
    """Integral of ``f`` over the fundamental domain.

    The integrand is a sum of separable terms, so the tensor-product rule
    collapses to a product of one-dimensional Gauss-Legendre sums.  Without a
    window only the constant term survives and ``c_0`` is returned as is.
    """
    d = n_coords(f.n)
    zero = (0,) * d
    if f.window == 0:
        return complex(f.terms.get(zero, 0j))
    x, w = _gauss_legendre(points)
    mask = f.window_mask()
    wx = (4 * x * (1 - x)) ** f.window
    total = 0j
    for m, c in f.terms.items():
        prod = complex(c)
        for e in range(d):
            if mask[e]:
                prod *= complex(np.sum(w * wx * np.exp(2j * np.pi * m[e] * x)))
            elif m[e] != 0:
                prod = 0j
                break
        total += prod
    return total
