"""The upper unitriangular group U_n over exact or float scalars.

U_n is a connected, simply connected nilpotent Lie group of class
``k = n - 1``.  Its lower central series is ``N^i = {g : superdiagonals
1..i-1 vanish}``.  Commutators follow ``[g, h] = g^-1 h^-1 g h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .scalars import ModeError, Radical, is_exact

__all__ = [
    "GroupElement",
    "GroupContext",
    "commutator",
    "nested_commutator",
    "lcs_degree",
    "mat_log",
    "mat_exp",
    "real_pow",
    "heisenberg",
]

Matrix = tuple[tuple[object, ...], ...]


def _is_floatlike(v) -> bool:
    return isinstance(v, (float, np.floating))


def _entry_mode(v) -> str:
    if _is_floatlike(v):
        return "float"
    if is_exact(v):
        if isinstance(v, int) or (isinstance(v, Fraction) and v.denominator == 1):
            return "integer"
        if isinstance(v, Radical) and v.is_integer():
            return "integer"
        return "exact"
    raise TypeError(f"unsupported scalar {v!r}")


def _join_modes(m1: str, m2: str) -> str:
    if m1 == m2 or m2 == "integer":
        return m1
    if m1 == "integer":
        return m2
    raise ModeError(f"cannot combine {m1} and {m2} elements")


class GroupElement:
    """An ``n x n`` upper unitriangular matrix.

    ``mode`` is ``"float"``, ``"exact"`` or ``"integer"``; integer-valued
    elements (lattice points, the identity) combine with either of the others.
    """

    __slots__ = ("n", "rows", "mode", "_hash")

    def __init__(self, rows: Sequence[Sequence[object]], *, check: bool = True):
        rows = tuple(tuple(r) for r in rows)
        n = len(rows)
        if check:
            if n < 2 or any(len(r) != n for r in rows):
                raise ValueError("expected a square matrix of size >= 2")
            for i in range(n):
                for j in range(i + 1):
                    want = 1 if i == j else 0
                    if rows[i][j] != want:
                        raise ValueError(f"not unitriangular at ({i}, {j}): {rows[i][j]!r}")
        mode = "integer"
        for i in range(n):
            for j in range(i + 1, n):
                mode = _join_modes(mode, _entry_mode(rows[i][j]))
        self.n = n
        self.rows = rows
        self.mode = mode
        self._hash = None

    @classmethod
    def _make(cls, rows, mode: str) -> "GroupElement":
        # trusted constructor for results of the group law
        g = object.__new__(cls)
        g.n = len(rows)
        g.rows = tuple(tuple(r) for r in rows)
        g.mode = mode
        g._hash = None
        return g

    # construction ----------------------------------------------------

    @classmethod
    def identity(cls, n: int, mode: str = "exact") -> "GroupElement":
        one, zero = (1.0, 0.0) if mode == "float" else (1, 0)
        rows = [[one if i == j else zero for j in range(n)] for i in range(n)]
        return cls(rows, check=False)

    @classmethod
    def from_upper(cls, n: int, entries: dict[tuple[int, int], object],
                   mode: str = "exact") -> "GroupElement":
        """Build from 0-based ``(i, j) -> value`` strictly-upper entries."""
        one, zero = (1.0, 0.0) if mode == "float" else (1, 0)
        rows = [[one if i == j else zero for j in range(n)] for i in range(n)]
        for (i, j), v in entries.items():
            if not 0 <= i < j < n:
                raise ValueError(f"({i}, {j}) is not strictly upper")
            rows[i][j] = v
        return cls(rows, check=False)

    @classmethod
    def from_array(cls, arr) -> "GroupElement":
        arr = np.asarray(arr, dtype=float)
        return cls([[float(v) for v in row] for row in arr])

    def to_array(self) -> np.ndarray:
        return np.array([[float(v) for v in r] for r in self.rows], dtype=float)

    def to_float(self) -> "GroupElement":
        return GroupElement([[float(v) for v in r] for r in self.rows], check=False)

    # access ----------------------------------------------------------

    def __getitem__(self, ij: tuple[int, int]):
        i, j = ij
        return self.rows[i][j]

    @property
    def is_identity(self) -> bool:
        return all(not self.rows[i][j] for i in range(self.n) for j in range(i + 1, self.n))

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.n == other.n and self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(str(v) for v in r) for r in self.rows)
        return f"GroupElement([{body}])"

    def allclose(self, other: "GroupElement", tol: float = 1e-9) -> bool:
        return self.n == other.n and bool(
            np.allclose(self.to_array(), other.to_array(), atol=tol, rtol=0.0)
        )

    # group law -------------------------------------------------------

    def _check(self, other: "GroupElement") -> str:
        if not isinstance(other, GroupElement):
            raise TypeError(f"expected GroupElement, got {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
        return _join_modes(self.mode, other.mode)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        mode = self._check(other)
        n, A, B = self.n, self.rows, other.rows
        C = [list(r) for r in A]
        for i in range(n):
            Ai, Ci = A[i], C[i]
            for j in range(i + 1, n):
                s = Ai[j] + B[i][j]
                for l in range(i + 1, j):
                    a = Ai[l]
                    if a:
                        b = B[l][j]
                        if b:
                            s = s + a * b
                Ci[j] = s
        return GroupElement._make(C, mode)

    def inverse(self) -> "GroupElement":
        # back-substitution on A B = I; same result as the terminating
        # Neumann series sum_{m<n} (-X)^m
        n, A = self.n, self.rows
        B = [list(r) for r in A]
        for i in range(n - 2, -1, -1):
            for j in range(i + 1, n):
                s = -A[i][j]
                for l in range(i + 1, j):
                    a = A[i][l]
                    if a:
                        b = B[l][j]
                        if b:
                            s = s - a * b
                B[i][j] = s
        return GroupElement._make(B, self.mode)

    def __pow__(self, m: int) -> "GroupElement":
        if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
            raise TypeError("int_pow needs an integer exponent; use real_pow for real t")
        m = int(m)
        base = self if m >= 0 else self.inverse()
        m = abs(m)
        mode = "float" if self.mode == "float" else "exact"
        out = GroupElement.identity(self.n, mode)
        while m:
            if m & 1:
                out = out * base
            m >>= 1
            if m:
                base = base * base
        return out

    int_pow = __pow__


def commutator(g: GroupElement, h: GroupElement) -> GroupElement:
    """``[g, h] = g^-1 h^-1 g h``."""
    return g.inverse() * h.inverse() * g * h


def nested_commutator(*xs: GroupElement) -> GroupElement:
    """Left-nested ``[x1, x2, ..., xm] = [...[[x1, x2], x3], ..., xm]``."""
    if len(xs) < 2:
        raise ValueError("need at least two elements")
    c = commutator(xs[0], xs[1])
    for x in xs[2:]:
        c = commutator(c, x)
    return c


def lcs_degree(g: GroupElement) -> float:
    """Largest ``i`` with ``g`` in ``N^i``; ``math.inf`` for the identity."""
    n = g.n
    for d in range(1, n):
        if any(g.rows[i][i + d] for i in range(n - d)):
            return d
    return math.inf


# -- nilpotent exp / log ---------------------------------------------------

def _strict_mul(X: Matrix, Y: Matrix, n: int) -> list[list[object]]:
    Z = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 2, n):
            s = 0
            for l in range(i + 1, j):
                if X[i][l] and Y[l][j]:
                    s = s + X[i][l] * Y[l][j]
            Z[i][j] = s
    return Z


def _scale(X, c, n):
    return [[X[i][j] * c if X[i][j] else 0 for j in range(n)] for i in range(n)]


def _add(X, Y, n):
    return [[X[i][j] + Y[i][j] for j in range(n)] for i in range(n)]


def mat_log(g: GroupElement) -> tuple[tuple[object, ...], ...]:
    """``log(I + Y) = sum_{m<n} (-1)^(m+1) Y^m / m`` (strictly upper result)."""
    n = g.n
    Y = [[g.rows[i][j] if j > i else 0 for j in range(n)] for i in range(n)]
    out = [row[:] for row in Y]
    P = Y
    for m in range(2, n):
        P = _strict_mul(P, Y, n)
        c = Fraction((-1) ** (m + 1), m) if g.mode != "float" else (-1) ** (m + 1) / m
        out = _add(out, _scale(P, c, n), n)
    return tuple(tuple(r) for r in out)


def mat_exp(X: Sequence[Sequence[object]]) -> GroupElement:
    """``exp(X) = sum_{m<n} X^m / m!`` for strictly upper triangular ``X``."""
    n = len(X)
    X = [[X[i][j] if j > i else 0 for j in range(n)] for i in range(n)]
    if any(X[i][j] for i in range(n) for j in range(i + 1)):
        raise ValueError("exp expects a strictly upper triangular matrix")
    floaty = any(_is_floatlike(X[i][j]) for i in range(n) for j in range(n))
    out = [[(1.0 if floaty else 1) if i == j else X[i][j] for j in range(n)] for i in range(n)]
    P = X
    for m in range(2, n):
        P = _strict_mul(P, X, n)
        c = 1.0 / math.factorial(m) if floaty else Fraction(1, math.factorial(m))
        out = _add(out, _scale(P, c, n), n)
    if floaty:
        out = [[float(v) for v in row] for row in out]
    return GroupElement(out, check=False)


def real_pow(g: GroupElement, t: float) -> GroupElement:
    """``exp(t log g)`` in float mode."""
    if g.mode == "exact":
        raise ModeError("real_pow is float-mode only")
    g = g.to_float()
    L = mat_log(g)
    t = float(t)
    return mat_exp([[v * t for v in row] for row in L])


@dataclass(frozen=True)
class GroupContext:
    """The ambient group U_n with nilpotency class ``k = n - 1``."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")

    @property
    def k(self) -> int:
        return self.n - 1

    def identity(self, mode: str = "exact") -> GroupElement:
        return GroupElement.identity(self.n, mode)

    def in_level(self, g: GroupElement, i: int) -> bool:
        """Membership ``g in N^i``."""
        return lcs_degree(g) >= i


def heisenberg(p, q, r) -> GroupElement:
    """U_3 element with entries ``(1,2) = p``, ``(2,3) = q``, ``(1,3) = r``."""
    return GroupElement.from_upper(3, {(0, 1): p, (1, 2): q, (0, 2): r},
                                   mode="float" if _is_floatlike(p) else "exact")


def matrix_from_upper(n: int, values: Iterable[object]) -> list[list[object]]:
    """Row-major strictly-upper values to a full matrix (helper for configs)."""
    values = list(values)
    rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    it = iter(values)
    for i in range(n):
        for j in range(i + 1, n):
            rows[i][j] = next(it)
    return rows
