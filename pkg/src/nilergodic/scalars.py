"""Exact arithmetic in the ring spanned by square roots of squarefree integers.

A :class:`Radical` is a finite sum ``sum(q_d * sqrt(d))`` with rational
coefficients ``q_d`` and squarefree ``d >= 1`` (``d == 1`` is the rational
part).  The ring is closed under ``+``, ``-`` and ``*``; division is only
allowed by nonzero rationals.

Python ``int`` and :class:`fractions.Fraction` values are accepted wherever a
Radical is expected.  Floats are the "float mode" and never mix with exact
values: combining the two raises :class:`ModeError`.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping, Sequence

__all__ = [
    "ModeError",
    "Radical",
    "sqrt",
    "parse_scalar",
    "is_exact",
    "floor",
    "to_float",
    "rational_kernel",
    "integer_kernel",
    "hermite_rows",
]


class ModeError(TypeError):
    """Raised when exact and float values are combined."""


@lru_cache(maxsize=4096)
def _squarefree_split(d: int) -> tuple[int, int]:
    """Return ``(s, r)`` with ``d == s*s*r`` and ``r`` squarefree."""
    if d <= 0:
        raise ValueError(f"radicand must be positive, got {d}")
    s, r = 1, d
    p = 2
    while p * p <= r:
        while r % (p * p) == 0:
            r //= p * p
            s *= p
        p += 1
    return s, r


def _as_fraction(q) -> Fraction:
    if isinstance(q, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(q, (int, Fraction)):
        return Fraction(q)
    if isinstance(q, Rational):
        return Fraction(q.numerator, q.denominator)
    if isinstance(q, float):
        raise ModeError("float value in exact arithmetic")
    raise TypeError(f"not a rational: {q!r}")


class Radical:
    """Element of the Q-span of {sqrt(d) : d squarefree}."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | None = None):
        acc: dict[int, Fraction] = {}
        for d, q in (terms or {}).items():
            q = _as_fraction(q)
            if not q:
                continue
            s, r = _squarefree_split(int(d))
            acc[r] = acc.get(r, Fraction(0)) + q * s
        self._terms = {d: q for d, q in sorted(acc.items()) if q}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[int, Fraction]) -> "Radical":
        # terms already normalized: squarefree keys, nonzero coefficients
        obj = cls.__new__(cls)
        obj._terms = dict(sorted(terms.items()))
        obj._hash = None
        return obj

    @classmethod
    def coerce(cls, value) -> "Radical":
        if isinstance(value, Radical):
            return value
        q = _as_fraction(value)
        return cls._raw({1: q} if q else {})

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def coefficient(self, d: int) -> Fraction:
        return self._terms.get(d, Fraction(0))

    @property
    def rational_part(self) -> Fraction:
        return self.coefficient(1)

    def radicands(self) -> tuple[int, ...]:
        return tuple(self._terms)

    def is_rational(self) -> bool:
        return all(d == 1 for d in self._terms)

    def is_integer(self) -> bool:
        return self.is_rational() and self.rational_part.denominator == 1

    def is_zero(self) -> bool:
        return not self._terms

    # ring operations -------------------------------------------------

    def __add__(self, other):
        try:
            other = Radical.coerce(other)
        except ModeError:
            raise
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for d, q in other._terms.items():
            v = out.get(d, Fraction(0)) + q
            if v:
                out[d] = v
            else:
                out.pop(d, None)
        return Radical._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Radical._raw({d: -q for d, q in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            other = Radical.coerce(other)
        except ModeError:
            raise
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if not other:
                return Radical._raw({})
            return Radical._raw({d: q * other for d, q in self._terms.items()})
        try:
            other = Radical.coerce(other)
        except ModeError:
            raise
        except TypeError:
            return NotImplemented
        out: dict[int, Fraction] = {}
        for d1, q1 in self._terms.items():
            for d2, q2 in other._terms.items():
                g = math.gcd(d1, d2)
                d = (d1 // g) * (d2 // g)
                v = out.get(d, Fraction(0)) + q1 * q2 * g
                if v:
                    out[d] = v
                else:
                    out.pop(d, None)
        return Radical._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        q = _as_fraction(other) if not isinstance(other, Radical) else None
        if q is None:
            if not other.is_rational():
                raise TypeError("division by an irrational radical is not supported")
            q = other.rational_part
        if not q:
            raise ZeroDivisionError("division by zero")
        return Radical._raw({d: c / q for d, c in self._terms.items()})

    def __pow__(self, m: int):
        if not isinstance(m, int) or m < 0:
            raise TypeError("only non-negative integer powers")
        out, base = Radical.coerce(1), self
        while m:
            if m & 1:
                out = out * base
            base = base * base
            m >>= 1
        return out

    # comparison --------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, float):
            return False
        try:
            other = Radical.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(self.rational_part)
            else:
                self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        """Rational interval ``[lo, hi]`` containing the value, width ``O(2**-bits)``."""
        lo = hi = Fraction(0)
        scale = 1 << bits
        for d, q in self._terms.items():
            if d == 1:
                lo += q
                hi += q
                continue
            s = math.isqrt(d << (2 * bits))
            a, b = Fraction(s, scale), Fraction(s + 1, scale)
            if q > 0:
                lo += q * a
                hi += q * b
            else:
                lo += q * b
                hi += q * a
        return lo, hi

    def sign(self) -> int:
        if not self._terms:
            return 0
        if self.is_rational():
            return 1 if self.rational_part > 0 else -1
        bits = 64
        while True:
            lo, hi = self.enclosure(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __floor__(self) -> int:
        if self.is_rational():
            return math.floor(self.rational_part)
        # a non-integer value sits strictly between two integers, so the
        # enclosure eventually fits between them
        bits = 64
        while True:
            lo, hi = self.enclosure(bits)
            if math.floor(lo) == math.floor(hi):
                return math.floor(lo)
            bits *= 2

    def __float__(self) -> float:
        if self.is_rational():
            return float(self.rational_part)
        lo, hi = self.enclosure(80)
        return float((lo + hi) / 2)

    def __complex__(self):
        return complex(float(self))

    def __repr__(self):
        return f"Radical({str(self)!r})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for d, q in self._terms.items():
            if d == 1:
                parts.append(str(q))
            elif abs(q) == 1:
                parts.append(("-" if q < 0 else "") + f"sqrt({d})")
            else:
                parts.append(f"{q}*sqrt({d})")
        return " + ".join(parts).replace("+ -", "- ")


def sqrt(d: int) -> Radical:
    """Exact square root of a non-negative integer."""
    if d == 0:
        return Radical()
    return Radical({d: 1})


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:
           (?P<coef>\d+(?:/\d+)?)\s*(?:\*\s*sqrt\(\s*(?P<rad1>\d+)\s*\))?
         | sqrt\(\s*(?P<rad2>\d+)\s*\)(?:\s*/\s*(?P<den>\d+))?
        )\s*""",
    re.VERBOSE,
)


def parse_scalar(text: str | int, mode: str = "exact"):
    """Parse ``"1/2 + 3/4*sqrt(2)"`` style text.

    Terms are ``q``, ``q*sqrt(d)``, ``sqrt(d)`` or ``sqrt(d)/m`` joined by
    ``+``/``-``.  In float mode the exact value is converted to a float.
    """
    if isinstance(text, bool):
        raise ValueError("bool is not a scalar")
    if isinstance(text, int):
        value = Radical.coerce(text)
    else:
        s = str(text).strip()
        if not s:
            raise ValueError("empty scalar")
        pos = 0
        terms: dict[int, Fraction] = {}
        first = True
        while pos < len(s):
            m = _TERM.match(s, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse scalar {text!r} at position {pos}")
            if not first and m.group("sign") is None:
                raise ValueError(f"missing operator in {text!r} at position {pos}")
            sign = -1 if m.group("sign") == "-" else 1
            try:
                if m.group("rad2") is not None:
                    q = Fraction(1, int(m.group("den") or 1))
                    d = int(m.group("rad2"))
                else:
                    q = Fraction(m.group("coef"))
                    d = int(m.group("rad1") or 1)
            except ZeroDivisionError as exc:
                raise ValueError(f"zero denominator in {text!r}") from exc
            if d == 0:
                q, d = Fraction(0), 1
            terms[d] = terms.get(d, Fraction(0)) + sign * q
            pos = m.end()
            first = False
        value = Radical(terms)
    if mode == "float":
        return float(value)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    return value


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, Radical)) and not isinstance(x, bool)


def floor(x) -> int:
    """Floor of an exact or float scalar."""
    return math.floor(x)


def to_float(x) -> float:
    return float(x)


# -- integer linear algebra ------------------------------------------------


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _rows_to_integers(rows: Iterable[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        row = [Fraction(v) for v in row]
        den = 1
        for v in row:
            den = den * v.denominator // math.gcd(den, v.denominator)
        out.append([int(v * den) for v in row])
    return out


def hermite_rows(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form; returns the nonzero rows (a lattice basis)."""
    A = [list(map(int, r)) for r in rows]
    if not A:
        return []
    ncols = len(A[0])
    r = 0
    for c in range(ncols):
        # gcd-combine column c into row r
        for i in range(r + 1, len(A)):
            if A[i][c] == 0:
                continue
            g, s, t = _ext_gcd(A[r][c], A[i][c])
            if g == 0:
                continue
            u, v = A[r][c] // g, A[i][c] // g
            ri, rr = A[i], A[r]
            A[r] = [s * x + t * y for x, y in zip(rr, ri)]
            A[i] = [u * y - v * x for x, y in zip(rr, ri)]
        if r < len(A) and A[r][c] != 0:
            if A[r][c] < 0:
                A[r] = [-x for x in A[r]]
            for i in range(r):
                q = A[i][c] // A[r][c]
                if q:
                    A[i] = [x - q * y for x, y in zip(A[i], A[r])]
            r += 1
            if r == len(A):
                break
    return [row for row in A[:r] if any(row)]


def integer_kernel(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[tuple[int, ...]]:
    """Basis of ``{m in Z^ncols : A m = 0}`` for a rational matrix ``A``.

    Column operations reduce ``A`` to echelon form while tracking a unimodular
    matrix ``U`` with ``A U = [H | 0]``; the columns of ``U`` opposite the zero
    block span the kernel lattice.
    """
    A = _rows_to_integers(rows)
    U = [[int(i == j) for j in range(ncols)] for i in range(ncols)]  # columns of U = U[j]
    cols = [[A[i][j] for i in range(len(A))] for j in range(ncols)]
    piv = 0
    for i in range(len(A)):
        if piv >= ncols:
            break
        for j in range(piv + 1, ncols):
            if cols[j][i] == 0:
                continue
            a, b = cols[piv][i], cols[j][i]
            g, s, t = _ext_gcd(a, b)
            u, v = a // g, b // g
            cp, cj = cols[piv], cols[j]
            up, uj = U[piv], U[j]
            cols[piv] = [s * x + t * y for x, y in zip(cp, cj)]
            cols[j] = [u * y - v * x for x, y in zip(cp, cj)]
            U[piv] = [s * x + t * y for x, y in zip(up, uj)]
            U[j] = [u * y - v * x for x, y in zip(up, uj)]
        if cols[piv][i] != 0:
            piv += 1
    basis = [U[j] for j in range(piv, ncols)]
    return [tuple(r) for r in hermite_rows(basis)] if basis else []


def rational_kernel(matrix: Sequence[Sequence[object]], irrational_only: bool = False
                    ) -> list[tuple[int, ...]]:
    """Integer vectors ``m`` with ``M m = 0`` for a matrix of exact scalars.

    Each entry is expanded over the radical basis, giving one rational row per
    (row, radicand) pair.  With ``irrational_only`` the ``sqrt(1)`` rows are
    dropped, so the result is the kernel of the irrational part only.
    """
    if not matrix:
        return []
    ncols = len(matrix[0])
    rows: list[list[Fraction]] = []
    for row in matrix:
        if len(row) != ncols:
            raise ValueError("ragged matrix")
        entries = []
        for v in row:
            if isinstance(v, float):
                raise ModeError("rational_kernel needs exact entries")
            entries.append(Radical.coerce(v))
        keys = sorted({d for v in entries for d in v.radicands()})
        for d in keys:
            if irrational_only and d == 1:
                continue
            rows.append([v.coefficient(d) for v in entries])
    if not rows:
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    return integer_kernel(rows, ncols)
