"""Ergodicity of nil-translations via the maximal torus.

By Green's criterion a translation of a nilmanifold is ergodic iff the
rotation it induces on the maximal torus ``G / [G, G] Λ`` is ergodic, which
for a rotation by ``α`` in ``R^d / Z^d`` means no nonzero integer ``χ`` has
``χ·α`` in ``Z``.

Everything here is exact.  A group is described by a *law*: a polynomial
chart ``coords``/``element`` together with its multiplication, inverse and
lattice generators.  Lie brackets are read off the ``t^2`` coefficient of
the commutator curve ``u(t) v(t) u(t)^-1 v(t)^-1`` and log-coordinates off the
linear coefficient of ``m -> coords(g^m)``; both curves are polynomial, so
Newton interpolation at integer nodes recovers them exactly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .group import GroupElement
from .leibman import TildeElement, star, star_identity, star_inverse, sx_generator
from .nilmanifold import coordinate_order, from_malcev, to_malcev
from .scalars import ModeError, Radical, hermite_rows, rational_kernel

__all__ = [
    "MatrixLaw",
    "StarLaw",
    "StructureConstants",
    "ErgodicityResult",
    "InterpolationError",
    "compute_structure",
    "matrix_structure",
    "star_structure",
    "log_coords",
    "torus_coords",
    "is_ergodic_rotation",
    "green_ergodic_T",
    "green_ergodic_Sx",
    "psi_eval",
]

MAX_NODES = 96
CONFIRM = 3


class InterpolationError(RuntimeError):
    """The curve did not stabilize as a polynomial within ``MAX_NODES`` nodes."""


# -- group laws -------------------------------------------------------------


class MatrixLaw:
    """U_n in second-kind Mal'cev coordinates; lattice U_n(Z)."""

    def __init__(self, n: int):
        self.n = n
        self.dim = n * (n - 1) // 2

    def coords(self, g: GroupElement) -> tuple:
        return to_malcev(g)

    def element(self, t: Sequence) -> GroupElement:
        return from_malcev(self.n, list(t))

    def mul(self, g, h):
        return g * h

    def inv(self, g):
        return g.inverse()

    def identity(self):
        return GroupElement.identity(self.n)

    def generators(self) -> list[GroupElement]:
        return [self.element([int(r == e) for r in range(self.dim)]) for e in range(self.dim)]

    def __repr__(self):
        return f"MatrixLaw(n={self.n})"


class StarLaw:
    """The ⋆-group over U_n; component ``i`` uses the coordinates at distance ``>= i``."""

    def __init__(self, n: int):
        self.n = n
        self.k = n - 1
        order = coordinate_order(n)
        self.blocks = [[e for e, (a, b) in enumerate(order) if b - a >= i]
                       for i in range(1, n)]
        self.dim = sum(len(b) for b in self.blocks)
        self._d = len(order)

    def coords(self, y: TildeElement) -> tuple:
        out = []
        for comp, block in zip(y.components, self.blocks):
            t = to_malcev(comp)
            out.extend(t[e] for e in block)
        return tuple(out)

    def element(self, t: Sequence) -> TildeElement:
        t = list(t)
        comps, pos = [], 0
        for block in self.blocks:
            full = [0] * self._d
            for e in block:
                full[e] = t[pos]
                pos += 1
            comps.append(from_malcev(self.n, full))
        return TildeElement(tuple(comps))

    def mul(self, x, y):
        return star(x, y)

    def inv(self, x):
        return star_inverse(x)

    def identity(self):
        return star_identity(self.n)

    def generators(self) -> list[TildeElement]:
        return [self.element([int(r == e) for r in range(self.dim)]) for e in range(self.dim)]

    def __repr__(self):
        return f"StarLaw(n={self.n})"


# -- exact polynomial interpolation ----------------------------------------


def _newton(curve: Callable[[int], tuple], dim: int) -> list[list]:
    """Forward differences ``Δ^r f(0)`` until ``CONFIRM`` consecutive orders vanish.

    ``diag`` holds ``[f(m), Δf(m-1), ..., Δ^m f(0)]`` after node ``m``.
    """
    diag: list[list] = []
    newton: list[list] = []
    zero_run = 0
    for node in range(MAX_NODES):
        row = list(curve(node))
        new_diag = [row]
        for old in diag:
            row = [p - q for p, q in zip(row, old)]
            new_diag.append(row)
        diag = new_diag
        newton.append(row)
        if node >= 1 and not any(row):
            zero_run += 1
            if zero_run >= CONFIRM:
                return newton[: len(newton) - CONFIRM]
        else:
            zero_run = 0
    raise InterpolationError(f"no polynomial of degree < {MAX_NODES - CONFIRM} fits")


@lru_cache(maxsize=None)
def _binomial_monomials(r: int) -> tuple[Fraction, ...]:
    """Monomial coefficients of ``C(t, r) = t (t-1) ... (t-r+1) / r!``."""
    poly = [Fraction(1)]
    for s in range(r):
        nxt = [Fraction(0)] * (len(poly) + 1)
        for p, c in enumerate(poly):
            nxt[p + 1] += c
            nxt[p] -= s * c
        poly = nxt
    f = math.factorial(r)
    return tuple(c / f for c in poly)


def _monomial(newton: list[list], power: int, dim: int) -> list:
    out = [0] * dim
    for r, delta in enumerate(newton):
        mono = _binomial_monomials(r)
        if power < len(mono) and mono[power]:
            c = mono[power]
            out = [o + c * v if v else o for o, v in zip(out, delta)]
    return out


def log_coords(law, g) -> list:
    """Log-coordinates of ``g``: the tangent of the one-parameter subgroup through it."""
    powers = [law.identity()]

    def curve(m: int):
        while len(powers) <= m:
            powers.append(law.mul(powers[-1], g))
        return law.coords(powers[m])

    return _monomial(_newton(curve, law.dim), 1, law.dim)


def _bracket(law, a: int, b: int) -> list:
    def curve(t: int):
        u = law.element([t if r == a else 0 for r in range(law.dim)])
        v = law.element([t if r == b else 0 for r in range(law.dim)])
        c = law.mul(law.mul(law.mul(u, v), law.inv(u)), law.inv(v))
        return law.coords(c)

    return _monomial(_newton(curve, law.dim), 2, law.dim)


# -- rational linear algebra --------------------------------------------------


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    A = [list(r) for r in rows]
    pivots: list[int] = []
    if not A:
        return [], []
    ncols = len(A[0])
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        pv = A[r][c]
        A[r] = [v / pv for v in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def _inverse(B: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(B)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(B)]
    red, piv = _rref(aug)
    if piv[:n] != list(range(n)):
        raise ArithmeticError("singular lattice basis")
    return [row[n:] for row in red]


@dataclass
class StructureConstants:
    """Bracket table, derived algebra and maximal-torus data of a law."""

    law: object
    dim: int
    brackets: dict[tuple[int, int], tuple[Fraction, ...]]
    derived_basis: list[list[Fraction]]
    derived_pivots: list[int]
    projection: list[list[Fraction]]
    lattice_basis: list[list[Fraction]]
    lattice_inverse: list[list[Fraction]] = field(repr=False)

    @property
    def torus_dim(self) -> int:
        return len(self.lattice_basis)

    def bracket(self, u: Sequence, v: Sequence) -> list:
        """Bilinear extension of the table."""
        out = [Fraction(0)] * self.dim
        for a, ua in enumerate(u):
            if not ua:
                continue
            for b, vb in enumerate(v):
                if not vb or a == b:
                    continue
                key, sgn = ((a, b), 1) if a < b else ((b, a), -1)
                col = self.brackets[key]
                c = ua * vb * sgn
                out = [o + c * w for o, w in zip(out, col)]
        return out

    def jacobi_holds(self) -> bool:
        basis = [[Fraction(int(r == e)) for r in range(self.dim)] for e in range(self.dim)]
        for a in range(self.dim):
            for b in range(a + 1, self.dim):
                for c in range(b + 1, self.dim):
                    x, y, z = basis[a], basis[b], basis[c]
                    s1 = self.bracket(x, self.bracket(y, z))
                    s2 = self.bracket(y, self.bracket(z, x))
                    s3 = self.bracket(z, self.bracket(x, y))
                    if any(p + q + r for p, q, r in zip(s1, s2, s3)):
                        return False
        return True

    def project(self, v: Sequence) -> list:
        """Image of a tangent vector in the abelianization ``g / [g, g]``."""
        v = list(v)
        for row, p in zip(self.derived_basis, self.derived_pivots):
            c = v[p]
            if c:
                v = [x - c * w if w else x for x, w in zip(v, row)]
        pset = set(self.derived_pivots)
        return [v[i] for i in range(self.dim) if i not in pset]


def compute_structure(law) -> StructureConstants:
    D = law.dim
    brackets = {}
    for a in range(D):
        for b in range(a + 1, D):
            brackets[(a, b)] = tuple(Fraction(v) for v in _bracket(law, a, b))
    derived, pivots = _rref([list(v) for v in brackets.values() if any(v)])
    pset = set(pivots)
    free = [i for i in range(D) if i not in pset]
    # projection as a D x d_tor matrix: column c is the image coordinate c
    projection = []
    for e in range(D):
        unit = [Fraction(int(r == e)) for r in range(D)]
        v = unit
        for row, p in zip(derived, pivots):
            c = v[p]
            if c:
                v = [x - c * w for x, w in zip(v, row)]
        projection.append([v[i] for i in free])
    partial = StructureConstants(law, D, brackets, derived, pivots, projection, [], [])
    images = [[Fraction(c) for c in partial.project(log_coords(law, g))]
              for g in law.generators()]
    den = 1
    for row in images:
        for c in row:
            den = den * c.denominator // math.gcd(den, c.denominator)
    hnf = hermite_rows([[int(c * den) for c in row] for row in images])
    basis = [[Fraction(c, den) for c in row] for row in hnf]
    if len(basis) != len(free):
        raise ArithmeticError("projected lattice is not full rank")
    partial.lattice_basis = basis
    partial.lattice_inverse = _inverse(basis)
    return partial


@lru_cache(maxsize=None)
def matrix_structure(n: int) -> StructureConstants:
    return compute_structure(MatrixLaw(n))


@lru_cache(maxsize=None)
def star_structure(n: int) -> StructureConstants:
    return compute_structure(StarLaw(n))


def torus_coords(S: StructureConstants, g) -> list:
    """Coordinates of the image of ``g`` on the maximal torus, in the lattice basis."""
    modes = {getattr(c, "mode", None) for c in getattr(g, "components", (g,))}
    if "float" in modes:
        raise ModeError("torus_coords needs exact input")
    v = S.project(log_coords(S.law, g))
    inv = S.lattice_inverse
    out = []
    for c in range(S.torus_dim):
        s = 0
        for r, vr in enumerate(v):
            if vr and inv[r][c]:
                s = s + vr * inv[r][c]
        out.append(s)
    return out


# -- ergodicity decisions --------------------------------------------------------


@dataclass(frozen=True)
class ErgodicityResult:
    ergodic: bool
    witness: tuple[int, ...] | None
    torus_dim: int
    rotation: tuple[str, ...] = ()
    witness_sound: bool | None = None

    def to_json(self) -> dict:
        out = {
            "ergodic": self.ergodic,
            "witness": list(self.witness) if self.witness is not None else None,
            "torus_dim": self.torus_dim,
            "rotation": list(self.rotation),
        }
        if self.witness_sound is not None:
            out["witness_sound"] = self.witness_sound
        return out


def _dot(chi: Sequence[int], alpha: Sequence) -> Radical:
    s = Radical.coerce(0)
    for c, a in zip(chi, alpha):
        if c:
            s = s + a * c
    return s


def is_ergodic_rotation(alpha: Sequence) -> tuple[bool, tuple[int, ...] | None]:
    """Rotation by ``alpha`` on ``R^d / Z^d``: ergodic iff no ``χ != 0`` has ``χ·α ∈ Z``.

    Returns ``(True, None)`` or ``(False, χ)``.  Integer vectors killing the
    irrational part form a lattice; any nonzero point of it, scaled by the
    denominator of the leftover rational value, is a witness.
    """
    if any(isinstance(a, float) for a in alpha):
        raise ModeError("rotation vector must be exact")
    alpha = [Radical.coerce(a) for a in alpha]
    if not alpha:
        return True, None
    kernel = rational_kernel([alpha], irrational_only=True)
    if not kernel:
        return True, None
    b = kernel[0]
    value = _dot(b, alpha)
    den = value.rational_part.denominator
    chi = tuple(int(c) * den for c in b)
    assert _dot(chi, alpha).is_integer()
    return False, chi


def _result(S: StructureConstants, g) -> ErgodicityResult:
    alpha = torus_coords(S, g)
    ok, witness = is_ergodic_rotation(alpha)
    sound = None if witness is None else _dot(witness, alpha).is_integer()
    return ErgodicityResult(ok, witness, S.torus_dim,
                            tuple(str(Radical.coerce(a)) for a in alpha), sound)


def green_ergodic_T(a: GroupElement) -> ErgodicityResult:
    """Is translation by ``a`` ergodic on ``U_n / U_n(Z)``?"""
    if a.mode == "float":
        raise ModeError("ergodicity is decided from exact input")
    return _result(matrix_structure(a.n), a)


def green_ergodic_Sx(a: GroupElement, x: GroupElement) -> ErgodicityResult:
    """Is ``S_x`` (translation by ``(a[a,x], e, ..., e)``) ergodic on the ⋆-nilmanifold?"""
    if a.mode == "float" or x.mode == "float":
        raise ModeError("ergodicity is decided from exact input")
    return _result(star_structure(a.n), sx_generator(a, x))


def psi_eval(chi: Sequence[int], S: StructureConstants, a: GroupElement, x: GroupElement) -> complex:
    """``σ((a[a,x], e, ..., e))`` for the torus character with frequency ``chi``."""
    tau = torus_coords(S, sx_generator(a, x))
    phase = float(_dot(chi, tau))
    return cmath.exp(2j * math.pi * (phase - math.floor(phase)))
