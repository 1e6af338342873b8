"""The Leibman group of polynomial sequences over U_n.

A tuple ``(y_1, ..., y_k)`` with ``y_i`` in ``N^i`` stands for the sequence
``g(m) = y_1^C(m,1) y_2^C(m,2) ... y_k^C(m,k)``.  The product ``x ⋆ y`` is the
tuple whose sequence is the pointwise product of the two sequences; matching
at ``m = 1..k`` determines it recursively.  All products over ``j`` run in
ascending order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .group import GroupElement, commutator, lcs_degree
from .nilmanifold import coset_equal, reduce

__all__ = [
    "StarClosureError",
    "TildeElement",
    "gbinom",
    "star",
    "star_inverse",
    "star_identity",
    "poly_seq_eval",
    "sx_generator",
    "s_x_apply",
    "embed_I",
    "intertwine_check",
    "conj_coordinates",
]


class StarClosureError(ArithmeticError):
    """A ⋆-product component fell outside its lower-central-series level."""


def gbinom(n: int, j: int) -> int:
    """Generalized binomial ``n (n-1) ... (n-j+1) / j!`` for any integer ``n``."""
    if j < 0:
        return 0
    num = 1
    for r in range(j):
        num *= n - r
    return num // math.factorial(j)


@dataclass(frozen=True)
class TildeElement:
    """Element ``(y_1, ..., y_k)`` of the ⋆-group."""

    components: tuple[GroupElement, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("empty TildeElement")
        n = comps[0].n
        if len(comps) != n - 1:
            raise ValueError(f"U_{n} needs {n - 1} components, got {len(comps)}")
        for i, y in enumerate(comps, start=1):
            if y.n != n:
                raise ValueError("components of different dimensions")
            if lcs_degree(y) < i:
                raise ValueError(f"component {i} is not in N^{i}")

    @property
    def n(self) -> int:
        return self.components[0].n

    @property
    def k(self) -> int:
        return len(self.components)

    def __getitem__(self, i: int) -> GroupElement:
        """1-based component access."""
        if not 1 <= i <= self.k:
            raise IndexError(i)
        return self.components[i - 1]

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.components)

    def __mul__(self, other: "TildeElement") -> "TildeElement":
        return star(self, other)

    @property
    def is_identity(self) -> bool:
        return all(y.is_identity for y in self.components)

    def to_float(self) -> "TildeElement":
        return TildeElement(tuple(y.to_float() for y in self.components))

    @classmethod
    def slot(cls, n: int, i: int, y: GroupElement, mode: str = "exact") -> "TildeElement":
        """``(e, ..., y, ..., e)`` with ``y`` in slot ``i`` (1-based)."""
        e = GroupElement.identity(n, mode)
        return cls(tuple(y if r == i else e for r in range(1, n)))


def _mode(*gs: GroupElement) -> str:
    return "float" if any(g.mode == "float" for g in gs) else "exact"


def _prod(n: int, factors: Sequence[GroupElement], mode: str) -> GroupElement:
    out = GroupElement.identity(n, mode)
    for f in factors:
        out = out * f
    return out


def _partial(ys: Sequence[GroupElement], i: int, upto: int, mode: str) -> GroupElement:
    """``prod_{j=1}^{upto} y_j^C(i,j)`` in ascending ``j``."""
    n = ys[0].n
    return _prod(n, [ys[j - 1] ** gbinom(i, j) for j in range(1, upto + 1)], mode)


FLOAT_TOL = 1e-9


def _clean(z: GroupElement, level: int) -> GroupElement:
    """Zero float round-off on the superdiagonals below ``level``."""
    scale = max([1.0] + [abs(v) for r in z.rows for v in r])
    rows = [list(r) for r in z.rows]
    for d in range(1, level):
        for i in range(z.n - d):
            if abs(rows[i][i + d]) <= FLOAT_TOL * scale:
                rows[i][i + d] = 0.0
    return GroupElement(rows, check=False)


def _solve(targets: Sequence[GroupElement]) -> TildeElement:
    """Tuple ``z`` with ``prod_{j<=i} z_j^C(i,j) == targets[i-1]`` for every ``i``."""
    k = len(targets)
    n = targets[0].n
    mode = _mode(*targets)
    zs: list[GroupElement] = []
    for i in range(1, k + 1):
        head = _partial(zs, i, i - 1, mode) if zs else GroupElement.identity(n, mode)
        z = head.inverse() * targets[i - 1]
        if mode == "float":
            z = _clean(z, i)
        if lcs_degree(z) < i:
            raise StarClosureError(f"component {i} has degree {lcs_degree(z)}")
        zs.append(z)
    return TildeElement(tuple(zs))


def star(x: TildeElement, y: TildeElement) -> TildeElement:
    """Leibman product: the sequence of ``x ⋆ y`` is the pointwise product."""
    if x.k != y.k or x.n != y.n:
        raise ValueError("⋆ of elements over different groups")
    xs, ys = x.components, y.components
    mode = _mode(*xs, *ys)
    targets = [_partial(xs, i, i, mode) * _partial(ys, i, i, mode) for i in range(1, x.k + 1)]
    return _solve(targets)


def star_inverse(x: TildeElement) -> TildeElement:
    mode = _mode(*x.components)
    return _solve([_partial(x.components, i, i, mode).inverse() for i in range(1, x.k + 1)])


def star_identity(n: int, mode: str = "exact") -> TildeElement:
    e = GroupElement.identity(n, mode)
    return TildeElement((e,) * (n - 1))


def poly_seq_eval(y: TildeElement, m: int) -> GroupElement:
    """``prod_{j=1}^k y_j^C(m,j)`` for any integer ``m``."""
    return _partial(y.components, m, y.k, _mode(*y.components))


def sx_generator(a: GroupElement, x: GroupElement) -> TildeElement:
    """``(a [a, x], e, ..., e)``; note ``a [a, x] = x^-1 a x``."""
    return TildeElement.slot(a.n, 1, a * commutator(a, x), _mode(a, x))


def s_x_apply(a: GroupElement, x: GroupElement, y: TildeElement) -> TildeElement:
    """The translation ``S_x`` applied to a representative ``y``."""
    return star(sx_generator(a, x), y)


def embed_I(x: GroupElement, y: TildeElement) -> tuple[GroupElement, ...]:
    """Reduced representatives of ``(x g(1) Γ, ..., x g(k+1) Γ)`` with ``g = poly_seq(y)``."""
    return tuple(reduce(x * poly_seq_eval(y, j))[0] for j in range(1, y.k + 2))


def intertwine_check(a: GroupElement, x: GroupElement, y: TildeElement) -> bool:
    """Exact check of ``I ∘ S_x == (T × T^2 × ... × T^(k+1)) ∘ I`` at ``y``."""
    lhs = embed_I(x, s_x_apply(a, x, y))
    rhs = embed_I(x, y)
    return all(coset_equal(l, (a ** j) * p) for j, (l, p) in enumerate(zip(lhs, rhs), start=1))


def conj_coordinates(x: GroupElement, y: GroupElement, n_level: int, m: int) -> TildeElement:
    """⋆-commutator of ``(x, e, ...)`` and ``y`` placed in slot ``m``.

    Computes ``(x^-1,e,..) ⋆ (..,y^-1 at m,..) ⋆ (x,e,..) ⋆ (..,y at m,..)`` for
    ``y`` in ``N^n_level`` and ``m <= n_level``.
    """
    if lcs_degree(y) < n_level:
        raise ValueError(f"y is not in N^{n_level}")
    if not 1 <= m <= n_level:
        raise ValueError(f"slot m={m} must satisfy 1 <= m <= {n_level}")
    if m > x.n - 1:
        raise ValueError(f"slot m={m} exceeds k={x.n - 1}")
    mode = _mode(x, y)
    N = x.n
    X = TildeElement.slot(N, 1, x, mode)
    Xi = TildeElement.slot(N, 1, x.inverse(), mode)
    Y = TildeElement.slot(N, m, y, mode)
    Yi = TildeElement.slot(N, m, y.inverse(), mode)
    return star(star(star(Xi, Yi), X), Y)
