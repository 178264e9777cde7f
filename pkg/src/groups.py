"""Supported groups, their normal forms and homomorphisms between them.

A group element is a tuple of integers in normal form:

  trivial          ()
  cyclic(n)        (e,)              with 0 <= e < n
  free_abelian(k)  (e_1, ..., e_k)
  semidirect       (b_1, ..., b_r, m)  meaning b * z^m, where b is in the base

The semidirect law uses z b z^-1 = alpha(b), so
(b, m) * (c, n) = (b * alpha^m(c), m + n).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import gcd

from sympy import Matrix

from src.constants import DEFAULT_Z_GENERATOR
from src.errors import GroupError

logger = logging.getLogger(__name__)

GroupElement = tuple[int, ...]

TRIVIAL = "trivial"
CYCLIC = "cyclic"
FREE_ABELIAN = "free_abelian"
SEMIDIRECT = "semidirect"

_BASE_KINDS = (TRIVIAL, CYCLIC, FREE_ABELIAN)


# ---------------------------------------------------------------------------
# Automorphism data of a base group
# ---------------------------------------------------------------------------


@lru_cache(maxsize=512)
def _matrix_power(alpha: tuple[tuple[int, ...], ...], m: int) -> tuple[tuple[int, ...], ...]:
    k = len(alpha)
    A = Matrix(alpha) if k else Matrix.zeros(0, 0)
    if m < 0:
        A = A.inv()
        m = -m
    P = Matrix.eye(k) if k else Matrix.zeros(0, 0)
    for _ in range(m):
        P = P * A
    return tuple(tuple(int(P[i, j]) for j in range(k)) for i in range(k))


def _apply_alpha(base: GroupSpec, alpha: tuple, e: GroupElement, m: int) -> GroupElement:
    """alpha^m applied to the base element e."""
    if m == 0 or base.kind == TRIVIAL:
        return e
    if base.kind == CYCLIC:
        r = pow(alpha[0], m, base.order) if base.order > 1 else 0
        return ((e[0] * r) % base.order,) if base.order > 1 else (0,)
    A = _matrix_power(alpha, m)
    return tuple(sum(A[i][j] * e[j] for j in range(len(e))) for i in range(len(e)))


def _inverse_alpha(base: GroupSpec, alpha: tuple) -> tuple:
    if base.kind == TRIVIAL:
        return ()
    if base.kind == CYCLIC:
        return (pow(alpha[0], -1, base.order) if base.order > 1 else 0,)
    return _matrix_power(alpha, -1)


# ---------------------------------------------------------------------------
# GroupSpec
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupSpec:
    """One group of the supported family, with its orientation character.

    ``w`` holds w(g) in {+1, -1} for each generator; ``names`` are display
    names and do not take part in equality.
    """

    kind: str
    order: int = 0
    rank: int = 0
    base: GroupSpec | None = None
    alpha: tuple = ()
    w: tuple[int, ...] = ()
    names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.kind not in (*_BASE_KINDS, SEMIDIRECT):
            raise GroupError(f"unknown group kind {self.kind!r}")
        if self.kind == SEMIDIRECT and (self.base is None or self.base.kind not in _BASE_KINDS):
            raise GroupError("semidirect base must be trivial, cyclic or free abelian")
        n = self.ngens
        if not self.w:
            object.__setattr__(self, "w", (1,) * n)
        if not self.names:
            object.__setattr__(self, "names", _default_names(self))
        if len(self.w) != n or any(s not in (1, -1) for s in self.w):
            raise GroupError(f"orientation character needs {n} values in {{+1, -1}}")
        if len(self.names) != n:
            raise GroupError(f"{n} generator names expected, got {len(self.names)}")
        if self.kind == CYCLIC:
            if self.order < 1:
                raise GroupError("cyclic order must be >= 1")
            if self.w[0] == -1 and self.order % 2:
                raise GroupError(f"w(t)^{self.order} = -1: w does not extend to C{self.order}")
        elif self.kind == FREE_ABELIAN and self.rank < 0:
            raise GroupError("rank must be >= 0")
        elif self.kind == SEMIDIRECT:
            self._validate_semidirect()

    def _validate_semidirect(self) -> None:
        base = self.base
        if base.kind == CYCLIC:
            if len(self.alpha) != 1 or gcd(self.alpha[0], base.order) != 1:
                raise GroupError(f"alpha must be a residue coprime to {base.order}")
            object.__setattr__(self, "alpha", (self.alpha[0] % base.order,))
        elif base.kind == FREE_ABELIAN:
            k = base.rank
            rows = tuple(tuple(int(x) for x in row) for row in self.alpha)
            if len(rows) != k or any(len(row) != k for row in rows):
                raise GroupError(f"alpha must be a {k}x{k} integer matrix")
            if k and Matrix(rows).det() not in (1, -1):
                raise GroupError("alpha must have unit determinant")
            object.__setattr__(self, "alpha", rows)
        elif self.alpha:
            raise GroupError("the trivial group has no automorphism data")
        if tuple(self.w[:-1]) != base.w:
            raise GroupError("w must restrict to the base orientation character")
        for i in range(base.ngens):
            image = _apply_alpha(base, self.alpha, base.generator(i), 1)
            if base.w_of(image) != base.w[i]:
                raise GroupError("alpha does not preserve w")

    # -- shape ------------------------------------------------------------

    @property
    def ngens(self) -> int:
        if self.kind == TRIVIAL:
            return 0
        if self.kind == CYCLIC:
            return 1
        if self.kind == FREE_ABELIAN:
            return self.rank
        return self.base.ngens + 1

    @property
    def is_finite(self) -> bool:
        return self.kind in (TRIVIAL, CYCLIC)

    @property
    def is_abelian(self) -> bool:
        return self.kind in _BASE_KINDS

    @property
    def group_order(self) -> int:
        if self.kind == TRIVIAL:
            return 1
        if self.kind == CYCLIC:
            return self.order
        raise GroupError(f"{self.label} is infinite")

    @property
    def label(self) -> str:
        if self.kind == TRIVIAL:
            return "1"
        if self.kind == CYCLIC:
            return f"C{self.order}"
        if self.kind == FREE_ABELIAN:
            return "Z" if self.rank == 1 else f"Z^{self.rank}"
        return f"{self.base.label} x|_{self.alpha_label} Z"

    @property
    def alpha_label(self) -> str:
        if self.base.kind == CYCLIC:
            return str(self.alpha[0])
        if self.base.kind == TRIVIAL:
            return "id"
        return str([list(r) for r in self.alpha])

    # -- group law --------------------------------------------------------

    def identity(self) -> GroupElement:
        return (0,) * self.ngens

    def generator(self, i: int) -> GroupElement:
        e = [0] * self.ngens
        e[i] = 1
        return self.normalize(tuple(e))

    def normalize(self, e: GroupElement) -> GroupElement:
        e = tuple(int(x) for x in e)
        if len(e) != self.ngens:
            raise GroupError(f"{self.label} elements have {self.ngens} exponents, got {e}")
        if self.kind == CYCLIC:
            return (e[0] % self.order,)
        if self.kind == SEMIDIRECT:
            return self.base.normalize(e[:-1]) + (e[-1],)
        return e

    def mul(self, a: GroupElement, b: GroupElement) -> GroupElement:
        if self.kind == CYCLIC:
            return ((a[0] + b[0]) % self.order,)
        if self.kind == SEMIDIRECT:
            m = a[-1]
            moved = _apply_alpha(self.base, self.alpha, b[:-1], m)
            return self.base.mul(a[:-1], moved) + (m + b[-1],)
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a: GroupElement) -> GroupElement:
        if self.kind == SEMIDIRECT:
            m = a[-1]
            base_inv = self.base.inverse(a[:-1])
            return _apply_alpha(self.base, self.alpha, base_inv, -m) + (-m,)
        return self.normalize(tuple(-x for x in a))

    def power(self, a: GroupElement, k: int) -> GroupElement:
        if k < 0:
            a, k = self.inverse(a), -k
        result = self.identity()
        square = a
        while k:
            if k & 1:
                result = self.mul(result, square)
            square = self.mul(square, square)
            k >>= 1
        return result

    def w_of(self, a: GroupElement) -> int:
        sign = 1
        for s, e in zip(self.w, a):
            if s == -1 and e % 2:
                sign = -sign
        return sign

    def elements(self) -> list[GroupElement]:
        """All elements of a finite group, in a fixed order."""
        if self.kind == TRIVIAL:
            return [()]
        if self.kind == CYCLIC:
            return [(k,) for k in range(self.order)]
        raise GroupError(f"{self.label} is infinite")

    # -- semidirect helpers -----------------------------------------------

    def apply_alpha(self, e: GroupElement, m: int = 1) -> GroupElement:
        """alpha^m on a base element (semidirect groups only)."""
        if self.kind != SEMIDIRECT:
            raise GroupError(f"{self.label} carries no automorphism")
        return _apply_alpha(self.base, self.alpha, self.base.normalize(e), m)

    def alpha_inverse(self) -> tuple:
        return _inverse_alpha(self.base, self.alpha)

    # -- display ----------------------------------------------------------

    def format_element(self, a: GroupElement) -> str:
        parts = []
        for name, e in zip(self.names, a):
            if e == 1:
                parts.append(name)
            elif e:
                parts.append(f"{name}^{e}")
        return "*".join(parts) if parts else "1"


def _default_names(spec: GroupSpec) -> tuple[str, ...]:
    if spec.kind == TRIVIAL:
        return ()
    if spec.kind == CYCLIC:
        return ("t",)
    if spec.kind == FREE_ABELIAN:
        return ("t",) if spec.rank == 1 else tuple(f"x{i + 1}" for i in range(spec.rank))
    base_names = spec.base.names if spec.base else ()
    name = DEFAULT_Z_GENERATOR
    while name in base_names:
        name += "'"
    return tuple(base_names) + (name,)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def trivial_group() -> GroupSpec:
    return GroupSpec(TRIVIAL)


def cyclic_group(n: int, w: int = 1, name: str = "t") -> GroupSpec:
    return GroupSpec(CYCLIC, order=n, w=(w,), names=(name,))


def free_abelian_group(k: int, w: tuple[int, ...] | None = None,
                       names: tuple[str, ...] | None = None) -> GroupSpec:
    return GroupSpec(FREE_ABELIAN, rank=k, w=tuple(w or ()), names=tuple(names or ()))


def infinite_cyclic_group(w: int = 1, name: str = "t") -> GroupSpec:
    """Z, stored as free abelian of rank one."""
    return GroupSpec(FREE_ABELIAN, rank=1, w=(w,), names=(name,))


def semidirect_group(base: GroupSpec, alpha=(), w_z: int = 1,
                     name: str | None = None) -> GroupSpec:
    """base x|_alpha Z with new generator z acting by z b z^-1 = alpha(b)."""
    if base.kind == CYCLIC and isinstance(alpha, int):
        alpha = (alpha,)
    if base.kind == CYCLIC and not alpha:
        alpha = (1,)
    if base.kind == FREE_ABELIAN and not alpha:
        alpha = tuple(tuple(int(i == j) for j in range(base.rank)) for i in range(base.rank))
    names = None
    if name is not None:
        names = tuple(base.names) + (name,)
    return GroupSpec(SEMIDIRECT, base=base, alpha=tuple(alpha), w=tuple(base.w) + (w_z,),
                     names=names or ())


# ---------------------------------------------------------------------------
# Homomorphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupHom:
    """A homomorphism given by the images of the source generators."""

    source: GroupSpec
    target: GroupSpec
    images: tuple[GroupElement, ...]

    def __post_init__(self) -> None:
        if len(self.images) != self.source.ngens:
            raise GroupError(f"{self.source.ngens} generator images expected")
        images = tuple(self.target.normalize(g) for g in self.images)
        object.__setattr__(self, "images", images)
        self._check_relations()

    def _apply_abelian(self, e: GroupElement, images: tuple[GroupElement, ...]) -> GroupElement:
        result = self.target.identity()
        for image, k in zip(images, e):
            if k:
                result = self.target.mul(result, self.target.power(image, k))
        return result

    def __call__(self, g: GroupElement) -> GroupElement:
        src = self.source
        if src.kind == SEMIDIRECT:
            r = src.base.ngens
            head = self._apply_abelian(g[:-1], self.images[:r])
            return self.target.mul(head, self.target.power(self.images[-1], g[-1]))
        return self._apply_abelian(g, self.images)

    def _check_relations(self) -> None:
        src, tgt = self.source, self.target
        one = tgt.identity()
        for i, image in enumerate(self.images):
            if tgt.w_of(image) != src.w[i]:
                raise GroupError(f"homomorphism does not respect w on generator {src.names[i]}")
        if src.kind == CYCLIC:
            if tgt.power(self.images[0], src.order) != one:
                raise GroupError(f"image of {src.names[0]} does not have order dividing {src.order}")
        elif src.kind in (FREE_ABELIAN, SEMIDIRECT):
            r = src.rank if src.kind == FREE_ABELIAN else src.base.ngens
            for a, b in combinations(self.images[:r], 2):
                if tgt.mul(a, b) != tgt.mul(b, a):
                    raise GroupError("images of commuting generators do not commute")
        if src.kind == SEMIDIRECT:
            base = src.base
            if base.kind == CYCLIC and tgt.power(self.images[0], base.order) != one:
                raise GroupError("base relation violated")
            z = self.images[-1]
            z_inv = tgt.inverse(z)
            for i in range(base.ngens):
                lhs = tgt.mul(tgt.mul(z, self.images[i]), z_inv)
                twisted = src.apply_alpha(base.generator(i))
                rhs = self._apply_abelian(twisted, self.images[: base.ngens])
                if lhs != rhs:
                    raise GroupError("conjugation relation z b z^-1 = alpha(b) violated")

    def compose(self, first: GroupHom) -> GroupHom:
        """self ∘ first."""
        if first.target != self.source:
            raise GroupError("homomorphisms are not composable")
        return GroupHom(first.source, self.target, tuple(self(g) for g in first.images))

    @property
    def is_identity(self) -> bool:
        return self.source == self.target and all(
            g == self.source.generator(i) for i, g in enumerate(self.images)
        )


def identity_hom(G: GroupSpec) -> GroupHom:
    return GroupHom(G, G, tuple(G.generator(i) for i in range(G.ngens)))


def trivial_hom(source: GroupSpec, target: GroupSpec) -> GroupHom:
    return GroupHom(source, target, tuple(target.identity() for _ in range(source.ngens)))


def inclusion_hom(base: GroupSpec, sd: GroupSpec) -> GroupHom:
    """The inclusion G -> G x|_alpha Z, g -> g z^0."""
    if sd.kind != SEMIDIRECT or sd.base != base:
        raise GroupError(f"{sd.label} is not a semidirect product over {base.label}")
    return GroupHom(base, sd, tuple(base.generator(i) + (0,) for i in range(base.ngens)))


def automorphism_hom(base: GroupSpec, alpha) -> GroupHom:
    """The automorphism of a base group given by alpha data."""
    if base.kind == CYCLIC and isinstance(alpha, int):
        alpha = (alpha,)
    images = tuple(_apply_alpha(base, tuple(alpha), base.generator(i), 1)
                   for i in range(base.ngens))
    return GroupHom(base, base, images)


def power_hom(G: GroupSpec, k: int) -> GroupHom:
    """t -> t^k on a cyclic group."""
    if G.kind != CYCLIC:
        raise GroupError("power homomorphisms are defined on cyclic groups")
    return GroupHom(G, G, ((k % G.order,),))


def reversal_hom(sd: GroupSpec) -> tuple[GroupSpec, GroupHom]:
    """G x|_alpha Z -> G x|_alpha^-1 Z sending b -> b and z -> s^-1."""
    if sd.kind != SEMIDIRECT:
        raise GroupError(f"{sd.label} is not a semidirect product")
    target = GroupSpec(SEMIDIRECT, base=sd.base, alpha=sd.alpha_inverse(), w=sd.w,
                       names=tuple(sd.base.names) + ("s",))
    images = tuple(sd.base.generator(i) + (0,) for i in range(sd.base.ngens))
    images += (sd.base.identity() + (-1,),)
    return target, GroupHom(sd, target, images)


def product_group(G1: GroupSpec, G2: GroupSpec) -> tuple[GroupSpec, GroupHom, GroupHom]:
    """G1 x G2 inside the supported family, with both inclusions."""
    if G1.kind == TRIVIAL:
        return G2, trivial_hom(G1, G2), identity_hom(G2)
    if G2.kind == TRIVIAL:
        return G1, identity_hom(G1), trivial_hom(G2, G1)
    if G1.kind == FREE_ABELIAN and G2.kind == FREE_ABELIAN:
        k1, k2 = G1.rank, G2.rank
        names = tuple(G1.names) + tuple(G2.names)
        if len(set(names)) != len(names):
            names = tuple(f"x{i + 1}" for i in range(k1 + k2))
        P = free_abelian_group(k1 + k2, tuple(G1.w) + tuple(G2.w), names)
        i1 = GroupHom(G1, P, tuple(P.generator(i) for i in range(k1)))
        i2 = GroupHom(G2, P, tuple(P.generator(k1 + i) for i in range(k2)))
        return P, i1, i2
    if G1.kind == CYCLIC and G2.kind == CYCLIC:
        n, m = G1.order, G2.order
        if gcd(n, m) != 1:
            raise GroupError(f"C{n} x C{m} is not cyclic")
        for w_s in (1, -1):
            if w_s == -1 and (n * m) % 2:
                continue
            if w_s**m == G1.w[0] and w_s**n == G2.w[0]:
                P = cyclic_group(n * m, w_s)
                return P, GroupHom(G1, P, ((m,),)), GroupHom(G2, P, ((n,),))
        raise GroupError("orientation characters do not combine on the product")
    if G1.kind == CYCLIC and G2.kind == FREE_ABELIAN and G2.rank == 1:
        P = semidirect_group(G1, (1,), G2.w[0])
        return P, GroupHom(G1, P, ((1, 0),)), GroupHom(G2, P, ((0, 1),))
    if G2.kind == CYCLIC and G1.kind == FREE_ABELIAN and G1.rank == 1:
        P = semidirect_group(G2, (1,), G1.w[0])
        return P, GroupHom(G1, P, ((0, 1),)), GroupHom(G2, P, ((1, 0),))
    raise GroupError(f"product {G1.label} x {G2.label} is not supported")
