"""Integral group rings ZG, the w-twisted involution and ring morphisms.

Elements are immutable: a sorted tuple of (group element, nonzero integer)
pairs plus the ambient ``GroupSpec``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from sympy import Matrix

from src.config import REGULAR_ORDER_LIMIT
from src.cyclotomic import (
    CYCLOTOMIC,
    INTEGERS,
    LAURENT_T,
    RATIONAL_FUNCTION,
    CyclotomicNumber,
    target_one,
    target_zero,
)
from src.errors import GroupError
from src.groups import (
    CYCLIC,
    FREE_ABELIAN,
    SEMIDIRECT,
    TRIVIAL,
    GroupElement,
    GroupHom,
    GroupSpec,
    inclusion_hom,
)

logger = logging.getLogger(__name__)


class GroupRingElement:
    """A finite integer combination of group elements."""

    __slots__ = ("group", "terms", "_hash")

    def __init__(self, group: GroupSpec,
                 terms: Mapping[GroupElement, int] | Iterable[tuple[GroupElement, int]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[GroupElement, int] = {}
        for g, c in items:
            g = group.normalize(g)
            acc[g] = acc.get(g, 0) + int(c)
        self.group = group
        self.terms = tuple(sorted((g, c) for g, c in acc.items() if c))
        self._hash = None

    @classmethod
    def _clean(cls, group: GroupSpec, acc: dict[GroupElement, int]) -> GroupRingElement:
        obj = cls.__new__(cls)
        obj.group = group
        obj.terms = tuple(sorted((g, c) for g, c in acc.items() if c))
        obj._hash = None
        return obj

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, group: GroupSpec) -> GroupRingElement:
        return cls._clean(group, {})

    @classmethod
    def one(cls, group: GroupSpec) -> GroupRingElement:
        return cls._clean(group, {group.identity(): 1})

    @classmethod
    def monomial(cls, group: GroupSpec, g: GroupElement, c: int = 1) -> GroupRingElement:
        return cls(group, {g: c})

    @classmethod
    def constant(cls, group: GroupSpec, c: int) -> GroupRingElement:
        return cls._clean(group, {group.identity(): int(c)})

    @classmethod
    def norm_element(cls, group: GroupSpec) -> GroupRingElement:
        """N = sum of all group elements (finite groups)."""
        return cls._clean(group, {g: 1 for g in group.elements()})

    # -- ring operations ------------------------------------------------------

    def _lift(self, other) -> GroupRingElement:
        if isinstance(other, GroupRingElement):
            if other.group != self.group:
                raise GroupError(f"{self.group.label} and {other.group.label} elements do not mix")
            return other
        if isinstance(other, int):
            return GroupRingElement.constant(self.group, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        acc = dict(self.terms)
        for g, c in other.terms:
            acc[g] = acc.get(g, 0) + c
        return GroupRingElement._clean(self.group, acc)

    __radd__ = __add__

    def __neg__(self) -> GroupRingElement:
        return GroupRingElement._clean(self.group, {g: -c for g, c in self.terms})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return GroupRingElement._clean(self.group, {g: c * other for g, c in self.terms})
        other = self._lift(other)
        if other is NotImplemented:
            return other
        mul = self.group.mul
        acc: dict[GroupElement, int] = {}
        for g, a in self.terms:
            for h, b in other.terms:
                gh = mul(g, h)
                acc[gh] = acc.get(gh, 0) + a * b
        return GroupRingElement._clean(self.group, acc)

    def __rmul__(self, other):
        if isinstance(other, int):
            return self * other
        return NotImplemented

    def __pow__(self, k: int) -> GroupRingElement:
        if k < 0:
            unit = self.trivial_unit()
            if unit is None:
                raise ValueError("negative powers need a trivial unit")
            sign, g = unit
            base = GroupRingElement.monomial(self.group, self.group.inverse(g), sign)
            k = -k
        else:
            base = self
        result = GroupRingElement.one(self.group)
        for _ in range(k):
            result = result * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = GroupRingElement.constant(self.group, other)
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self.group == other.group and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.group, self.terms))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- structure ------------------------------------------------------------

    def bar(self) -> GroupRingElement:
        """sum w(g) c_g g^-1."""
        G = self.group
        return GroupRingElement._clean(G, {G.inverse(g): G.w_of(g) * c for g, c in self.terms})

    def trivial_unit(self) -> tuple[int, GroupElement] | None:
        """(sign, g) when this element is +-g."""
        if len(self.terms) == 1 and self.terms[0][1] in (1, -1):
            g, c = self.terms[0]
            return c, g
        return None

    def augmentation(self) -> int:
        return sum(c for _, c in self.terms)

    def coefficient(self, g: GroupElement) -> int:
        return dict(self.terms).get(self.group.normalize(g), 0)

    @property
    def support(self) -> tuple[GroupElement, ...]:
        return tuple(g for g, _ in self.terms)

    def map_group(self, hom: GroupHom) -> GroupRingElement:
        """Image under the ring map induced by a group homomorphism."""
        if hom.source != self.group:
            raise GroupError(f"homomorphism source {hom.source.label} != {self.group.label}")
        acc: dict[GroupElement, int] = {}
        for g, c in self.terms:
            h = hom(g)
            acc[h] = acc.get(h, 0) + c
        return GroupRingElement._clean(hom.target, acc)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        G = self.group
        out = ""
        for i, (g, c) in enumerate(self.terms):
            word = G.format_element(g)
            mag = abs(c)
            body = str(mag) if word == "1" else (word if mag == 1 else f"{mag}*{word}")
            if i == 0:
                out = ("-" if c < 0 else "") + body
            else:
                out += (" - " if c < 0 else " + ") + body
        return out

    def __repr__(self) -> str:
        return f"GroupRingElement({self.group.label}: {self})"


# ---------------------------------------------------------------------------
# Plain-function API
# ---------------------------------------------------------------------------


def gr_mul(a: GroupRingElement, b: GroupRingElement) -> GroupRingElement:
    if a.group != b.group:
        raise GroupError(f"cannot multiply {a.group.label} by {b.group.label}")
    return a * b


def involution(a: GroupRingElement) -> GroupRingElement:
    return a.bar()


def induced_inclusion(a: GroupRingElement, target: GroupSpec) -> GroupRingElement:
    """g -> g z^0 into Z[G x|_alpha Z]."""
    return a.map_group(inclusion_hom(a.group, target))


# ---------------------------------------------------------------------------
# Unit certificates
# ---------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def _finite_inverse(group: GroupSpec, terms: tuple) -> tuple | None:
    elements = group.elements()
    index = {g: i for i, g in enumerate(elements)}
    n = len(elements)
    M = Matrix.zeros(n, n)
    for j, h in enumerate(elements):
        for g, c in terms:
            M[index[group.mul(g, h)], j] += c
    det = M.det()
    if det not in (1, -1):
        return None
    # inverse column: adj(M) e_1 / det, solved exactly
    e = Matrix.zeros(n, 1)
    e[index[group.identity()], 0] = 1
    x = M.LUsolve(e)
    return tuple((elements[i], int(x[i])) for i in range(n) if x[i] != 0)


def certify_unit(a: GroupRingElement,
                 max_order: int = REGULAR_ORDER_LIMIT) -> GroupRingElement | None:
    """The inverse of ``a`` when the engine can certify it, else None.

    Trivial units always; finite groups through the regular representation;
    semidirect products over a finite base when ``a`` lives in one z-degree.
    The returned inverse is checked by multiplication.
    """
    G = a.group
    unit = a.trivial_unit()
    if unit is not None:
        sign, g = unit
        return GroupRingElement.monomial(G, G.inverse(g), sign)
    if not a.terms:
        return None
    inverse = None
    if G.kind in (TRIVIAL, CYCLIC):
        if G.group_order > max_order:
            return None
        found = _finite_inverse(G, a.terms)
        inverse = GroupRingElement(G, found) if found is not None else None
    elif G.kind == SEMIDIRECT and G.base.is_finite:
        degrees = {g[-1] for g in a.support}
        if len(degrees) != 1:
            return None
        m = degrees.pop()
        base = G.base
        v = GroupRingElement(base, {g[:-1]: c for g, c in a.terms})
        v_inv = certify_unit(v, max_order)
        if v_inv is None:
            return None
        z_back = GroupRingElement.monomial(G, base.identity() + (-m,))
        inverse = z_back * induced_inclusion(v_inv, G)
    if inverse is None:
        return None
    if a * inverse != 1 or inverse * a != 1:
        logger.error("unit certificate for %s failed verification", a)
        return None
    return inverse


# ---------------------------------------------------------------------------
# Ring morphisms into commutative targets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RingMorphism:
    """ZG -> target, given by the images of the group generators."""

    source: GroupSpec
    target: str
    images: tuple
    order: int = 0
    label: str = ""

    def __post_init__(self) -> None:
        if len(self.images) != self.source.ngens:
            raise GroupError(f"{self.source.ngens} generator images expected")
        one = target_one(self.target, self.order)
        G = self.source
        if G.kind == CYCLIC and self.images[0] ** G.order != one:
            raise GroupError(f"image of {G.names[0]} is not a {G.order}-th root of unity")
        if G.kind == SEMIDIRECT:
            base = G.base
            for i in range(base.ngens):
                if self.element_image(G.apply_alpha(base.generator(i)) + (0,)) != self.images[i]:
                    raise GroupError("images are not compatible with alpha")
            if base.kind == CYCLIC and self.images[0] ** base.order != one:
                raise GroupError("base generator image is not a root of unity")

    def element_image(self, g: GroupElement):
        value = target_one(self.target, self.order)
        for image, e in zip(self.images, g):
            if e:
                value = value * image**e
        return value

    def __call__(self, a: GroupRingElement):
        return apply_morphism(a, self)


def apply_morphism(a: GroupRingElement, m: RingMorphism):
    if a.group != m.source:
        raise GroupError(f"morphism on {m.source.label} applied to a {a.group.label} element")
    value = target_zero(m.target, m.order)
    for g, c in a.terms:
        value = value + m.element_image(g) * c
    return value


def pullback_morphism(m: RingMorphism, hom: GroupHom) -> RingMorphism:
    """m ∘ hom, a morphism out of Z[hom.source]."""
    if hom.target != m.source:
        raise GroupError(f"morphism on {m.source.label} cannot follow a map into {hom.target.label}")
    images = tuple(m.element_image(g) for g in hom.images)
    return RingMorphism(hom.source, m.target, images, m.order, label=m.label)


def conjugate_morphism(m: RingMorphism) -> RingMorphism:
    """g -> w(g) m(g)^-1, so that m(bar(a)) = conjugate(m)(a)."""
    one = target_one(m.target, m.order)
    images = tuple((one / image) * w for image, w in zip(m.images, m.source.w))
    return RingMorphism(m.source, m.target, images, m.order, label=f"{m.label}*")


def augmentation_morphism(G: GroupSpec) -> RingMorphism:
    return RingMorphism(G, INTEGERS, tuple(Fraction(1) for _ in range(G.ngens)), label="aug")


def character(G: GroupSpec, k: int) -> RingMorphism:
    """t -> zeta_n^k on C_n (or on the cyclic base of a semidirect product, z -> 1)."""
    if G.kind == CYCLIC:
        n = G.order
        return RingMorphism(G, CYCLOTOMIC, (CyclotomicNumber.zeta_power(n, k),), n,
                            label=f"chi{k}")
    if G.kind == SEMIDIRECT and G.base.kind == CYCLIC:
        n = G.base.order
        images = (CyclotomicNumber.zeta_power(n, k), CyclotomicNumber.from_int(n, 1))
        return RingMorphism(G, CYCLOTOMIC, images, n, label=f"chi{k}")
    raise GroupError(f"no cyclotomic characters on {G.label}")


def laurent_morphism(G: GroupSpec) -> RingMorphism:
    """Z[G] -> Q(t): free generators and z go to t, torsion goes to 1."""
    if G.kind == FREE_ABELIAN:
        images = tuple(LAURENT_T for _ in range(G.rank))
    elif G.kind == SEMIDIRECT:
        images = tuple(LAURENT_T ** 0 for _ in range(G.base.ngens)) + (LAURENT_T,)
    else:
        raise GroupError(f"no Laurent morphism on {G.label}")
    return RingMorphism(G, RATIONAL_FUNCTION, images, label="laurent")


@lru_cache(maxsize=64)
def standard_morphisms(G: GroupSpec) -> tuple[RingMorphism, ...]:
    """The morphisms whose determinants are cached on every torsion class."""
    found = [augmentation_morphism(G)]
    if G.kind == CYCLIC:
        found.extend(character(G, k) for k in range(1, G.order))
    elif G.kind == FREE_ABELIAN and G.rank:
        found.append(laurent_morphism(G))
    elif G.kind == SEMIDIRECT:
        if G.base.kind == CYCLIC:
            n, r = G.base.order, G.alpha[0]
            found.extend(character(G, k) for k in range(1, n) if (k * (r - 1)) % n == 0)
        found.append(laurent_morphism(G))
    return tuple(found)
