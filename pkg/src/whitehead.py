"""Classes in the Whitehead group Wh(G) = K1(ZG) / <+-g>.

A ``TorsionClass`` is either integral (a square matrix with a certified
inverse) or field-valued: a torsion known only through its images under
ring morphisms into commutative fields, used when elimination over ZG gets
stuck. Both kinds carry the same cached invariants, so identity checks can
mix them.

Equality in Wh is not decided; ``classify`` returns a sound tri-state and
``check_vanishing`` turns it into a pass/fail/unknown verdict.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property, reduce
from itertools import product
from typing import Callable, Iterable, Sequence

from sympy import isprime

from src.config import REGULAR_ORDER_LIMIT, SQRT_DPS, TATE_PRIME_LIMIT
from src.constants import (
    FAIL,
    LEVEL_CHARACTERS,
    LEVEL_CLASS,
    LEVEL_INVARIANTS,
    NONTRIVIAL,
    PASS,
    TRIVIAL,
    UNKNOWN,
)
from src.cyclotomic import (
    CYCLOTOMIC,
    canonical_value,
    residue_at_one,
    square_roots,
)
from src.errors import CertificateError, EngineFailure, GroupError
from src.group_ring import (
    GroupRingElement,
    RingMorphism,
    certify_unit,
    conjugate_morphism,
    pullback_morphism,
    standard_morphisms,
)
from src.groups import (
    CYCLIC,
    SEMIDIRECT,
    TRIVIAL as TRIVIAL_GROUP,
    GroupHom,
    GroupSpec,
    automorphism_hom,
)
from src.linalg import (
    GRMatrix,
    assemble_inverse,
    bar_transpose,
    block_diag,
    det_over_target,
    unit_pivot_eliminate,
)

logger = logging.getLogger(__name__)

Evaluator = Callable[[RingMorphism], object]


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Invariant:
    """Image of a class under one ring morphism, modulo the trivial set."""

    label: str
    value: object
    canonical: object
    trivial: bool

    @property
    def defined(self) -> bool:
        return self.value is not None

    def __str__(self) -> str:
        if not self.defined:
            return f"{self.label}: undefined"
        return f"{self.label}: {self.canonical}"


def _invariant(m: RingMorphism, value) -> Invariant:
    if value is None:
        return Invariant(m.label, None, None, False)
    canon, trivial = canonical_value(m.target, value, m.order)
    return Invariant(m.label, value, canon, trivial)


def _trivial_set_label(m: RingMorphism) -> str:
    if m.target == CYCLOTOMIC:
        return "{+-z^k}"
    if m.label == "laurent":
        return "{+-t^k}"
    return "{+-1}"


# ---------------------------------------------------------------------------
# TorsionClass
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TorsionClass:
    group: GroupSpec
    representative: GRMatrix | None = None
    inverse: GRMatrix | None = None
    evaluator: Evaluator | None = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self) -> None:
        if self.representative is None and self.evaluator is None:
            raise CertificateError("a torsion class needs a representative or an evaluator")
        if self.representative is not None:
            if self.inverse is None:
                raise CertificateError("integral torsion classes carry their inverse")
            if self.representative.group != self.group:
                raise GroupError("representative lives over another group")

    @property
    def integral(self) -> bool:
        return self.representative is not None

    def evaluate(self, m: RingMorphism):
        """Image in the target of ``m`` (None when undefined there)."""
        if m.source != self.group:
            raise GroupError(f"morphism on {m.source.label} applied to a {self.group.label} class")
        if self.integral:
            return det_over_target(self.representative, m)
        return self.evaluator(m)

    @cached_property
    def invariants(self) -> tuple[Invariant, ...]:
        return tuple(_invariant(m, self.evaluate(m)) for m in standard_morphisms(self.group))

    def __str__(self) -> str:
        if self.integral:
            return f"[{self.representative}]"
        return "[" + ", ".join(str(i) for i in self.invariants) + "]"


def trivial_class(G: GroupSpec) -> TorsionClass:
    empty = GRMatrix.zero(G, 0, 0)
    return TorsionClass(G, empty, empty, label="0")


def field_class(G: GroupSpec, evaluator: Evaluator, label: str = "") -> TorsionClass:
    return TorsionClass(G, evaluator=evaluator, label=label)


def torsion_from_units(source: GRMatrix | Sequence[GroupRingElement],
                       inverse: GRMatrix | None = None,
                       max_order: int = REGULAR_ORDER_LIMIT) -> TorsionClass:
    """A class from an invertible matrix, or from a list of units (their diagonal).

    Without a supplied inverse the matrix is certified by unit-pivot
    elimination; a stuck elimination rejects the input.
    """
    if not isinstance(source, GRMatrix):
        units = list(source)
        if not units:
            raise CertificateError("an empty unit list has no ambient group")
        G = units[0].group
        inverses = []
        for u in units:
            inv = certify_unit(u, max_order)
            if inv is None:
                raise CertificateError(f"{u} is not a certified unit")
            inverses.append(inv)
        return TorsionClass(G, GRMatrix.diag(G, units), GRMatrix.diag(G, inverses))
    A = source
    if inverse is not None:
        if not (A @ inverse).is_identity() or not (inverse @ A).is_identity():
            raise CertificateError("supplied inverse does not invert the representative")
        return TorsionClass(A.group, A, inverse)
    result = unit_pivot_eliminate(A, max_order)
    if not result.complete:
        raise CertificateError(f"no invertibility certificate for a {A.nrows}x{A.ncols} matrix")
    return TorsionClass(A.group, A, assemble_inverse(A, result))


# ---------------------------------------------------------------------------
# Group structure
# ---------------------------------------------------------------------------


def _same_group(x: TorsionClass, y: TorsionClass) -> GroupSpec:
    if x.group != y.group:
        raise GroupError(f"cannot combine classes over {x.group.label} and {y.group.label}")
    return x.group


def wh_add(x: TorsionClass, y: TorsionClass) -> TorsionClass:
    G = _same_group(x, y)
    if x.integral and y.integral:
        return TorsionClass(G, block_diag(G, x.representative, y.representative),
                            block_diag(G, x.inverse, y.inverse))

    def evaluate(m):
        a, b = x.evaluate(m), y.evaluate(m)
        return None if a is None or b is None else a * b

    return field_class(G, evaluate)


def wh_neg(x: TorsionClass) -> TorsionClass:
    if x.integral:
        return TorsionClass(x.group, x.inverse, x.representative)

    def evaluate(m):
        a = x.evaluate(m)
        return None if a is None else a ** -1

    return field_class(x.group, evaluate)


def wh_sub(x: TorsionClass, y: TorsionClass) -> TorsionClass:
    return wh_add(x, wh_neg(y))


def wh_multiple(x: TorsionClass, k: int) -> TorsionClass:
    """k-fold block sum; negative k uses the inverse representative."""
    base = x if k >= 0 else wh_neg(x)
    return wh_sum([base] * abs(k), x.group)


def wh_sum(terms: Iterable[TorsionClass], group: GroupSpec) -> TorsionClass:
    return reduce(wh_add, terms, trivial_class(group))


def wh_involution(x: TorsionClass) -> TorsionClass:
    """The class of the bar-transpose."""
    if x.integral:
        return TorsionClass(x.group, bar_transpose(x.representative), bar_transpose(x.inverse))
    return field_class(x.group, lambda m: x.evaluate(conjugate_morphism(m)))


def wh_induced(x: TorsionClass, hom: GroupHom) -> TorsionClass:
    """Entrywise image along a group homomorphism."""
    if hom.source != x.group:
        raise GroupError(f"cannot induce a {x.group.label} class along a map from "
                         f"{hom.source.label}")
    if x.integral:
        return TorsionClass(hom.target, x.representative.map_group(hom), x.inverse.map_group(hom))
    return field_class(hom.target, lambda m: x.evaluate(pullback_morphism(m, hom)))


def signed_involution(x: TorsionClass, sign: int) -> TorsionClass:
    """(+-1) * (*x)."""
    y = wh_involution(x)
    return y if sign > 0 else wh_neg(y)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    state: str
    certificate: str = ""
    invariants: tuple[Invariant, ...] = ()

    @property
    def decisive(self) -> bool:
        return self.state != UNKNOWN


def _base_part(u: GroupRingElement) -> GroupRingElement:
    """v for a unit u = v * z^m of a semidirect ring."""
    G = u.group
    return GroupRingElement(G.base, {g[:-1]: c for g, c in u.terms})


def _alpha_orbit_size(G: GroupSpec, limit: int = 64) -> int:
    g = G.base.generator(0)
    image = G.apply_alpha(g)
    k = 1
    while image != g and k < limit:
        image = G.apply_alpha(image)
        k += 1
    return k


def _units_trivial(units: Sequence[GroupRingElement], G: GroupSpec) -> bool:
    """Whether the sum of the classes of commuting-ring units is trivial."""
    if not units:
        return True
    if G.is_abelian:
        return reduce(lambda a, b: a * b, units).trivial_unit() is not None
    if G.kind != SEMIDIRECT or not G.base.is_finite or G.base.kind == TRIVIAL_GROUP:
        return False
    # [v z^m] = [v], and [v] = [alpha^k(v)] since conjugation acts trivially
    base_units = [_base_part(u) for u in units]
    if any(len({g[-1] for g in u.support}) != 1 for u in units):
        return False
    order = _alpha_orbit_size(G)
    if order ** (len(base_units) - 1) > 4096:
        return False
    powers = [automorphism_hom(G.base, G.alpha)]
    for _ in range(order - 1):
        powers.append(powers[0].compose(powers[-1]))
    first, rest = base_units[0], base_units[1:]
    for choice in product(range(order), repeat=len(rest)):
        acc = first
        for v, k in zip(rest, choice):
            acc = acc * v.map_group(powers[k])
        if acc.trivial_unit() is not None:
            return True
    return False


def classify(x: TorsionClass, max_order: int = REGULAR_ORDER_LIMIT) -> Classification:
    """NonTrivial on an invariant certificate, Trivial on an elimination log."""
    invariants = x.invariants
    witness = next((i for i in invariants if i.defined and not i.trivial), None)
    trivial_log = False
    if x.integral:
        result = unit_pivot_eliminate(x.representative, max_order)
        trivial_log = result.complete and _units_trivial(result.units, x.group)
    if witness is not None and trivial_log:
        raise EngineFailure(f"class {x} has both an elimination log and the certificate "
                            f"{witness}")
    if witness is not None:
        m = next(m for m in standard_morphisms(x.group) if m.label == witness.label)
        cert = f"{witness.label}(det) = {witness.value} not in {_trivial_set_label(m)}"
        return Classification(NONTRIVIAL, cert, invariants)
    if trivial_log:
        return Classification(TRIVIAL, "elimination to the empty matrix", invariants)
    logger.debug("class over %s left undecided", x.group.label)
    return Classification(UNKNOWN, "", invariants)


def characters_complete(G: GroupSpec) -> bool:
    """Whether the standard invariants detect Wh(G) exactly."""
    return G.kind in (TRIVIAL_GROUP, CYCLIC)


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    identity: str
    status: str
    level: str
    certificate: str = ""
    classification: Classification | None = None

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def __str__(self) -> str:
        return f"{self.identity}: {self.status} ({self.level})"


def check_vanishing(x: TorsionClass, identity: str) -> Verdict:
    """pass / fail / unknown for the claim x = 0 in Wh."""
    c = classify(x)
    if c.state == TRIVIAL:
        return Verdict(identity, PASS, LEVEL_CLASS, c.certificate, c)
    if c.state == NONTRIVIAL:
        return Verdict(identity, FAIL, LEVEL_INVARIANTS, c.certificate, c)
    if characters_complete(x.group) and all(i.defined and i.trivial for i in c.invariants):
        return Verdict(identity, PASS, LEVEL_CHARACTERS,
                       "all character determinants are trivial units", c)
    logger.warning("identity %s undecided over %s", identity, x.group.label)
    return Verdict(identity, UNKNOWN, LEVEL_INVARIANTS, "invariants agree, no class certificate", c)


def check_equal(x: TorsionClass, y: TorsionClass, identity: str) -> Verdict:
    return check_vanishing(wh_sub(x, y), identity)


def combine_verdicts(identity: str, verdicts: Sequence[Verdict]) -> Verdict:
    """All must pass; any fail fails; otherwise unknown."""
    if any(v.status == FAIL for v in verdicts):
        bad = next(v for v in verdicts if v.status == FAIL)
        return Verdict(identity, FAIL, bad.level, bad.certificate)
    if all(v.status == PASS for v in verdicts):
        levels = {v.level for v in verdicts}
        level = LEVEL_CLASS if levels <= {LEVEL_CLASS} else LEVEL_CHARACTERS
        return Verdict(identity, PASS, level, "; ".join(v.identity for v in verdicts))
    return Verdict(identity, UNKNOWN, LEVEL_INVARIANTS)


# ---------------------------------------------------------------------------
# Tate classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TateVerdict:
    state: str
    certificate: str = ""
    witness: TorsionClass | None = None


def _square_class_search(x: TorsionClass, dps: int) -> TateVerdict:
    """Ĥ^even over C_p (p prime, w trivial): x = y + *y = 2y iff +-g * u is a square.

    For odd p every z^j is the square of z^(j(p+1)/2), which has residue 1,
    so only the signs need trying.
    """
    G = x.group
    p = G.order
    chi = next(m for m in standard_morphisms(G) if m.label == "chi1")
    c = x.evaluate(chi)
    for sign in (1, -1):
        for r in square_roots(c * sign, dps, first=True):
            if r.is_integral() and residue_at_one(r, p) in (1, p - 1):
                return TateVerdict(TRIVIAL, f"chi1 = {sign} * ({r})^2 with r(1) = +-1 mod {p}")
    return TateVerdict(NONTRIVIAL, f"no +-z^k * chi1 = {c} is a square r^2 with r(1) = +-1 "
                                   f"mod {p}")


def tate_class(x: TorsionClass, n: int, witness: TorsionClass | None = None,
               dps: int = SQRT_DPS, max_prime: int = TATE_PRIME_LIMIT) -> TateVerdict:
    """The class of x in Ĥ^n(Z/2; Wh(G)).

    x must be (-1)^n self-dual; a witness y is checked against
    x = y + (-1)^n *y. Without one, prime cyclic groups with trivial w and
    even n are decided by a square-root search up to ``max_prime``, everything
    else is unknown.
    """
    sign = -1 if n % 2 else 1
    dual = check_vanishing(wh_sub(x, signed_involution(x, sign)), "self-duality")
    if dual.status == FAIL:
        raise CertificateError(f"class is not (-1)^{n} self-dual: {dual.certificate}")
    if dual.status == UNKNOWN:
        return TateVerdict(UNKNOWN, "self-duality undecided")
    if witness is not None:
        norm = wh_add(witness, signed_involution(witness, sign))
        v = check_equal(x, norm, "tate witness")
        if v.passed:
            return TateVerdict(TRIVIAL, f"x = y + (-1)^n *y ({v.level})", witness)
        logger.warning("tate witness rejected: %s", v.status)
    zero = check_vanishing(x, "tate zero")
    if zero.passed:
        return TateVerdict(TRIVIAL, "x vanishes", trivial_class(x.group))
    G = x.group
    if G.kind == CYCLIC and isprime(G.order) and G.w == (1,) and n % 2 == 0:
        if G.order > max_prime:
            return TateVerdict(UNKNOWN, f"square-class search skipped above p = {max_prime}")
        return _square_class_search(x, dps)
    return TateVerdict(UNKNOWN, "no decision procedure for this group")


# ---------------------------------------------------------------------------
# Wh(G) ⊗_alpha Z
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WhTensorClass:
    """A class of Wh(G) read modulo x ~ alpha_*(x)."""

    cls: TorsionClass
    alpha: GroupHom

    def __post_init__(self) -> None:
        if self.alpha.source != self.cls.group or self.alpha.target != self.cls.group:
            raise GroupError("alpha must be an automorphism of the class's group")

    def orbit(self, limit: int = 24) -> tuple[list[TorsionClass], bool]:
        """alpha^k_* x for k = 0, 1, ...; the flag says the orbit closed."""
        items = [self.cls]
        power = self.alpha
        for _ in range(limit):
            if power.is_identity:
                return items, True
            items.append(wh_induced(self.cls, power))
            power = self.alpha.compose(power)
        return items, False

    def is_zero(self) -> Verdict:
        return check_vanishing(self.cls, "tensor class vanishes")

    def include(self, hom: GroupHom) -> TorsionClass:
        """j_* into Wh(G x|_alpha Z); constant on alpha-orbits."""
        return wh_induced(self.cls, hom)

    def compare(self, other: WhTensorClass, identity: str = "tensor classes agree") -> Verdict:
        items, closed = self.orbit()
        verdicts = [check_equal(y, other.cls, identity) for y in items]
        hit = next((v for v in verdicts if v.passed), None)
        if hit is not None:
            return hit
        if closed and all(v.status == FAIL for v in verdicts):
            return Verdict(identity, FAIL, LEVEL_INVARIANTS,
                           "every alpha-translate differs by a certified class")
        return Verdict(identity, UNKNOWN, LEVEL_INVARIANTS)
