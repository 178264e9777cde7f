"""Fibering obstructions: Θ, the simple-structure ledger, τ_fib over S¹,
the h-cobordism calculator, the bridge to Wh(G) ⊗_alpha Z, and the product
transfer.

Over the circle everything is read off chain models: a self-equivalence
(C, v, alpha) of the fiber, its mapping torus T(v) over Z[G x|_alpha Z], and
a comparison map e: T(v) -> D into the total space. Θ comes from the
monodromy, τ'_fib from e.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

from src.chains import (
    BasedChainComplex,
    ChainMap,
    SelfEquivalenceWithTwist,
    alpha_data,
    compose,
    identity_map,
    induce_complex,
    induce_map,
    mapping_torus,
    tensor_maps,
    tensor_product,
)
from src.constants import COMPLETE, FAIL, LEVEL_CLASS, LEVEL_INVARIANTS, PASS, STUCK, UNKNOWN
from src.errors import CertificateError, GroupError
from src.group_ring import GroupRingElement
from src.groups import (
    SEMIDIRECT,
    TRIVIAL as TRIVIAL_GROUP,
    GroupHom,
    GroupSpec,
    automorphism_hom,
    identity_hom,
    inclusion_hom,
    reversal_hom,
    semidirect_group,
    trivial_hom,
)
from src.linalg import GRMatrix, block, invert
from src.torsion import TorsionResult, whitehead_torsion
from src.whitehead import (
    TorsionClass,
    Verdict,
    WhTensorClass,
    check_equal,
    check_vanishing,
    combine_verdicts,
    signed_involution,
    torsion_from_units,
    wh_add,
    wh_induced,
    wh_multiple,
    wh_neg,
    wh_sub,
    wh_sum,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Θ from fiber transport
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiberTransportDatum:
    """Per base generator, the torsion of its fiber transport.

    ``orders`` holds the order of each generator of the base group (None for
    infinite order). Classes live over the fiber group and are pushed into
    the total group along ``inclusion`` when one is recorded.
    """

    generators: tuple[str, ...]
    orders: tuple[int | None, ...]
    classes: tuple[TorsionClass, ...]
    inclusion: GroupHom | None = None
    name: str = ""

    def __post_init__(self) -> None:
        if not (len(self.generators) == len(self.orders) == len(self.classes)):
            raise CertificateError("one order and one class per base generator expected")
        groups = {x.group for x in self.classes}
        if len(groups) > 1:
            raise GroupError("fiber transport classes live over different groups")
        if self.inclusion is not None and groups and self.inclusion.source not in groups:
            raise GroupError("the recorded inclusion does not start at the fiber group")

    @property
    def total_classes(self) -> tuple[TorsionClass, ...]:
        if self.inclusion is None:
            return self.classes
        return tuple(wh_induced(x, self.inclusion) for x in self.classes)

    def cocycle_check(self) -> list[Verdict]:
        """Relations g^n = 1 must map to zero; a certified failure is an input error."""
        verdicts = []
        for gen, n, x in zip(self.generators, self.orders, self.total_classes):
            if n is None:
                continue
            v = check_vanishing(wh_multiple(x, n), f"{gen}^{n} transport")
            if v.status == FAIL:
                raise CertificateError(f"transport of {gen} does not respect {gen}^{n} = 1: "
                                       f"{v.certificate}")
            if v.status == UNKNOWN:
                logger.warning("relation %s^%d of %s left undecided", gen, n, self.name)
            verdicts.append(v)
        return verdicts


@dataclass(frozen=True)
class ThetaResult:
    classes: tuple[TorsionClass, ...]
    verdicts: tuple[Verdict, ...]
    relations: tuple[Verdict, ...] = ()

    @property
    def is_simple(self) -> bool | None:
        """True when every class vanishes, False on a certified nonzero one."""
        if any(v.status == FAIL for v in self.verdicts):
            return False
        if all(v.passed for v in self.verdicts):
            return True
        return None


def theta(datum: FiberTransportDatum) -> ThetaResult:
    relations = datum.cocycle_check()
    classes = datum.total_classes
    verdicts = tuple(check_vanishing(x, f"theta({g})")
                     for g, x in zip(datum.generators, classes))
    return ThetaResult(classes, verdicts, tuple(relations))


def bundle_datum(generators: Sequence[str], orders: Sequence[int | None],
                 transports: Sequence[GRMatrix], inclusion: GroupHom | None = None,
                 name: str = "bundle") -> FiberTransportDatum:
    """Transports of a bundle: based isomorphisms by signed permutation matrices of
    trivial units."""
    classes = []
    for gen, A in zip(generators, transports):
        for row in A.entries:
            live = [x for x in row if x]
            if len(live) != 1 or live[0].trivial_unit() is None:
                raise CertificateError(f"transport of {gen} is not a monomial matrix")
        classes.append(torsion_from_units(A))
    return FiberTransportDatum(tuple(generators), tuple(orders), tuple(classes), inclusion, name)


# ---------------------------------------------------------------------------
# Change of simple structure along a spider
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpiderLedger:
    """Base cells with their dimension and comparison-path torsion."""

    base_dim: int
    cells: tuple[tuple[int, TorsionClass], ...]
    group: GroupSpec | None = None

    def __post_init__(self) -> None:
        for dim, _ in self.cells:
            if dim < 0 or dim > self.base_dim:
                raise CertificateError(f"cell of dimension {dim} in a base of dimension "
                                       f"{self.base_dim}")
        if self.group is None:
            if not self.cells:
                raise CertificateError("an empty ledger needs its group")
            object.__setattr__(self, "group", self.cells[0][1].group)

    @property
    def euler_characteristic(self) -> int:
        return sum((-1) ** dim for dim, _ in self.cells)


def simple_structure_change(ledger: SpiderLedger) -> TorsionClass:
    """sum over cells of (-1)^dim(c) * x_c."""
    return wh_sum((x if dim % 2 == 0 else wh_neg(x) for dim, x in ledger.cells), ledger.group)


# ---------------------------------------------------------------------------
# Fiberings over the circle
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class S1FiberingModel:
    """Fiber self-equivalence (C, v, alpha) and a comparison e: T(v) -> D."""

    twist: SelfEquivalenceWithTwist
    e_hat: ChainMap
    name: str = ""

    def __post_init__(self) -> None:
        G = self.twist.complex.group
        Gamma = self.e_hat.group
        if Gamma.kind != SEMIDIRECT or Gamma.base != G:
            raise GroupError(f"{Gamma.label} is not a semidirect product over {G.label}")
        if Gamma.alpha != alpha_data(G, self.twist.alpha):
            raise GroupError("the comparison lives over a different twist")
        if not self.e_hat.source.same_shape(self.torus):
            raise CertificateError("the comparison does not start at the mapping torus")

    @property
    def group(self) -> GroupSpec:
        return self.e_hat.group

    @cached_property
    def torus(self) -> BasedChainComplex:
        return mapping_torus(self.twist, self.e_hat.group)

    @property
    def inclusion(self) -> GroupHom:
        return inclusion_hom(self.twist.complex.group, self.group)


def bundle_model(twist: SelfEquivalenceWithTwist, name: str = "bundle") -> S1FiberingModel:
    """The model whose total space is the mapping torus itself."""
    T = mapping_torus(twist)
    return S1FiberingModel(twist, identity_map(T), name)


@dataclass(frozen=True)
class S1Result:
    theta: TorsionClass
    tau_prime: TorsionClass
    tau_fib: TorsionClass | None
    theta_verdict: Verdict
    status: str

    @property
    def stuck(self) -> bool:
        return self.status == STUCK


def monodromy_torsion(model: S1FiberingModel) -> TorsionResult:
    return whitehead_torsion(model.twist.as_chain_map())


def s1_invariants(model: S1FiberingModel) -> S1Result:
    """Θ = -j_*τ(v) and τ'_fib = τ(e); τ_fib = τ'_fib once Θ vanishes."""
    v_result = monodromy_torsion(model)
    e_result = whitehead_torsion(model.e_hat)
    th = wh_neg(wh_induced(v_result.torsion, model.inclusion))
    verdict = check_vanishing(th, "theta vanishes")
    tau_fib = e_result.torsion if verdict.passed else None
    status = STUCK if not (v_result.complete and e_result.complete) else COMPLETE
    logger.info("%s: theta %s, tau' %s", model.name or "model", verdict.status,
                "stuck" if not e_result.complete else "complete")
    return S1Result(th, e_result.torsion, tau_fib, verdict, status)


def reversed_model(model: S1FiberingModel) -> tuple[S1FiberingModel, GroupHom]:
    """The model of con∘f with the reversal sigma: Gamma -> Gamma', t -> s^-1.

    The monodromy becomes W = alpha^-1(V^-1) over alpha^-1, which needs v to
    be a based isomorphism. The comparison is sigma_*(e) composed with
    kappa = diag(1, -W s): T(W) -> sigma_* T(v).
    """
    C = model.twist.complex
    G = C.group
    Gamma = model.group
    Gamma_r, sigma = reversal_hom(Gamma)
    alpha_inv = automorphism_hom(G, Gamma.alpha_inverse())
    W = {}
    for k in C.degrees:
        V_inv = invert(model.twist.v[k])
        if V_inv is None:
            raise CertificateError(f"the monodromy is not a based isomorphism in degree {k}")
        W[k] = V_inv.map_group(alpha_inv)
    twist = SelfEquivalenceWithTwist(C, W, alpha_inv, name=f"{model.twist.name or 'v'}^-1",
                                     inverse={k: model.twist.v[k].map_group(alpha_inv)
                                              for k in C.degrees})
    T_r = mapping_torus(twist, Gamma_r)
    j = inclusion_hom(G, Gamma_r)
    s = GroupRingElement.monomial(Gamma_r, G.identity() + (1,))
    T_pushed = induce_complex(model.torus, sigma)
    kappa = {}
    for k in T_r.degrees:
        top, bottom = C.rank(k), C.rank(k - 1)
        corner = (-W[k - 1].map_group(j).scale_right(s) if bottom
                  else GRMatrix.zero(Gamma_r, 0, 0))
        kappa[k] = block(Gamma_r, [
            [GRMatrix.identity(Gamma_r, top), GRMatrix.zero(Gamma_r, top, bottom)],
            [GRMatrix.zero(Gamma_r, bottom, top), corner],
        ])
    kappa_map = ChainMap(T_r, T_pushed, kappa, "kappa")
    e_r = compose(induce_map(model.e_hat, sigma), kappa_map)
    return S1FiberingModel(twist, e_r, name=f"con∘{model.name or 'f'}"), sigma


def check_reversal(model: S1FiberingModel) -> Verdict:
    """Θ(f) = τ'_fib(f) - τ'_fib(con∘f), read back along sigma^-1."""
    rev, sigma = reversed_model(model)
    _, sigma_back = reversal_hom(rev.group)
    if sigma_back.target != model.group:
        raise GroupError("reversal does not return to the original group")
    forward, backward = s1_invariants(model), s1_invariants(rev)
    pulled = wh_induced(backward.tau_prime, sigma_back)
    return check_equal(forward.theta, wh_sub(forward.tau_prime, pulled), "orientation reversal")


# ---------------------------------------------------------------------------
# h-cobordisms glued along an automorphism
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HCobordismAlgebraic:
    """An h-cobordism W over Z[G], its torsion and the gluing automorphism phi."""

    tau: TorsionClass
    phi: GroupHom
    dim: int

    def __post_init__(self) -> None:
        G = self.tau.group
        if self.phi.source != G or self.phi.target != G:
            raise GroupError("phi must be an automorphism of the torsion's group")
        if self.dim < 2:
            raise CertificateError("an h-cobordism has dimension at least 2")
        for i, image in enumerate(self.phi.images):
            if G.w_of(image) != G.w[i]:
                raise GroupError("phi does not respect w")

    @property
    def group(self) -> GroupSpec:
        return self.tau.group

    @cached_property
    def torus_group(self) -> GroupSpec:
        return semidirect_group(self.group, alpha_data(self.group, self.phi))

    @property
    def inclusion(self) -> GroupHom:
        return inclusion_hom(self.group, self.torus_group)

    @property
    def sign(self) -> int:
        return -1 if self.dim % 2 else 1


@dataclass(frozen=True)
class HCobordismResult:
    x: TorsionClass
    theta: TorsionClass
    tau_prime: TorsionClass
    tau_fib: TorsionClass | None
    verdicts: dict[str, Verdict] = field(default_factory=dict)


def _equivalence_verdict(x: Verdict, tau_prime: Verdict, th: Verdict,
                         tau_fib: Verdict | None) -> Verdict:
    """x = 0 <=> τ' = 0 <=> (Θ = 0 and τ_fib = 0), when all are decided."""
    name = "vanishing equivalence"
    parts = [x, tau_prime, th] + ([tau_fib] if tau_fib is not None else [])
    if any(p.status == UNKNOWN for p in parts):
        logger.warning("%s blocked by an undecided classification", name)
        return Verdict(name, UNKNOWN, LEVEL_INVARIANTS, "blocked by an undecided class")
    last = th.passed and (tau_fib is None or tau_fib.passed)
    if x.passed == tau_prime.passed == last:
        return Verdict(name, PASS, LEVEL_CLASS, "all classifications agree")
    return Verdict(name, FAIL, LEVEL_INVARIANTS,
                   f"x {x.status}, tau' {tau_prime.status}, theta {th.status}")


def glue_hcobordism(h: HCobordismAlgebraic) -> HCobordismResult:
    """x = l_*τ(W), Θ = (±* + 1)x, τ'_fib = Θ - x, τ_fib = -x once Θ vanishes."""
    x = wh_induced(h.tau, h.inclusion)
    starred = signed_involution(x, h.sign)
    th = wh_add(starred, x)
    tau_prime = wh_sub(th, x)
    verdicts = {
        "internal identity": check_vanishing(wh_sub(wh_add(tau_prime, x), th),
                                             "tau' + x - theta"),
        "displayed value": check_equal(tau_prime, starred, "tau' = (-1)^dim *x"),
        "star symmetry": check_equal(signed_involution(x, 1), x, "*x = x"),
    }
    v_theta = check_vanishing(th, "theta vanishes")
    tau_fib = wh_neg(x) if v_theta.passed else None
    v_fib = check_vanishing(tau_fib, "tau_fib vanishes") if tau_fib is not None else None
    verdicts["theta"] = v_theta
    verdicts["equivalence"] = _equivalence_verdict(
        check_vanishing(x, "x vanishes"), check_vanishing(tau_prime, "tau' vanishes"),
        v_theta, v_fib)
    return HCobordismResult(x, th, tau_prime, tau_fib, verdicts)


@dataclass(frozen=True)
class BridgeResult:
    tensor: WhTensorClass
    verdict: Verdict
    identification: Verdict | None = None


def farrell_bridge(h: HCobordismAlgebraic, glued: HCobordismResult | None = None) -> BridgeResult:
    """j(τ(W) mod phi) against (-1)^dim *τ'_fib."""
    glued = glued or glue_hcobordism(h)
    if not glued.verdicts["theta"].passed:
        raise CertificateError("the bridge needs theta to vanish")
    tensor = WhTensorClass(h.tau, h.phi)
    target = signed_involution(glued.tau_prime, h.sign)
    verdict = check_equal(tensor.include(h.inclusion), target, "bridge")
    identification = None
    if not h.phi.is_identity:
        moved = WhTensorClass(wh_induced(h.tau, h.phi), h.phi)
        identification = combine_verdicts("phi identification", [
            moved.compare(tensor, "phi-translate in the tensor class"),
            check_equal(moved.include(h.inclusion), glued.x, "phi-translate after inclusion"),
        ])
    return BridgeResult(tensor, verdict, identification)


def check_hcobordism_equivalences(h: HCobordismAlgebraic) -> Verdict:
    glued = glue_hcobordism(h)
    return combine_verdicts("h-cobordism calculator", [
        glued.verdicts[name] for name in ("internal identity", "displayed value", "equivalence")])


# ---------------------------------------------------------------------------
# Product transfer and composites
# ---------------------------------------------------------------------------


def transfer_product(tau: TorsionClass, chi_fiber: int, inclusion: GroupHom) -> TorsionClass:
    """p^* for a product fibration with fiber of Euler characteristic chi."""
    return wh_multiple(wh_induced(tau, inclusion), chi_fiber)


def _fiber_check(F: BasedChainComplex) -> None:
    if F.group.kind != TRIVIAL_GROUP:
        raise GroupError("product fibers are modelled over the trivial group")


def _torus_permutation(F: BasedChainComplex, C: BasedChainComplex, Gamma: GroupSpec,
                       source: BasedChainComplex, target: BasedChainComplex) -> ChainMap:
    """T(1 (x) v) -> F (x) T(v): x (x) c in the cone's second block picks up (-1)^|x|."""
    maps = {}
    zero = GroupRingElement.zero(Gamma)
    for k in source.degrees:
        first = [(i, a, b, 0) for i in F.degrees for a in range(F.rank(i))
                 for b in range(C.rank(k - i))]
        second = [(i, a, b, 1) for i in F.degrees for a in range(F.rank(i))
                  for b in range(C.rank(k - 1 - i))]
        dst = [(i, a, b) for i in F.degrees for a in range(F.rank(i))
               for b in range(C.rank(k - i) + C.rank(k - i - 1))]
        index = {e: r for r, e in enumerate(dst)}
        rows = [[zero] * len(first + second) for _ in dst]
        for col, (i, a, b, part) in enumerate(first + second):
            if part == 0:
                rows[index[(i, a, b)]][col] = GroupRingElement.one(Gamma)
            else:
                sign = -1 if i % 2 else 1
                r = index[(i, a, C.rank(k - i) + b)]
                rows[r][col] = GroupRingElement.constant(Gamma, sign)
        maps[k] = GRMatrix(Gamma, len(dst), len(first + second), tuple(map(tuple, rows)))
    return ChainMap(source, target, maps, "shuffle")


def composite_model(model: S1FiberingModel, F: BasedChainComplex) -> S1FiberingModel:
    """g∘f for the product fibration f: F x M -> M and g: M -> S^1."""
    _fiber_check(F)
    C = model.twist.complex
    G, Gamma = C.group, model.group
    one_G, one_Gamma = trivial_hom(F.group, G), trivial_hom(F.group, Gamma)
    FC = tensor_product(F, C, G, one_G, identity_hom(G))
    v = tensor_maps(identity_map(F), model.twist.as_chain_map(), G, one_G, identity_hom(G))
    twist = SelfEquivalenceWithTwist(FC, v.maps, model.twist.alpha, name=f"1⊗{model.twist.name}")
    T_big = mapping_torus(twist, Gamma)
    FT = tensor_product(F, model.torus, Gamma, one_Gamma, identity_hom(Gamma))
    shuffle = _torus_permutation(F, C, Gamma, T_big, FT)
    e = tensor_maps(identity_map(F), model.e_hat, Gamma, one_Gamma, identity_hom(Gamma))
    return S1FiberingModel(twist, compose(e, shuffle), name=f"{model.name or 'g'}∘f")


@dataclass(frozen=True)
class CompositeResult:
    chi_fiber: int
    outer: S1Result
    composite: S1Result
    verdicts: tuple[Verdict, ...]

    @property
    def verdict(self) -> Verdict:
        return combine_verdicts("composite formula", self.verdicts)


def check_composite_formula(model: S1FiberingModel, F: BasedChainComplex) -> CompositeResult:
    """τ_fib(g∘f) = τ̄_fib(f) + f^*τ_fib(g) with τ̄_fib(f) = 0 for a product."""
    chi = F.euler_characteristic()
    outer = s1_invariants(model)
    inner = s1_invariants(composite_model(model, F))
    transfer = transfer_product(outer.tau_prime, chi, identity_hom(model.group))
    verdicts = [check_equal(inner.tau_prime, transfer, "tau' of the composite")]
    if chi == 0:
        verdicts.append(check_vanishing(inner.tau_prime, "chi(F) = 0 composite"))
    # Θ(g∘f) is recorded, never asserted
    logger.info("composite theta with chi(F) = %d: %s", chi, inner.theta_verdict.status)
    return CompositeResult(chi, outer, inner, tuple(verdicts))


@dataclass(frozen=True)
class FiberCoset:
    """τ_fib as a representative modulo chi(B) times the image of the fiber's Wh."""

    representative: TorsionClass
    chi_base: int
    generators: tuple[TorsionClass, ...] = ()

    @property
    def genuine(self) -> bool:
        """The coset is a single element (chi(B) = 0 or nothing to divide by)."""
        return self.chi_base == 0 or not self.generators


def fiber_coset(tau: TorsionClass, chi_base: int,
                fiber_image: Sequence[TorsionClass] = ()) -> FiberCoset:
    return FiberCoset(tau, chi_base, tuple(wh_multiple(g, chi_base) for g in fiber_image))


def twist_from_units(C: BasedChainComplex, alpha: GroupHom,
                     units: Mapping[int, Sequence[GroupRingElement]],
                     name: str = "v") -> SelfEquivalenceWithTwist:
    """A diagonal monodromy; only valid where it is alpha-semilinear."""
    G = C.group
    v = {k: GRMatrix.diag(G, units[k]) for k in units}
    return SelfEquivalenceWithTwist(C, v, alpha, name)
