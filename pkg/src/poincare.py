"""Poincaré torsion of chain-level Poincaré pairs.

A pair is a based complex C over Z[pi] with a based subcomplex B (a basis
prefix) and a duality chain map cap: C^{n-*} -> C/B. Its torsion is ρ, its
class in the Tate cohomology of Z/2 acting on Wh is ρ̂. The built-in
families carry hand-derived duality matrices; every constructor validates
the chain-map property and that cap is an equivalence.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd
from typing import Mapping, Sequence

from src.chains import (
    BasedChainComplex,
    ChainMap,
    basis_change,
    compose,
    cone,
    dual_complex,
    dual_map,
    glue_complexes,
    induce_complex,
    induce_map,
    make_complex,
    sub_quotient_sequence,
    tensor_basis,
    tensor_product,
)
from src.constants import FAIL, LEVEL_INVARIANTS, NONTRIVIAL, PASS, TRIVIAL, UNKNOWN
from src.errors import CertificateError, ChainError, EngineFailure, GroupError
from src.group_ring import GroupRingElement
from src.groups import (
    GroupHom,
    GroupSpec,
    cyclic_group,
    free_abelian_group,
    power_hom,
    product_group,
    trivial_group,
)
from src.linalg import GRMatrix, block_diag
from src.torsion import (
    ContractionWitness,
    TorsionResult,
    certify_equivalence,
    whitehead_torsion,
)
from src.whitehead import (
    TateVerdict,
    TorsionClass,
    Verdict,
    check_equal,
    check_vanishing,
    signed_involution,
    tate_class,
    torsion_from_units,
    wh_add,
    wh_multiple,
    wh_induced,
    wh_sub,
)

logger = logging.getLogger(__name__)


def _same_complex(A: BasedChainComplex, B: BasedChainComplex) -> bool:
    if not A.same_shape(B):
        return False
    return all(A.d(k) == B.d(k) for k in range(min(A.lo, B.lo), max(A.hi, B.hi) + 2))


def _sign(n: int) -> int:
    return -1 if n % 2 else 1


# ---------------------------------------------------------------------------
# Pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PoincarePairData:
    complex: BasedChainComplex
    n: int
    cap: ChainMap
    boundary_ranks: Mapping[int, int] = field(default_factory=dict)
    boundary: PoincarePairData | None = None
    witness: ContractionWitness | None = None
    name: str = ""

    def __post_init__(self) -> None:
        C = self.complex
        _, _, quotient = sub_quotient_sequence(C, self.boundary_ranks)
        if self.cap.group != C.group:
            raise GroupError("duality map lives over another group")
        if not _same_complex(self.cap.source, dual_complex(C, self.n)):
            raise ChainError(f"{self.label}: duality map does not start at C^({self.n}-*)")
        if not _same_complex(self.cap.target, quotient):
            raise ChainError(f"{self.label}: duality map does not end at C/B")
        if self.boundary is not None:
            inc, _, _ = sub_quotient_sequence(C, self.boundary_ranks)
            if self.boundary.n != self.n - 1 or not _same_complex(self.boundary.complex,
                                                                  inc.source):
                raise ChainError(f"{self.label}: boundary data does not match the prefix")
        self._certify_equivalence()

    @property
    def label(self) -> str:
        return self.name or "pair"

    @property
    def group(self) -> GroupSpec:
        return self.complex.group

    @property
    def closed(self) -> bool:
        return not any(self.boundary_ranks.values())

    @property
    def euler_characteristic(self) -> int:
        """chi(X, ∂X)."""
        return self.cap.target.euler_characteristic()

    @cached_property
    def torsion_result(self) -> TorsionResult:
        return whitehead_torsion(self.cap)

    def _certify_equivalence(self) -> None:
        if self.witness is not None:
            if not _same_complex(self.witness.complex, cone(self.cap)):
                raise CertificateError(f"{self.label}: witness contracts another complex")
            return
        certify_equivalence(self.cap, f"{self.label}: duality map", self.torsion_result)


def rho(p: PoincarePairData, check_sign: bool = True) -> TorsionResult:
    """τ(cap); negating the fundamental class must not change the class."""
    result = p.torsion_result
    if check_sign:
        flipped = whitehead_torsion(-p.cap)
        v = check_equal(result.torsion, flipped.torsion, "fundamental class sign")
        if v.status == FAIL:
            raise EngineFailure(f"{p.label}: torsion depends on the sign of the fundamental "
                                f"class ({v.certificate})")
    return result


def rho_class(p: PoincarePairData) -> TorsionClass:
    return rho(p).torsion


# ---------------------------------------------------------------------------
# Built-in families
# ---------------------------------------------------------------------------


def _pair(C: BasedChainComplex, n: int, maps: Mapping[int, GRMatrix],
          boundary_ranks: Mapping[int, int] | None = None,
          boundary: PoincarePairData | None = None, name: str = "") -> PoincarePairData:
    ranks = dict(boundary_ranks or {})
    _, _, quotient = sub_quotient_sequence(C, ranks)
    cap = ChainMap(dual_complex(C, n), quotient, maps, "cap")
    return PoincarePairData(C, n, cap, ranks, boundary, name=name)


def sphere(n: int, group: GroupSpec | None = None) -> PoincarePairData:
    """S^n with one 0-cell and one n-cell (two 0-cells for n = 0)."""
    G = group or trivial_group()
    if n < 0:
        raise ChainError("sphere dimension must be nonnegative")
    if n == 0:
        C = make_complex(G, {0: 2}, name="S0")
        return _pair(C, 0, {0: GRMatrix.identity(G, 2)}, name="S0")
    C = make_complex(G, {0: 1, n: 1}, name=f"S{n}")
    one = GRMatrix.identity(G, 1)
    return _pair(C, n, {0: one, n: one}, name=f"S{n}")


def synthetic(u: GroupRingElement, n: int) -> PoincarePairData:
    """The sphere model over u's group with the degree-0 duality twisted by u."""
    G = u.group
    if n < 1:
        raise ChainError("synthetic pairs need n >= 1")
    torsion_from_units([u])
    C = make_complex(G, {0: 1, n: 1}, name=f"S{n}[u]")
    maps = {0: GRMatrix.from_rows(G, [[u]]), n: GRMatrix.identity(G, 1)}
    return _pair(C, n, maps, name=f"synthetic({u}; {n})")


def disc(n: int, group: GroupSpec | None = None) -> PoincarePairData:
    """D^n = e^0 ∪ e^(n-1) ∪ e^n with boundary sphere {e^0, e^(n-1)} as prefix."""
    G = group or trivial_group()
    if n < 1:
        raise ChainError("disc dimension must be at least 1")
    boundary = sphere(n - 1, G)
    if n == 1:
        ranks, prefix = {0: 2, 1: 1}, {0: 2}
        d = {1: GRMatrix.from_rows(G, [[0], [1]])}
        top = GRMatrix.from_rows(G, [[1, 0]])
    else:
        ranks, prefix = {0: 1, n - 1: 1, n: 1}, {0: 1, n - 1: 1}
        d = {n: GRMatrix.identity(G, 1)}
        top = GRMatrix.identity(G, 1)
    C = make_complex(G, ranks, d, name=f"D{n}")
    return _pair(C, n, {n: top}, prefix, boundary, name=f"D{n}")


@dataclass(frozen=True, eq=False)
class GluingData:
    left: PoincarePairData
    right: PoincarePairData
    f: ChainMap
    glued: PoincarePairData


def glue_pairs(pX: PoincarePairData, pY: PoincarePairData, f: ChainMap,
               f_inverse: Mapping[int, GRMatrix], cap_maps: Mapping[int, GRMatrix],
               name: str = "") -> PoincarePairData:
    """X ∪_f Y along their whole boundaries, with the glued duality map supplied."""
    if pX.closed or pY.closed:
        raise ChainError("gluing needs two pairs with boundary")
    Z = glue_complexes(pX.complex, pY.complex, f, f_inverse)
    return _pair(Z, pX.n, cap_maps, name=name or f"{pX.label}∪{pY.label}")


def disc_double(n: int, group: GroupSpec | None = None,
                twist: GroupRingElement | None = None) -> GluingData:
    """Two n-discs glued along S^(n-1); ``twist`` multiplies the 0-cell identification."""
    G = group or trivial_group()
    if n < 2:
        raise ChainError("disc doubles are built for n >= 2")
    u = twist if twist is not None else GroupRingElement.one(G)
    u_inv = torsion_from_units([u]).inverse[0, 0]
    pX, pY = disc(n, G), disc(n, G)
    B = pX.boundary.complex
    f = ChainMap(B, B, {0: GRMatrix.from_rows(G, [[u]]), n - 1: GRMatrix.identity(G, 1)},
                 "f")
    f_inverse = {0: GRMatrix.from_rows(G, [[u_inv]]), n - 1: GRMatrix.identity(G, 1)}
    # glued basis: e^0, e^(n-1), e^n_X, e^n_Y; the fundamental cycle is e^n_X - e^n_Y
    cap_maps = {0: GRMatrix.from_rows(G, [[u, -u]]), n: GRMatrix.from_rows(G, [[1], [-1]])}
    glued = glue_pairs(pX, pY, f, f_inverse, cap_maps, name=f"D{n}∪D{n}")
    return GluingData(pX, pY, f, glued)


def torus_surface() -> PoincarePairData:
    """T^2 over Z^2 = <x, y>: d(e_a) = x - 1, d(e_b) = y - 1, d(e_2) = e_a(1 - y) + e_b(x - 1)."""
    G = free_abelian_group(2, names=("x", "y"))
    one = GroupRingElement.one(G)
    x = GroupRingElement.monomial(G, (1, 0))
    y = GroupRingElement.monomial(G, (0, 1))
    x_inv = GroupRingElement.monomial(G, (-1, 0))
    y_inv = GroupRingElement.monomial(G, (0, -1))
    d1 = GRMatrix.from_rows(G, [[x - one, y - one]])
    d2 = GRMatrix.from_rows(G, [[one - y], [x - one]])
    C = make_complex(G, {0: 1, 1: 2, 2: 1}, {1: d1, 2: d2}, name="T2")
    maps = {
        0: GRMatrix.identity(G, 1),
        1: GRMatrix.from_rows(G, [[0, x_inv], [-y_inv, 0]]),
        2: GRMatrix.from_rows(G, [[x_inv * y_inv]]),
    }
    return _pair(C, 2, maps, name="T2")


# -- lens spaces ---------------------------------------------------------------


def _t(G: GroupSpec, e: int) -> GroupRingElement:
    return GroupRingElement.monomial(G, (e % G.order,))


def _geometric(G: GroupSpec, step: int, count: int) -> GroupRingElement:
    """1 + t^step + ... + t^(step (count - 1))."""
    return GroupRingElement(G, [((step * j % G.order,), 1) for j in range(count)])


def lens_complex(order: int, exponents: Sequence[int]) -> BasedChainComplex:
    """e_0 ... e_(2k-1) with d_(2i-1) = t^(r_i) - 1 and d_(2i) = N."""
    G = cyclic_group(order)
    for r in exponents:
        if gcd(r, order) != 1:
            raise ChainError(f"lens exponent {r} is not prime to {order}")
    N = GroupRingElement.norm_element(G)
    top = 2 * len(exponents) - 1
    diffs = {}
    for m in range(1, top + 1):
        entry = _t(G, exponents[(m - 1) // 2]) - 1 if m % 2 else N
        diffs[m] = GRMatrix.from_rows(G, [[entry]])
    name = f"L({order}; {','.join(str(r) for r in exponents)})"
    return make_complex(G, {m: 1 for m in range(top + 1)}, diffs, name)


def _periodic_map(source: BasedChainComplex, target: BasedChainComplex,
                  shifts: Sequence[tuple[int, int]], target_exponents: Sequence[int],
                  name: str) -> ChainMap:
    """A degree +-1 chain map between periodic complexes over C_n.

    Source odd differentials are t^e (t^r - 1) for (e, r) in ``shifts``;
    target ones t^s - 1. Odd components are geometric series, even ones the
    augmentation of the previous component, and the top component is moved
    by a multiple of N to augmentation +-1.
    """
    G = target.group
    n = G.order
    f = GroupRingElement.one(G)
    maps = {0: f}
    for i, ((e, r), s) in enumerate(zip(shifts, target_exponents)):
        c = (r * pow(s, -1, n)) % n if n > 1 else 1
        f = f * _t(G, e) * _geometric(G, s, c)
        maps[2 * i + 1] = f
        if 2 * i + 2 <= source.hi:
            f = GroupRingElement.constant(G, f.augmentation())
            maps[2 * i + 2] = f
    top = source.hi
    a = maps[top].augmentation()
    goal = next((g for g in (1, -1) if (a - g) % n == 0), None)
    if goal is None:
        raise CertificateError(f"{name}: no degree +-1 map (top augmentation {a} mod {n})")
    maps[top] = maps[top] + GroupRingElement.norm_element(G) * ((goal - a) // n)
    return ChainMap(source, target,
                    {k: GRMatrix.from_rows(G, [[x]]) for k, x in maps.items()}, name)


def lens(order: int, exponents: Sequence[int]) -> PoincarePairData:
    """L(order; r_1, ..., r_k) with its chain-level duality map."""
    C = lens_complex(order, exponents)
    k = len(exponents)
    n = 2 * k - 1
    D = dual_complex(C, n)
    # dual odd differential in degree 2i+1 is t^-r (t^r - 1) with r = r_(k-i)
    shifts = [(-exponents[k - 1 - i], exponents[k - 1 - i]) for i in range(k)]
    cap = _periodic_map(D, C, shifts, exponents, "cap")
    return PoincarePairData(C, n, cap, name=C.name)


def lens_equivalence(order: int, source: Sequence[int], target: Sequence[int]
                     ) -> tuple[PoincarePairData, PoincarePairData, ChainMap]:
    """A degree-one equivalence L(source) -> psi^* L(target) for some t -> t^a.

    Returns the source pair, the target pair induced along psi and the map.
    """
    p = lens(order, source)
    q0 = lens(order, target)
    G = p.group
    for a in range(1, order):
        if gcd(a, order) != 1:
            continue
        psi = power_hom(G, a)
        moved = [(a * s) % order for s in target]
        try:
            f = _periodic_map(p.complex, induce_complex(q0.complex, psi),
                              [(0, r) for r in source], moved, "f")
        except CertificateError:
            continue
        q = induce_pair(q0, psi)
        logger.info("L(%d; %s) -> L(%d; %s) along t -> t^%d", order, source, order, target, a)
        return p, q, f
    raise CertificateError(f"L({order}; {source}) and L({order}; {target}) are not "
                           f"homotopy equivalent")


def induce_pair(p: PoincarePairData, hom: GroupHom) -> PoincarePairData:
    """Transport along a group automorphism preserving w."""
    if hom.source != hom.target:
        raise GroupError("pairs are only transported along automorphisms")
    C = induce_complex(p.complex, hom)
    boundary = induce_pair(p.boundary, hom) if p.boundary is not None else None
    return PoincarePairData(C, p.n, induce_map(p.cap, hom), p.boundary_ranks, boundary,
                            name=p.name)


# -- products ------------------------------------------------------------------


def product(pX: PoincarePairData, pY: PoincarePairData, name: str = "") -> PoincarePairData:
    """X x Y with boundary ∂X x Y ∪ X x ∂Y moved to the front of each degree.

    The duality map is (cap_X (x) cap_Y) after the identification
    (c (x) e)* -> (-1)^(p (m + q)) c* (x) e* for c in X_p, e in Y_q, m = dim Y.
    """
    P, i1, i2 = product_group(pX.group, pY.group)
    X, Y = pX.complex, pY.complex
    n, m = pX.n, pY.n
    N = n + m
    bx, by = pX.boundary_ranks, pY.boundary_ranks
    D = tensor_product(X, Y, P, i1, i2)
    order, prefix = {}, {}
    for k in D.degrees:
        basis = tensor_basis(X, Y, k)
        inside = [r for r, (i, a, b) in enumerate(basis)
                  if a < bx.get(i, 0) or b < by.get(k - i, 0)]
        outside = [r for r in range(len(basis)) if r not in set(inside)]
        order[k], prefix[k] = inside + outside, len(inside)
    diffs = {k: D.d(k).submatrix(order[k - 1], order[k]) for k in D.diffs}
    label = name or f"{pX.label}×{pY.label}"
    Dp = BasedChainComplex(P, D.lo, D.ranks, diffs, label)
    _, _, quotient = sub_quotient_sequence(Dp, prefix)
    capX = {k: pX.cap(k).map_group(i1) for k in range(0, n + 1)}
    capY = {k: pY.cap(k).map_group(i2) for k in range(0, m + 1)}
    zero = GroupRingElement.zero(P)
    maps = {}
    for k in range(0, N + 1):
        src = [tensor_basis(X, Y, N - k)[r] for r in order.get(N - k, [])]
        dst = [tensor_basis(X, Y, k)[r] for r in order.get(k, [])][prefix.get(k, 0):]
        rows = [[zero] * len(src) for _ in dst]
        for row, (i, a2, b2) in enumerate(dst):
            for col, (p, a, b) in enumerate(src):
                q = N - k - p
                if i != n - p or i not in capX or k - i not in capY:
                    continue
                x = capX[i][a2 - bx.get(i, 0), a]
                y = capY[k - i][b2 - by.get(k - i, 0), b]
                if x and y:
                    rows[row][col] = x * y * (-1 if (p * (m + q)) % 2 else 1)
        maps[k] = GRMatrix(P, len(dst), len(src), tuple(map(tuple, rows)))
    cap = ChainMap(dual_complex(Dp, N), quotient, maps, "cap")
    return PoincarePairData(Dp, N, cap, prefix, name=label)


def suspend(p: PoincarePairData) -> PoincarePairData:
    """p x (D^1, S^0): one dimension up, ρ changes sign."""
    return product(p, disc(1), name=f"Σ{p.label}")


# ---------------------------------------------------------------------------
# Transport along equivalences
# ---------------------------------------------------------------------------


def split_map(f: ChainMap, source_ranks: Mapping[int, int],
              target_ranks: Mapping[int, int]) -> tuple[ChainMap, ChainMap]:
    """(∂f, f rel ∂) for a map carrying the source prefix into the target prefix."""
    C, D = f.source, f.target
    inc_C, _, quo_C = sub_quotient_sequence(C, source_ranks)
    inc_D, _, quo_D = sub_quotient_sequence(D, target_ranks)
    degrees = range(min(C.lo, D.lo), max(C.hi, D.hi) + 1)
    inner, outer = {}, {}
    for k in degrees:
        a, b = source_ranks.get(k, 0), target_ranks.get(k, 0)
        fk = f(k)
        if not fk.submatrix(range(b, D.rank(k)), range(a)).is_zero():
            raise CertificateError(f"witness missing: {f.name or 'f'} does not carry the "
                                   f"boundary into the boundary in degree {k}")
        inner[k] = fk.submatrix(range(b), range(a))
        outer[k] = fk.submatrix(range(b, D.rank(k)), range(a, C.rank(k)))
    return (ChainMap(inc_C.source, inc_D.source, inner, f"∂{f.name or 'f'}"),
            ChainMap(quo_C, quo_D, outer, f"{f.name or 'f'} rel ∂"))


def transport(p: PoincarePairData, g: ChainMap, name: str = "") -> PoincarePairData:
    """The pair on g's target with cap (g rel ∂) ∘ cap ∘ g^(n-*), and ∂g_* on the boundary.

    The target keeps the source's boundary prefix.
    """
    if not _same_complex(g.source, p.complex):
        raise ChainError("the equivalence does not start at the pair's complex")
    outer, boundary = g, None
    if not p.closed:
        inner, outer = split_map(g, p.boundary_ranks, p.boundary_ranks)
        if p.boundary is not None:
            boundary = transport(p.boundary, inner)
    cap = compose(outer, compose(p.cap, dual_map(g, p.n)))
    return PoincarePairData(g.target, p.n, ChainMap(cap.source, cap.target, cap.maps, "cap"),
                            dict(p.boundary_ranks), boundary,
                            name=name or f"{g.name or 'g'}_*{p.label}")


# ---------------------------------------------------------------------------
# Identity checks
# ---------------------------------------------------------------------------


def check_involution_identity(p: PoincarePairData) -> Verdict:
    """j_*ρ(∂X) = (-1)^n *ρ - ρ; closed: ρ = (-1)^n *ρ."""
    r = rho_class(p)
    starred = signed_involution(r, _sign(p.n))
    if p.closed:
        return check_equal(r, starred, "involution identity")
    if p.boundary is None:
        logger.warning("%s: no boundary data, involution identity skipped", p.label)
        return Verdict("involution identity", UNKNOWN, LEVEL_INVARIANTS, "boundary data missing")
    return check_equal(rho_class(p.boundary), wh_sub(starred, r), "involution identity")


def check_homotopy_invariance(p: PoincarePairData, f: ChainMap,
                              q: PoincarePairData | None = None,
                              boundary_map: ChainMap | None = None) -> Verdict:
    """ρ(Y) - ρ(X) = τ(f) + (-1)^n *τ(f) - j_*τ(∂f) over one group.

    ∂f defaults to the restriction of f to the boundary prefixes.
    """
    q = q or transport(p, f)
    if q.group != p.group or q.n != p.n:
        raise GroupError("pairs to compare must share group and dimension")
    if p.closed != q.closed:
        raise ChainError("only one of the pairs has a boundary")
    tau_f = whitehead_torsion(f).torsion
    lhs = wh_sub(rho_class(q), rho_class(p))
    rhs = wh_add(tau_f, signed_involution(tau_f, _sign(p.n)))
    if not p.closed:
        inner, _ = split_map(f, p.boundary_ranks, q.boundary_ranks)
        if boundary_map is None:
            boundary_map = inner
        elif not (_same_complex(boundary_map.source, inner.source)
                  and _same_complex(boundary_map.target, inner.target)):
            raise CertificateError("witness missing: the boundary map does not run between "
                                   "the boundaries")
        # prefixes live over the pair's group, so j_* is the identity on Wh
        rhs = wh_sub(rhs, whitehead_torsion(boundary_map).torsion)
    return check_equal(lhs, rhs, "homotopy invariance of rho")


def check_gluing(data: GluingData) -> Verdict:
    """ρ(X ∪_f Y) = (-1)^n *ρ(X) + ρ(Y) + τ(f)."""
    pX, pY, f, glued = data.left, data.right, data.f, data.glued
    rhs = wh_add(wh_add(signed_involution(rho_class(pX), _sign(pX.n)), rho_class(pY)),
                 whitehead_torsion(f).torsion)
    return check_equal(rho_class(glued), rhs, "gluing formula")


def check_product(pX: PoincarePairData, pY: PoincarePairData,
                  prod: PoincarePairData | None = None) -> Verdict:
    """ρ(X x Y) = chi(X, ∂X) k_Y ρ(Y) + chi(Y, ∂Y) k_X ρ(X)."""
    prod = prod or product(pX, pY)
    _, kX, kY = product_group(pX.group, pY.group)
    rhs = wh_add(wh_multiple(wh_induced(rho_class(pY), kY), pX.euler_characteristic),
                 wh_multiple(wh_induced(rho_class(pX), kX), pY.euler_characteristic))
    return check_equal(rho_class(prod), rhs, "product formula for rho")


# ---------------------------------------------------------------------------
# Tate–Poincaré torsion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RhoHatResult:
    tate: TateVerdict
    corrected: PoincarePairData | None = None
    corrected_verdict: Verdict | None = None


def corrected_model(p: PoincarePairData, y: TorsionClass) -> PoincarePairData:
    """Rebase one degree of C by a representative of y so that ρ drops by y + (-1)^n *y."""
    if not y.integral:
        raise CertificateError("the witness needs an integral representative")
    C, G = p.complex, p.group
    s = y.representative.nrows
    degrees = sorted((k for k in C.degrees if C.rank(k) >= s), key=lambda k: (k % 2, k))
    if not degrees:
        raise CertificateError(f"no degree of rank >= {s} to absorb the witness")
    m = degrees[0]
    forward, backward = (y.inverse, y.representative) if m % 2 == 0 else \
        (y.representative, y.inverse)
    pad = GRMatrix.identity(G, C.rank(m) - s)

    _, g = basis_change(C, {m: block_diag(G, forward, pad)}, {m: block_diag(G, backward, pad)})
    return transport(p, g, name=f"{p.label}'")


def rho_hat(p: PoincarePairData, witness: TorsionClass | None = None) -> RhoHatResult:
    """The class of ρ in Ĥ^n(Z/2; Wh), with the corrected model on the witness path."""
    if not p.closed:
        raise ChainError("rho-hat is defined for closed pairs")
    identity = check_involution_identity(p)
    if identity.status == FAIL:
        raise CertificateError(f"{p.label}: involution identity fails, rho-hat undefined")
    if identity.status == UNKNOWN:
        logger.warning("%s: involution identity undecided, rho-hat left open", p.label)
        return RhoHatResult(TateVerdict(UNKNOWN, "involution identity undecided"))
    r = rho_class(p)
    tate = tate_class(r, p.n, witness)
    if witness is None or tate.witness is not witness:
        return RhoHatResult(tate)
    corrected = corrected_model(p, witness)
    norm = wh_add(witness, signed_involution(witness, _sign(p.n)))
    shift = check_equal(rho_class(corrected), wh_sub(r, norm), "witness shift")
    if shift.status == FAIL:
        raise EngineFailure(f"{p.label}: corrected model moved rho by the wrong amount")
    return RhoHatResult(tate, corrected,
                        check_vanishing(rho_class(corrected), "corrected rho vanishes"))


def check_tate_invariance(p: PoincarePairData, f: ChainMap,
                          q: PoincarePairData | None = None) -> Verdict:
    """Equivalent closed pairs have the same ρ̂."""
    q = q or transport(p, f)
    a, b = rho_hat(p).tate.state, rho_hat(q).tate.state
    name = "tate invariance"
    if a == b and a != UNKNOWN:
        return Verdict(name, PASS, LEVEL_INVARIANTS, f"both {a}")
    if {a, b} == {TRIVIAL, NONTRIVIAL}:
        return Verdict(name, FAIL, LEVEL_INVARIANTS, f"{a} against {b}")
    return Verdict(name, UNKNOWN, LEVEL_INVARIANTS, f"{a} against {b}")


def builtin_manifolds() -> list[PoincarePairData]:
    """The manifold families every suite runs over."""
    pairs = [sphere(2), sphere(3), torus_surface()]
    pairs += [lens(n, exps) for n, exps in ((2, (1, 1)), (3, (1, 1)), (5, (1, 1)), (5, (1, 2)),
                                            (7, (1, 1)), (7, (1, 2)))]
    pairs.append(product(sphere(2), sphere(2)))
    pairs.append(product(lens(3, (1, 1)), sphere(2)))
    return pairs
