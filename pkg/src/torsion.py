"""Torsion of acyclic based complexes and of chain equivalences.

The engine cancels unit entries of the differentials pair by pair. Each
cancellation splits off an elementary complex 0 -> R --u--> R -> 0 after
elementary basis changes, contributing [u] from odd degrees and [u^-1] from
even ones, i.e. the torsion of (d + gamma)_odd. The accumulated basis
changes give an explicit contraction when everything cancels.

When no unit entry is left the result is Stuck: the cancelled part stays
integral and the residual block is evaluated through the standard ring
morphisms of the group, which is a weaker, field-valued invariant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping

from src.chains import (
    BasedChainComplex,
    ChainHomotopy,
    ChainMap,
    compose,
    cone,
    identity_map,
    make_complex,
    pushout_map,
    tensor_maps,
)
from src.config import REGULAR_ORDER_LIMIT
from src.constants import COMPLETE, STUCK
from src.cyclotomic import CYCLOTOMIC, INTEGERS, target_one, target_zero
from src.errors import CertificateError, ChainError, EngineFailure
from src.group_ring import (
    GroupRingElement,
    RingMorphism,
    apply_morphism,
    certify_unit,
    standard_morphisms,
)
from src.groups import GroupHom, GroupSpec
from src.linalg import GRMatrix, block, det_over_target
from src.whitehead import (
    TorsionClass,
    Verdict,
    check_equal,
    check_vanishing,
    field_class,
    torsion_from_units,
    wh_add,
    wh_induced,
    wh_multiple,
    wh_sub,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Pair cancellation, generic over the entry ring
# ---------------------------------------------------------------------------


@dataclass
class _Ring:
    zero: object
    one: object
    quick_inverse: Callable[[object], object | None]
    slow_inverse: Callable[[object], object | None] | None = None


def _identity(ring: _Ring, n: int) -> list[list]:
    return [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]


@dataclass
class _Pair:
    degree: int
    row: int
    col: int
    unit: object
    inverse: object


class _Reducer:
    """Cancels unit entries of d_k while tracking the basis changes A_k.

    After cancellation d'_k = A_{k-1} d_k A_k^-1 is zero off the pairs.
    """

    def __init__(self, ranks: Mapping[int, int], diffs: Mapping[int, list[list]], ring: _Ring,
                 reverse: bool = False, track: bool = True):
        self.ranks = dict(ranks)
        self.d = {k: [list(r) for r in m] for k, m in diffs.items()}
        self.ring = ring
        self.reverse = reverse
        self.track = track
        self.active = {k: [True] * r for k, r in self.ranks.items()}
        self.A = {k: _identity(ring, r) for k, r in self.ranks.items()} if track else {}
        self.A_inv = {k: _identity(ring, r) for k, r in self.ranks.items()} if track else {}
        self.pairs: list[_Pair] = []

    # -- pivots ---------------------------------------------------------------

    def _candidates(self):
        degrees = sorted(self.d, reverse=self.reverse)
        for k in degrees:
            rows = [i for i, a in enumerate(self.active[k - 1]) if a]
            cols = [j for j, a in enumerate(self.active[k]) if a]
            if self.reverse:
                rows, cols = rows[::-1], cols[::-1]
            for i in rows:
                for j in cols:
                    x = self.d[k][i][j]
                    if not x == 0:
                        yield k, i, j, x

    def _find_pivot(self):
        for k, i, j, x in self._candidates():
            inv = self.ring.quick_inverse(x)
            if inv is not None:
                return k, i, j, x, inv
        if self.ring.slow_inverse is None:
            return None
        for k, i, j, x in self._candidates():
            inv = self.ring.slow_inverse(x)
            if inv is not None:
                return k, i, j, x, inv
        return None

    # -- elementary moves ---------------------------------------------------

    def _row_op(self, k: int, r: int, i: int, lam) -> None:
        """row_r(d_k) -= lam * row_i(d_k), a basis change of C_{k-1}."""
        d = self.d[k]
        d[r] = [a - lam * b for a, b in zip(d[r], d[i])]
        if k - 1 in self.d:
            for row in self.d[k - 1]:
                row[i] = row[i] + row[r] * lam
        if self.track:
            A, A_inv = self.A[k - 1], self.A_inv[k - 1]
            A[r] = [a - lam * b for a, b in zip(A[r], A[i])]
            for row in A_inv:
                row[i] = row[i] + row[r] * lam

    def _col_op(self, k: int, c: int, j: int, mu) -> None:
        """col_c(d_k) -= col_j(d_k) * mu, a basis change of C_k."""
        for row in self.d[k]:
            row[c] = row[c] - row[j] * mu
        if k + 1 in self.d:
            up = self.d[k + 1]
            up[j] = [a + mu * b for a, b in zip(up[j], up[c])]
        if self.track:
            A, A_inv = self.A[k], self.A_inv[k]
            A[j] = [a + mu * b for a, b in zip(A[j], A[c])]
            for row in A_inv:
                row[c] = row[c] - row[j] * mu

    def run(self) -> bool:
        while True:
            found = self._find_pivot()
            if found is None:
                break
            k, i, j, u, u_inv = found
            d = self.d[k]
            for r, alive in enumerate(self.active[k - 1]):
                if alive and r != i and not d[r][j] == 0:
                    self._row_op(k, r, i, d[r][j] * u_inv)
            for c, alive in enumerate(self.active[k]):
                if alive and c != j and not d[i][c] == 0:
                    self._col_op(k, c, j, u_inv * d[i][c])
            self.active[k - 1][i] = False
            self.active[k][j] = False
            self.pairs.append(_Pair(k, i, j, u, u_inv))
        return self.complete

    @property
    def complete(self) -> bool:
        return not any(any(a) for a in self.active.values())

    def residual(self) -> tuple[dict[int, int], dict[int, list[list]]]:
        keep = {k: [i for i, a in enumerate(act) if a] for k, act in self.active.items()}
        ranks = {k: len(v) for k, v in keep.items()}
        diffs = {k: [[m[i][j] for j in keep[k]] for i in keep[k - 1]] for k, m in self.d.items()}
        return ranks, diffs


def _diag_entries(pairs: list[_Pair]) -> tuple[list, list]:
    forward, backward = [], []
    for p in pairs:
        if p.degree % 2:
            forward.append(p.unit)
            backward.append(p.inverse)
        else:
            forward.append(p.inverse)
            backward.append(p.unit)
    return forward, backward


# ---------------------------------------------------------------------------
# Integral torsion
# ---------------------------------------------------------------------------


def _integral_ring(G: GroupSpec, max_order: int) -> _Ring:
    def quick(x: GroupRingElement):
        unit = x.trivial_unit()
        if unit is None:
            return None
        sign, g = unit
        return GroupRingElement.monomial(G, G.inverse(g), sign)

    return _Ring(GroupRingElement.zero(G), GroupRingElement.one(G), quick,
                 lambda x: certify_unit(x, max_order))


def _grid(C: BasedChainComplex) -> tuple[dict[int, int], dict[int, list[list]]]:
    ranks = {k: C.rank(k) for k in C.degrees}
    diffs = {k: C.d(k).to_lists() for k in range(C.lo + 1, C.hi + 1)}
    return ranks, diffs


@dataclass(frozen=True, eq=False)
class ContractionWitness:
    """gamma_k: C_k -> C_{k+1} with d gamma + gamma d = 1."""

    complex: BasedChainComplex
    gammas: Mapping[int, GRMatrix] = field(default_factory=dict)

    def __post_init__(self) -> None:
        C = self.complex
        for k in C.degrees:
            lhs = C.d(k + 1) @ self(k) + self(k - 1) @ C.d(k)
            if not lhs.is_identity():
                raise ChainError("d gamma + gamma d is not the identity", degree=k)

    def __call__(self, k: int) -> GRMatrix:
        C = self.complex
        g = self.gammas.get(k)
        return g if g is not None else GRMatrix.zero(C.group, C.rank(k + 1), C.rank(k))

    def square_zero(self) -> ContractionWitness:
        """gamma d gamma: still a contraction, and its square vanishes."""
        C = self.complex
        return ContractionWitness(C, {k: self(k) @ C.d(k + 1) @ self(k) for k in C.degrees})

    def odd_matrix(self) -> GRMatrix:
        return _parity_matrix(self.complex, self, odd=True)

    def even_matrix(self) -> GRMatrix:
        return _parity_matrix(self.complex, self, odd=False)


def _parity_matrix(C: BasedChainComplex, gamma: ContractionWitness, odd: bool) -> GRMatrix:
    """(d + gamma) restricted to C_odd -> C_even (or C_even -> C_odd)."""
    G = C.group
    src = [k for k in C.degrees if k % 2 == (1 if odd else 0)]
    dst = [k for k in C.degrees if k % 2 == (0 if odd else 1)]
    if not src or not dst:
        n = sum(C.rank(k) for k in src)
        m = sum(C.rank(k) for k in dst)
        return GRMatrix.zero(G, m, n)
    grid = []
    for e in dst:
        row = []
        for o in src:
            if e == o - 1:
                row.append(C.d(o))
            elif e == o + 1:
                row.append(gamma(o))
            else:
                row.append(GRMatrix.zero(G, C.rank(e), C.rank(o)))
        grid.append(row)
    return block(G, grid)


@dataclass(frozen=True, eq=False)
class TorsionResult:
    status: str
    torsion: TorsionClass
    contraction: ContractionWitness | None = None
    residual: BasedChainComplex | None = None
    pairs: int = 0

    @property
    def complete(self) -> bool:
        return self.status == COMPLETE


def _contraction(C: BasedChainComplex, red: _Reducer) -> ContractionWitness:
    G = C.group
    zero = GroupRingElement.zero(G)
    gammas = {}
    for k in C.degrees:
        if k + 1 not in red.d:
            continue
        g = [[zero] * C.rank(k) for _ in range(C.rank(k + 1))]
        for p in red.pairs:
            if p.degree == k + 1:
                g[p.col][p.row] = p.inverse
        gp = GRMatrix(G, C.rank(k + 1), C.rank(k), tuple(map(tuple, g)))
        A_inv = GRMatrix.from_rows(G, red.A_inv[k + 1], C.rank(k + 1))
        A = GRMatrix.from_rows(G, red.A[k], C.rank(k))
        gammas[k] = A_inv @ gp @ A
    return ContractionWitness(C, gammas)


def field_torsion(C: BasedChainComplex, m: RingMorphism):
    """Torsion of the image of C over the target field of m; None if not acyclic there."""
    one = target_one(m.target, m.order)
    zero = target_zero(m.target, m.order)
    ring = _Ring(zero, one, lambda x: None if x == 0 else one / x)
    ranks = {k: C.rank(k) for k in C.degrees}
    diffs = {k: [[apply_morphism(x, m) for x in row] for row in C.d(k).entries]
             for k in range(C.lo + 1, C.hi + 1)}
    red = _Reducer(ranks, diffs, ring, track=False)
    if not red.run():
        return None
    value = one
    for p in red.pairs:
        value = value * (p.unit if p.degree % 2 else p.inverse)
    return value


def torsion_of_acyclic(C: BasedChainComplex, *, reverse: bool = False,
                       max_order: int = REGULAR_ORDER_LIMIT) -> TorsionResult:
    """Torsion of an acyclic based complex by unit-pair cancellation."""
    G = C.group
    ranks, diffs = _grid(C)
    red = _Reducer(ranks, diffs, _integral_ring(G, max_order), reverse=reverse)
    red.run()
    forward, backward = _diag_entries(red.pairs)
    partial = TorsionClass(G, GRMatrix.diag(G, forward), GRMatrix.diag(G, backward))
    if red.complete:
        witness = _contraction(C, red)
        logger.debug("%s: %d pairs cancelled", C, len(red.pairs))
        return TorsionResult(COMPLETE, partial, witness, None, len(red.pairs))
    r_ranks, r_diffs = red.residual()
    residual = make_complex(G, r_ranks, {
        k: GRMatrix.from_rows(G, m, r_ranks[k]) for k, m in r_diffs.items()})
    logger.warning("%s is stuck with residual ranks %s", C, residual.ranks)

    def evaluate(m: RingMorphism):
        rest = field_torsion(residual, m)
        if rest is None:
            return None
        return det_over_target(partial.representative, m) * rest

    return TorsionResult(STUCK, field_class(G, evaluate, label="field torsion"), None,
                         residual, len(red.pairs))


def torsion_from_contraction(witness: ContractionWitness) -> TorsionClass:
    """The class of (d + gamma)_odd for a supplied contraction."""
    M, N = witness.odd_matrix(), witness.even_matrix()
    if not (M.is_square and (M @ N).is_identity()):
        witness = witness.square_zero()
        M, N = witness.odd_matrix(), witness.even_matrix()
    if M.is_square and (M @ N).is_identity() and (N @ M).is_identity():
        return TorsionClass(M.group, M, N)
    return torsion_from_units(M)


def _homotopy_pair(f: ChainMap, inverse: ChainMap,
                   homotopies: tuple[ChainHomotopy, ChainHomotopy] | None
                   ) -> tuple[ChainHomotopy, ChainHomotopy]:
    """(h: g f ~ 1, k: f g ~ 1), checked against f and its inverse g."""
    C, D = f.source, f.target
    if not inverse.source.same_shape(D) or not inverse.target.same_shape(C):
        raise CertificateError("inverse does not run from the target back to the source")
    gf, fg = compose(inverse, f), compose(f, inverse)
    if homotopies is None:
        try:
            return ChainHomotopy(gf, identity_map(C)), ChainHomotopy(fg, identity_map(D))
        except ChainError as e:
            raise CertificateError(f"inverse without homotopies must be strict: {e}") from e
    left, right = homotopies
    for h, composite, X in ((left, gf, C), (right, fg, D)):
        if not h.f.source.same_shape(X) or not h.f.target.same_shape(X):
            raise CertificateError("homotopy witness does not match the map")
        if not all(h.f(k) == composite(k) and h.g(k).is_identity() for k in X.degrees):
            raise CertificateError("homotopy witness does not start at the composite "
                                   "or does not end at the identity")
    return left, right


def equivalence_contraction(f: ChainMap, left: ChainHomotopy, right: ChainHomotopy,
                            inverse: ChainMap) -> ContractionWitness | None:
    """gamma = [[-k, 0], [g, h]] on cone(f); valid when f h = k f (always for strict inverses)."""
    K = cone(f)
    C, D = f.source, f.target
    G = f.group
    gammas = {k: block(G, [
        [-right(k), GRMatrix.zero(G, D.rank(k + 1), C.rank(k - 1))],
        [inverse(k), left(k - 1)],
    ]) for k in K.degrees}
    try:
        return ContractionWitness(K, gammas)
    except ChainError:
        logger.debug("homotopies of %s do not commute with f; no contraction", f.name or "f")
        return None


def whitehead_torsion(f: ChainMap, *, inverse: ChainMap | None = None,
                      homotopies: tuple[ChainHomotopy, ChainHomotopy] | None = None,
                      reverse: bool = False) -> TorsionResult:
    """tau(f) := torsion of cone(f).

    A supplied inverse (strict, or with homotopies g f ~ 1 and f g ~ 1) is
    checked first; it contracts cone(f) when elimination gets stuck.
    """
    witness = None
    if homotopies is not None and inverse is None:
        raise CertificateError("homotopy witness without the inverse map")
    if inverse is not None:
        left, right = _homotopy_pair(f, inverse, homotopies)
        witness = equivalence_contraction(f, left, right, inverse)
        logger.debug("equivalence witness for %s checked", f.name or "f")
    result = torsion_of_acyclic(cone(f), reverse=reverse)
    if result.complete or witness is None:
        return result
    logger.info("%s: elimination stuck, using the supplied inverse", f.name or "f")
    return TorsionResult(COMPLETE, torsion_from_contraction(witness), witness, None,
                         result.pairs)


def _is_unit_value(value, m: RingMorphism) -> bool:
    if m.target == INTEGERS:
        return abs(value) == 1
    if m.target == CYCLOTOMIC:
        return value.is_integral() and value.inverse().is_integral()
    return True


def certify_equivalence(f: ChainMap, label: str = "", result: TorsionResult | None = None
                        ) -> TorsionResult:
    """tau(f), raising CertificateError when f cannot be a chain equivalence.

    A stuck cone is accepted when it is acyclic under every standard morphism
    and the images of its torsion are units of the integral targets.
    """
    label = label or f.name or "f"
    result = result or whitehead_torsion(f)
    if result.complete:
        return result
    for m in standard_morphisms(f.group):
        value = result.torsion.evaluate(m)
        if value is None:
            raise CertificateError(f"{label} is not an equivalence (not acyclic under {m.label})")
        if not _is_unit_value(value, m):
            raise CertificateError(f"{label} is not an equivalence "
                                   f"({m.label}(det) = {value} is not a unit)")
    logger.warning("%s certified as an equivalence over the character fields only", label)
    return result


def check_witness_independence(C: BasedChainComplex) -> Verdict:
    """Two pivot orders must give the same class."""
    a = torsion_of_acyclic(C)
    b = torsion_of_acyclic(C, reverse=True)
    if a.status != b.status:
        raise EngineFailure("pivot orders disagree on whether the complex reduces")
    return check_equal(a.torsion, b.torsion, "witness independence")


# ---------------------------------------------------------------------------
# Formula checks
# ---------------------------------------------------------------------------


def check_composition_formula(f: ChainMap, g: ChainMap) -> Verdict:
    """tau(g f) = tau(g) + tau(f) (same ring, so g_* is the identity on Wh)."""
    gf = compose(g, f)
    lhs = whitehead_torsion(gf).torsion
    rhs = wh_add(whitehead_torsion(g).torsion, whitehead_torsion(f).torsion)
    return check_equal(lhs, rhs, "composition formula")


def check_homotopy_invariance(h: ChainHomotopy) -> Verdict:
    return check_equal(whitehead_torsion(h.f).torsion, whitehead_torsion(h.g).torsion,
                       "homotopy invariance")


def restrict_to_prefix(f: ChainMap, source_prefix: Mapping[int, int],
                       target_prefix: Mapping[int, int]) -> ChainMap:
    S, T = f.source, f.target

    def sub(C, prefix):
        return make_complex(C.group, {k: prefix.get(k, 0) for k in C.degrees}, {
            k: C.d(k).submatrix(range(prefix.get(k - 1, 0)), range(prefix.get(k, 0)))
            for k in range(C.lo + 1, C.hi + 1)})

    S0, T0 = sub(S, source_prefix), sub(T, target_prefix)
    return ChainMap(S0, T0, {
        k: f(k).submatrix(range(target_prefix.get(k, 0)), range(source_prefix.get(k, 0)))
        for k in S.degrees})


def check_sum_formula(f1: ChainMap, f2: ChainMap, common_source: Mapping[int, int],
                      common_target: Mapping[int, int]) -> Verdict:
    """tau(f1 ∪ f2) = tau(f1) + tau(f2) - tau(f0) for maps agreeing on a shared prefix."""
    f = pushout_map(f1, f2, common_source, common_target)
    f0 = restrict_to_prefix(f1, common_source, common_target)
    total = whitehead_torsion(f).torsion
    parts = wh_sub(wh_add(whitehead_torsion(f1).torsion, whitehead_torsion(f2).torsion),
                   whitehead_torsion(f0).torsion)
    return check_equal(total, parts, "sum formula")


def product_torsion(f1: ChainMap, f2: ChainMap, P: GroupSpec, i1: GroupHom,
                    i2: GroupHom) -> tuple[TorsionResult, TorsionClass]:
    """(tau(f1 (x) f2), chi(Y2) i1_* tau(f1) + chi(Y1) i2_* tau(f2))."""
    prod = whitehead_torsion(tensor_maps(f1, f2, P, i1, i2))
    chi1, chi2 = f1.target.euler_characteristic(), f2.target.euler_characteristic()
    predicted = wh_add(wh_multiple(wh_induced(whitehead_torsion(f1).torsion, i1), chi2),
                       wh_multiple(wh_induced(whitehead_torsion(f2).torsion, i2), chi1))
    return prod, predicted


def check_product_formula(f1: ChainMap, f2: ChainMap, P: GroupSpec, i1: GroupHom,
                          i2: GroupHom) -> Verdict:
    prod, predicted = product_torsion(f1, f2, P, i1, i2)
    return check_equal(prod.torsion, predicted, "product formula")


def check_trivial(C: BasedChainComplex, identity: str = "torsion vanishes") -> Verdict:
    return check_vanishing(torsion_of_acyclic(C).torsion, identity)

