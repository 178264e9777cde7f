"""Based free chain complexes over ZG and the constructions built on them.

Conventions (fixed once, used everywhere):

  cone       cone(f)_k = D_k + C_{k-1},  d = [[d^D, f], [0, -d^C]]
  dual       (d^{n-*})_k = (-1)^k * bar_transpose(d_{n-k+1})
  tensor     d(x (x) y) = dx (x) y + (-1)^|x| x (x) dy, basis ordered by
             the degree of the left factor, then left index, then right index
  torus      T(v) = cone(1 - V t) on Z[G x|_alpha Z] (x) C, where V is
             alpha-semilinear: d_k V_k = V_{k-1} alpha(d_k)

A based subcomplex is a basis prefix in every degree.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

from sympy import Matrix

from src.errors import CertificateError, ChainError, GroupError
from src.group_ring import GroupRingElement
from src.groups import CYCLIC, FREE_ABELIAN, GroupHom, GroupSpec, inclusion_hom, semidirect_group
from src.linalg import GRMatrix, block, invert, smith_normal_form

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Complexes
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BasedChainComplex:
    """Ranks for degrees lo .. lo + len(ranks) - 1 and d_k for the inner degrees."""

    group: GroupSpec
    lo: int
    ranks: tuple[int, ...]
    diffs: Mapping[int, GRMatrix] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self) -> None:
        if any(r < 0 for r in self.ranks):
            raise ChainError("ranks must be nonnegative")
        full = {}
        for k in range(self.lo + 1, self.hi + 1):
            d = self.diffs.get(k)
            if d is None:
                d = GRMatrix.zero(self.group, self.rank(k - 1), self.rank(k))
            if d.group != self.group:
                raise GroupError(f"d_{k} lives over {d.group.label}, not {self.group.label}")
            if d.shape != (self.rank(k - 1), self.rank(k)):
                raise ChainError(f"d_{k} has shape {d.shape}, expected "
                                 f"{(self.rank(k - 1), self.rank(k))}", degree=k)
            full[k] = d
        extra = set(self.diffs) - set(full)
        if extra:
            raise ChainError(f"differentials outside the degree range: {sorted(extra)}")
        object.__setattr__(self, "diffs", full)
        for k in range(self.lo + 2, self.hi + 1):
            if not (full[k - 1] @ full[k]).is_zero():
                raise ChainError("d∘d is not zero", degree=k)

    @property
    def hi(self) -> int:
        return self.lo + len(self.ranks) - 1

    @property
    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def rank(self, k: int) -> int:
        if self.lo <= k <= self.hi:
            return self.ranks[k - self.lo]
        return 0

    def d(self, k: int) -> GRMatrix:
        if k in self.diffs:
            return self.diffs[k]
        return GRMatrix.zero(self.group, self.rank(k - 1), self.rank(k))

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * self.rank(k) for k in self.degrees)

    def is_zero(self) -> bool:
        return all(r == 0 for r in self.ranks)

    def total_rank(self) -> int:
        return sum(self.ranks)

    def same_shape(self, other: BasedChainComplex) -> bool:
        span = range(min(self.lo, other.lo), max(self.hi, other.hi) + 1)
        return self.group == other.group and all(self.rank(k) == other.rank(k) for k in span)

    def __str__(self) -> str:
        shape = ", ".join(f"{k}:{self.rank(k)}" for k in self.degrees)
        return f"{self.name or 'C'} over {self.group.label} [{shape}]"


def make_complex(group: GroupSpec, ranks: Mapping[int, int],
                 diffs: Mapping[int, GRMatrix] | None = None, name: str = "") -> BasedChainComplex:
    """Complex from a degree -> rank mapping; missing inner degrees have rank 0."""
    if not ranks:
        return zero_complex(group, name=name)
    lo, hi = min(ranks), max(ranks)
    return BasedChainComplex(group, lo, tuple(ranks.get(k, 0) for k in range(lo, hi + 1)),
                             dict(diffs or {}), name)


def zero_complex(group: GroupSpec, lo: int = 0, name: str = "") -> BasedChainComplex:
    return BasedChainComplex(group, lo, (), {}, name)


def _span(*complexes: BasedChainComplex) -> range:
    live = [c for c in complexes if c.ranks]
    if not live:
        return range(0, 0)
    return range(min(c.lo for c in live), max(c.hi for c in live) + 1)


def _from_span(group: GroupSpec, span: range, rank_of, d_of, name: str = "") -> BasedChainComplex:
    if not len(span):
        return zero_complex(group, name=name)
    ranks = {k: rank_of(k) for k in span}
    return make_complex(group, ranks, {k: d_of(k) for k in span if k - 1 in span}, name)


# ---------------------------------------------------------------------------
# Chain maps and homotopies
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChainMap:
    source: BasedChainComplex
    target: BasedChainComplex
    maps: Mapping[int, GRMatrix] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self) -> None:
        C, D = self.source, self.target
        if C.group != D.group:
            raise GroupError(f"chain map from {C.group.label} to {D.group.label}")
        full = {}
        for k in _span(C, D):
            f = self.maps.get(k)
            if f is None:
                f = GRMatrix.zero(C.group, D.rank(k), C.rank(k))
            if f.shape != (D.rank(k), C.rank(k)):
                raise ChainError(f"f_{k} has shape {f.shape}, expected {(D.rank(k), C.rank(k))}",
                                 degree=k)
            full[k] = f
        object.__setattr__(self, "maps", full)
        for k in _span(C, D):
            if not (self(k - 1) @ C.d(k)) == (D.d(k) @ self(k)):
                raise ChainError("f∘d differs from d∘f", degree=k)

    @property
    def group(self) -> GroupSpec:
        return self.source.group

    def __call__(self, k: int) -> GRMatrix:
        f = self.maps.get(k)
        if f is None:
            return GRMatrix.zero(self.group, self.target.rank(k), self.source.rank(k))
        return f

    def __neg__(self) -> ChainMap:
        return ChainMap(self.source, self.target, {k: -f for k, f in self.maps.items()})

    def __add__(self, other: ChainMap) -> ChainMap:
        return ChainMap(self.source, self.target,
                        {k: self(k) + other(k) for k in _span(self.source, self.target)})

    def __sub__(self, other: ChainMap) -> ChainMap:
        return self + (-other)


@dataclass(frozen=True, eq=False)
class ChainHomotopy:
    """h: f ~ g with f_k - g_k = d_{k+1} h_k + h_{k-1} d_k."""

    f: ChainMap
    g: ChainMap
    h: Mapping[int, GRMatrix] = field(default_factory=dict)

    def __post_init__(self) -> None:
        C, D = self.f.source, self.f.target
        G = C.group
        full = {}
        for k in _span(C, D):
            hk = self.h.get(k)
            if hk is None:
                hk = GRMatrix.zero(G, D.rank(k + 1), C.rank(k))
            if hk.shape != (D.rank(k + 1), C.rank(k)):
                raise ChainError(f"h_{k} has shape {hk.shape}", degree=k)
            full[k] = hk
        object.__setattr__(self, "h", full)
        for k in _span(C, D):
            lhs = self.f(k) - self.g(k)
            rhs = D.d(k + 1) @ self(k) + self(k - 1) @ C.d(k)
            if not lhs == rhs:
                raise ChainError("f - g differs from dh + hd", degree=k)

    def __call__(self, k: int) -> GRMatrix:
        C, D = self.f.source, self.f.target
        hk = self.h.get(k)
        return hk if hk is not None else GRMatrix.zero(C.group, D.rank(k + 1), C.rank(k))


def identity_map(C: BasedChainComplex) -> ChainMap:
    return ChainMap(C, C, {k: GRMatrix.identity(C.group, C.rank(k)) for k in C.degrees})


def zero_map(C: BasedChainComplex, D: BasedChainComplex) -> ChainMap:
    return ChainMap(C, D, {})


def compose(g: ChainMap, f: ChainMap) -> ChainMap:
    """g ∘ f."""
    if f.target is not g.source and not f.target.same_shape(g.source):
        raise ChainError("maps are not composable")
    return ChainMap(f.source, g.target, {k: g(k) @ f(k) for k in _span(f.source, g.target)})


# ---------------------------------------------------------------------------
# Constructions
# ---------------------------------------------------------------------------


def cone(f: ChainMap) -> BasedChainComplex:
    C, D = f.source, f.target
    G = C.group
    span = _span(D, suspension(C))

    def rank(k):
        return D.rank(k) + C.rank(k - 1)

    def d(k):
        return block(G, [
            [D.d(k), f(k - 1)],
            [GRMatrix.zero(G, C.rank(k - 2), D.rank(k)), -C.d(k - 1)],
        ])

    return _from_span(G, span, rank, d, name=f"cone({f.name})" if f.name else "cone")


def suspension(C: BasedChainComplex) -> BasedChainComplex:
    """(ΣC)_k = C_{k-1} with d = -d^C."""
    if not C.ranks:
        return C
    return BasedChainComplex(C.group, C.lo + 1, C.ranks,
                             {k + 1: -d for k, d in C.diffs.items()}, f"Σ{C.name}")


def direct_sum(C: BasedChainComplex, D: BasedChainComplex) -> BasedChainComplex:
    G = C.group
    if D.group != G:
        raise GroupError("direct sum of complexes over different groups")
    return _from_span(G, _span(C, D), lambda k: C.rank(k) + D.rank(k),
                      lambda k: block(G, [[C.d(k), GRMatrix.zero(G, C.rank(k - 1), D.rank(k))],
                                          [GRMatrix.zero(G, D.rank(k - 1), C.rank(k)), D.d(k)]]))


def direct_sum_maps(f: ChainMap, g: ChainMap) -> ChainMap:
    G = f.group
    S, T = direct_sum(f.source, g.source), direct_sum(f.target, g.target)
    return ChainMap(S, T, {
        k: block(G, [[f(k), GRMatrix.zero(G, f.target.rank(k), g.source.rank(k))],
                     [GRMatrix.zero(G, g.target.rank(k), f.source.rank(k)), g(k)]])
        for k in _span(S, T)})


def dual_complex(C: BasedChainComplex, n: int) -> BasedChainComplex:
    """C^{n-*}: degree k is the dual of C_{n-k}."""
    if not C.ranks:
        return zero_complex(C.group)
    ranks = {k: C.rank(n - k) for k in range(n - C.hi, n - C.lo + 1)}
    diffs = {k: C.d(n - k + 1).bar_transpose().scale_left(
        GroupRingElement.constant(C.group, (-1) ** k))
        for k in range(n - C.hi + 1, n - C.lo + 1)}
    return make_complex(C.group, ranks, diffs, name=f"{C.name or 'C'}^({n}-*)")


def dual_map(f: ChainMap, n: int) -> ChainMap:
    """f^{n-*}: D^{n-*} -> C^{n-*}, degree k given by bar_transpose(f_{n-k})."""
    C, D = f.source, f.target
    return ChainMap(dual_complex(D, n), dual_complex(C, n),
                    {k: f(n - k).bar_transpose() for k in _span(dual_complex(C, n),
                                                                 dual_complex(D, n))})


def induce_complex(C: BasedChainComplex, hom: GroupHom) -> BasedChainComplex:
    """Z[H] (x)_{Z[G]} C along hom: G -> H."""
    if hom.source != C.group:
        raise GroupError(f"cannot induce a {C.group.label} complex along a map from "
                         f"{hom.source.label}")
    return BasedChainComplex(hom.target, C.lo, C.ranks,
                             {k: d.map_group(hom) for k, d in C.diffs.items()}, C.name)


def induce_map(f: ChainMap, hom: GroupHom) -> ChainMap:
    return ChainMap(induce_complex(f.source, hom), induce_complex(f.target, hom),
                    {k: m.map_group(hom) for k, m in f.maps.items()}, f.name)


def integral_homology(C: BasedChainComplex) -> dict[int, tuple[int, list[int]]]:
    """H_k(Z (x)_{ZG} C) as (free rank, torsion coefficients) via Smith normal form."""
    aug = {k: [[x.augmentation() for x in row] for row in C.d(k).entries]
           for k in range(C.lo, C.hi + 2)}
    snf = {k: smith_normal_form(m)[1] if m and m[0] else [] for k, m in aug.items()}
    result = {}
    for k in C.degrees:
        rank_out = sum(1 for x in snf[k] if x)
        incoming = [x for x in snf[k + 1] if x]
        free = C.rank(k) - rank_out - len(incoming)
        result[k] = (free, [x for x in incoming if x != 1])
    return result


def rational_rank(A: GRMatrix) -> int:
    """Rank over Q of the augmented matrix."""
    if not A.nrows or not A.ncols:
        return 0
    return Matrix([[x.augmentation() for x in row] for row in A.entries]).rank()


# ---------------------------------------------------------------------------
# Tensor products
# ---------------------------------------------------------------------------


def tensor_basis(C: BasedChainComplex, D: BasedChainComplex,
                 k: int) -> list[tuple[int, int, int]]:
    return [(i, a, b) for i in C.degrees for a in range(C.rank(i))
            for b in range(D.rank(k - i))]


def tensor_product(C: BasedChainComplex, D: BasedChainComplex, P: GroupSpec,
                   i1: GroupHom, i2: GroupHom) -> BasedChainComplex:
    """(C (x) D)_k = sum over i + j = k of C_i (x) D_j, over Z[P]."""
    if i1.source != C.group or i2.source != D.group or i1.target != P or i2.target != P:
        raise GroupError("inclusions do not match the factor groups")
    if not C.ranks or not D.ranks:
        return zero_complex(P)
    span = range(C.lo + D.lo, C.hi + D.hi + 1)
    zero = GroupRingElement.zero(P)
    cache_c = {k: C.d(k).map_group(i1) for k in range(C.lo, C.hi + 2)}
    cache_d = {k: D.d(k).map_group(i2) for k in range(D.lo, D.hi + 2)}

    def d(k):
        src, dst = tensor_basis(C, D, k), tensor_basis(C, D, k - 1)
        index = {e: r for r, e in enumerate(dst)}
        rows = [[zero] * len(src) for _ in dst]
        for col, (i, a, b) in enumerate(src):
            dc = cache_c[i]
            for a2 in range(C.rank(i - 1)):
                x = dc[a2, a]
                if x:
                    rows[index[(i - 1, a2, b)]][col] = rows[index[(i - 1, a2, b)]][col] + x
            dd = cache_d[k - i]
            sign = -1 if i % 2 else 1
            for b2 in range(D.rank(k - i - 1)):
                y = dd[b2, b]
                if y:
                    r = index[(i, a, b2)]
                    rows[r][col] = rows[r][col] + y * sign
        return GRMatrix(P, len(dst), len(src), tuple(map(tuple, rows)))

    return _from_span(P, span, lambda k: len(tensor_basis(C, D, k)), d,
                      name=f"{C.name or 'C'}⊗{D.name or 'D'}")


def tensor_maps(f: ChainMap, g: ChainMap, P: GroupSpec, i1: GroupHom, i2: GroupHom) -> ChainMap:
    """f (x) g between the tensor complexes (no sign: both maps have degree 0)."""
    S = tensor_product(f.source, g.source, P, i1, i2)
    T = tensor_product(f.target, g.target, P, i1, i2)
    zero = GroupRingElement.zero(P)
    fc = {k: f(k).map_group(i1) for k in _span(f.source, f.target)}
    gc = {k: g(k).map_group(i2) for k in _span(g.source, g.target)}
    maps = {}
    for k in _span(S, T):
        src = tensor_basis(f.source, g.source, k)
        dst = tensor_basis(f.target, g.target, k)
        rows = [[zero] * len(src) for _ in dst]
        for r, (i2_, a2, b2) in enumerate(dst):
            for c, (i, a, b) in enumerate(src):
                if i != i2_:
                    continue
                x, y = fc[i][a2, a], gc[k - i][b2, b]
                if x and y:
                    rows[r][c] = x * y
        maps[k] = GRMatrix(P, len(dst), len(src), tuple(map(tuple, rows)))
    return ChainMap(S, T, maps)


# ---------------------------------------------------------------------------
# Subcomplexes, pushouts and gluing
# ---------------------------------------------------------------------------


def _check_prefix(C: BasedChainComplex, sub_ranks: Mapping[int, int]) -> None:
    for k, r in sub_ranks.items():
        if r > C.rank(k):
            raise ChainError(f"prefix of rank {r} exceeds rank {C.rank(k)}", degree=k)
    for k in C.degrees:
        d = C.d(k)
        top, left = sub_ranks.get(k - 1, 0), sub_ranks.get(k, 0)
        for i in range(top, C.rank(k - 1)):
            for j in range(left):
                if d[i, j]:
                    raise ChainError("basis prefix is not preserved by d", degree=k)


def sub_quotient_sequence(C: BasedChainComplex, sub_ranks: Mapping[int, int]
                          ) -> tuple[ChainMap, ChainMap, BasedChainComplex]:
    """(inclusion C' -> C, projection C -> C/C', C/C') for the basis-prefix C'."""
    _check_prefix(C, sub_ranks)
    G = C.group
    sub = _from_span(G, C.degrees, lambda k: sub_ranks.get(k, 0),
                     lambda k: C.d(k).submatrix(range(sub_ranks.get(k - 1, 0)),
                                                range(sub_ranks.get(k, 0))),
                     name=f"{C.name}'")
    quo = _from_span(G, C.degrees, lambda k: C.rank(k) - sub_ranks.get(k, 0),
                     lambda k: C.d(k).submatrix(range(sub_ranks.get(k - 1, 0), C.rank(k - 1)),
                                                range(sub_ranks.get(k, 0), C.rank(k))),
                     name=f"{C.name}/{C.name}'")
    one = GRMatrix.identity(G, max(C.ranks, default=0))
    inc = ChainMap(sub, C, {k: one.submatrix(range(C.rank(k)), range(sub.rank(k)))
                            for k in C.degrees})
    proj = ChainMap(C, quo, {k: one.submatrix(range(sub.rank(k), C.rank(k)), range(C.rank(k)))
                             for k in C.degrees})
    return inc, proj, quo


def prefix_ranks(C: BasedChainComplex) -> dict[int, int]:
    return {k: C.rank(k) for k in C.degrees}


def glue_complexes(X: BasedChainComplex, Y: BasedChainComplex, f: ChainMap,
                   f_inverse: Mapping[int, GRMatrix]) -> BasedChainComplex:
    """X ∪_f Y for a based isomorphism f from the prefix of X onto the prefix of Y.

    The glued basis is X's basis followed by the non-prefix part of Y; Y's
    prefix rows are carried over to X's prefix by f^-1.
    """
    B, B2 = f.source, f.target
    G = X.group
    _check_prefix(X, prefix_ranks(B))
    _check_prefix(Y, prefix_ranks(B2))
    for k in _span(B, B2):
        if not f(k).nrows and not f(k).ncols:
            continue
        inv = f_inverse.get(k)
        if inv is None or not (f(k) @ inv).is_identity() or not (inv @ f(k)).is_identity():
            raise CertificateError(f"gluing map is not invertible in degree {k}")
    for k in range(B.lo + 1, B.hi + 1):
        if X.d(k).submatrix(range(B.rank(k - 1)), range(B.rank(k))) != B.d(k):
            raise ChainError("glued prefix of X does not carry its differential", degree=k)
    for k in range(B2.lo + 1, B2.hi + 1):
        if Y.d(k).submatrix(range(B2.rank(k - 1)), range(B2.rank(k))) != B2.d(k):
            raise ChainError("glued prefix of Y does not carry its differential", degree=k)

    def rank(k):
        return X.rank(k) + Y.rank(k) - B2.rank(k)

    def d(k):
        nb_lo, nb = B2.rank(k - 1), B2.rank(k)
        y_rest = range(nb, Y.rank(k))
        upper = Y.d(k).submatrix(range(nb_lo), y_rest)
        if nb_lo:
            upper = f_inverse[k - 1] @ upper
        pad = GRMatrix.zero(G, X.rank(k - 1) - B.rank(k - 1), len(y_rest))
        lower = Y.d(k).submatrix(range(nb_lo, Y.rank(k - 1)), y_rest)
        return block(G, [
            [X.d(k), block(G, [[upper], [pad]])],
            [GRMatrix.zero(G, Y.rank(k - 1) - nb_lo, X.rank(k)), lower],
        ])

    return _from_span(G, _span(X, Y), rank, d, name=f"{X.name}∪{Y.name}")


def pushout_complex(C1: BasedChainComplex, C2: BasedChainComplex,
                    common: Mapping[int, int]) -> BasedChainComplex:
    """C1 ∪_{C0} C2 where C0 is the same basis prefix of both."""
    G = C1.group
    for k in _span(C1, C2):
        a = C1.d(k).submatrix(range(common.get(k - 1, 0)), range(common.get(k, 0)))
        b = C2.d(k).submatrix(range(common.get(k - 1, 0)), range(common.get(k, 0)))
        if not a == b:
            raise ChainError("the shared prefix carries different differentials", degree=k)
    ident = {k: GRMatrix.identity(G, r) for k, r in common.items()}
    B = _from_span(G, _span(C1, C2), lambda k: common.get(k, 0),
                   lambda k: C1.d(k).submatrix(range(common.get(k - 1, 0)),
                                               range(common.get(k, 0))))
    return glue_complexes(C1, C2, ChainMap(B, B, ident), ident)


def pushout_map(f1: ChainMap, f2: ChainMap, common_source: Mapping[int, int],
                common_target: Mapping[int, int]) -> ChainMap:
    """f1 ∪ f2 on the pushouts, for maps that agree on (and preserve) the shared prefix."""
    for k in _span(f1.source, f1.target):
        a = f1(k).submatrix(range(common_target.get(k, 0)), range(common_source.get(k, 0)))
        b = f2(k).submatrix(range(common_target.get(k, 0)), range(common_source.get(k, 0)))
        if not a == b:
            raise ChainError("maps disagree on the shared prefix", degree=k)
        for f in (f1, f2):
            spill = f(k).submatrix(range(common_target.get(k, 0), f.target.rank(k)),
                                   range(common_source.get(k, 0)))
            if not spill.is_zero():
                raise ChainError("map does not preserve the shared prefix", degree=k)
    S = pushout_complex(f1.source, f2.source, common_source)
    T = pushout_complex(f1.target, f2.target, common_target)
    G = f1.group
    maps = {}
    for k in _span(S, T):
        ns, nt = common_source.get(k, 0), common_target.get(k, 0)
        s1, t1 = f1.source.rank(k), f1.target.rank(k)
        s2, t2 = f2.source.rank(k), f2.target.rank(k)
        top_right = block(G, [[f2(k).submatrix(range(nt), range(ns, s2))],
                              [GRMatrix.zero(G, t1 - nt, s2 - ns)]])
        maps[k] = block(G, [
            [f1(k), top_right],
            [GRMatrix.zero(G, t2 - nt, s1), f2(k).submatrix(range(nt, t2), range(ns, s2))],
        ])
    return ChainMap(S, T, maps)


# ---------------------------------------------------------------------------
# Twisted self-maps and mapping tori
# ---------------------------------------------------------------------------


def twist_complex(C: BasedChainComplex, alpha: GroupHom) -> BasedChainComplex:
    """alpha(C): the same ranks with alpha applied to every differential."""
    return induce_complex(C, alpha)


@dataclass(frozen=True, eq=False)
class SelfEquivalenceWithTwist:
    """(C, v, alpha): v is alpha-semilinear, i.e. a chain map alpha(C) -> C.

    v must be a chain equivalence: a supplied inverse is checked by
    composition, otherwise v is certified degreewise or through tau(v).
    """

    complex: BasedChainComplex
    v: Mapping[int, GRMatrix]
    alpha: GroupHom
    name: str = ""
    inverse: Mapping[int, GRMatrix] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        C = self.complex
        if self.alpha.source != C.group or self.alpha.target != C.group:
            raise GroupError("alpha must be an automorphism of the complex's group")
        maps = {k: self.v[k] if k in self.v else GRMatrix.identity(C.group, C.rank(k))
                for k in C.degrees}
        object.__setattr__(self, "v", maps)
        self._certify(self.as_chain_map())

    def _certify(self, v: ChainMap) -> None:
        C = self.complex
        label = self.name or "v"
        if self.inverse is not None:
            w = ChainMap(C, v.source, self.inverse, f"{label}^-1")
            if not all((v(k) @ w(k)).is_identity() and (w(k) @ v(k)).is_identity()
                       for k in C.degrees):
                raise CertificateError(f"{label}: supplied inverse does not invert v")
            return
        if all(C.rank(k) == 0 or invert(v(k)) is not None for k in C.degrees):
            return
        # src.torsion builds on this module
        from src.torsion import certify_equivalence

        certify_equivalence(v, label)

    def as_chain_map(self) -> ChainMap:
        C = self.complex
        return ChainMap(twist_complex(C, self.alpha), C, self.v, self.name or "v")

    def torus_group(self) -> GroupSpec:
        G = self.complex.group
        return semidirect_group(G, alpha_data(G, self.alpha))


def alpha_data(G: GroupSpec, alpha: GroupHom):
    """alpha as stored by semidirect_group: a residue or the matrix of image columns."""
    if G.kind == CYCLIC:
        return (alpha.images[0][0],)
    if G.kind == FREE_ABELIAN:
        return tuple(tuple(alpha.images[j][i] for j in range(G.rank)) for i in range(G.rank))
    if G.ngens:
        raise GroupError(f"mapping tori over {G.label} are not supported")
    return ()


def mapping_torus(s: SelfEquivalenceWithTwist, group: GroupSpec | None = None
                  ) -> BasedChainComplex:
    """cone(1 - V t) on Z[G x|_alpha Z] (x) C."""
    C = s.complex
    Gamma = group or s.torus_group()
    j = inclusion_hom(C.group, Gamma)
    jC = induce_complex(C, j)
    z = GroupRingElement.monomial(Gamma, C.group.identity() + (1,))
    maps = {k: GRMatrix.identity(Gamma, C.rank(k)) - s.v[k].map_group(j).scale_right(z)
            for k in C.degrees}
    torus = cone(ChainMap(jC, jC, maps, "1-vt"))
    logger.debug("mapping torus of %s over %s: ranks %s", C, Gamma.label, torus.ranks)
    return BasedChainComplex(torus.group, torus.lo, torus.ranks, torus.diffs,
                             f"T({s.name or 'v'})")


def basis_change(C: BasedChainComplex, P: Mapping[int, GRMatrix],
                 P_inverse: Mapping[int, GRMatrix]) -> tuple[BasedChainComplex, ChainMap]:
    """The complex with d'_k = P_{k-1} d_k P_k^-1, and the based map P: C -> C'."""
    G = C.group
    diffs = {k: P.get(k - 1, GRMatrix.identity(G, C.rank(k - 1))) @ C.d(k)
             @ P_inverse.get(k, GRMatrix.identity(G, C.rank(k)))
             for k in range(C.lo + 1, C.hi + 1)}
    D = BasedChainComplex(G, C.lo, C.ranks, diffs, C.name)
    return D, ChainMap(C, D, {k: P.get(k, GRMatrix.identity(G, C.rank(k))) for k in C.degrees})


def concentrated(group: GroupSpec, degree: int, rank: int, name: str = "") -> BasedChainComplex:
    return BasedChainComplex(group, degree, (rank,), {}, name)


