"""Exact matrices over group rings.

Matrices act on column vectors of a right ZG-module, so composing f then g
is the product ``G @ F``. Row operations multiply on the left, column
operations on the right.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from sympy.polys.domains import ZZ

from src.config import REGULAR_ORDER_LIMIT
from src.constants import COMPLETE, STUCK
from src.cyclotomic import field_det, target_one
from src.errors import CertificateError, DimensionError, GroupError
from src.group_ring import GroupRingElement, RingMorphism, apply_morphism, certify_unit
from src.groups import GroupHom, GroupSpec

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# GRMatrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GRMatrix:
    group: GroupSpec
    nrows: int
    ncols: int
    entries: tuple[tuple[GroupRingElement, ...], ...]

    def __post_init__(self) -> None:
        if self.nrows < 0 or self.ncols < 0:
            raise DimensionError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.nrows or any(len(r) != self.ncols for r in self.entries):
            raise DimensionError(f"entries do not form a {self.nrows}x{self.ncols} grid")
        for row in self.entries:
            for x in row:
                if x.group != self.group:
                    raise GroupError(f"entry over {x.group.label} in a {self.group.label} matrix")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_rows(cls, group: GroupSpec, rows: Sequence[Sequence], ncols: int | None = None
                  ) -> GRMatrix:
        """Build from nested lists; ints are read as constants."""
        def lift(x):
            return x if isinstance(x, GroupRingElement) else GroupRingElement.constant(group, x)

        entries = tuple(tuple(lift(x) for x in row) for row in rows)
        if ncols is None:
            ncols = len(entries[0]) if entries else 0
        return cls(group, len(entries), ncols, entries)

    @classmethod
    def zero(cls, group: GroupSpec, nrows: int, ncols: int) -> GRMatrix:
        z = GroupRingElement.zero(group)
        return cls(group, nrows, ncols, tuple((z,) * ncols for _ in range(nrows)))

    @classmethod
    def identity(cls, group: GroupSpec, n: int) -> GRMatrix:
        return cls.diag(group, [GroupRingElement.one(group)] * n)

    @classmethod
    def diag(cls, group: GroupSpec, items: Iterable) -> GRMatrix:
        items = list(items)
        n = len(items)
        rows = [[items[i] if i == j else 0 for j in range(n)] for i in range(n)]
        return cls.from_rows(group, rows, n)

    # -- access -------------------------------------------------------------

    def __getitem__(self, ij: tuple[int, int]) -> GroupRingElement:
        i, j = ij
        return self.entries[i][j]

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def to_lists(self) -> list[list[GroupRingElement]]:
        return [list(r) for r in self.entries]

    def is_zero(self) -> bool:
        return all(not x for row in self.entries for x in row)

    def is_identity(self) -> bool:
        return self.is_square and all(
            x == (1 if i == j else 0)
            for i, row in enumerate(self.entries) for j, x in enumerate(row)
        )

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> GRMatrix:
        return GRMatrix(self.group, len(rows), len(cols),
                        tuple(tuple(self.entries[i][j] for j in cols) for i in rows))

    # -- algebra ------------------------------------------------------------

    def __matmul__(self, other: GRMatrix) -> GRMatrix:
        return matmul(self, other)

    def __add__(self, other: GRMatrix) -> GRMatrix:
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return GRMatrix(self.group, self.nrows, self.ncols, tuple(
            tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def __neg__(self) -> GRMatrix:
        return GRMatrix(self.group, self.nrows, self.ncols,
                        tuple(tuple(-a for a in r) for r in self.entries))

    def __sub__(self, other: GRMatrix) -> GRMatrix:
        return self + (-other)

    def scale_left(self, lam: GroupRingElement) -> GRMatrix:
        return self.map_entries(lambda x: lam * x)

    def scale_right(self, lam: GroupRingElement) -> GRMatrix:
        return self.map_entries(lambda x: x * lam)

    def transpose(self) -> GRMatrix:
        return GRMatrix(self.group, self.ncols, self.nrows,
                        tuple(tuple(self.entries[i][j] for i in range(self.nrows))
                              for j in range(self.ncols)))

    def bar_transpose(self) -> GRMatrix:
        return bar_transpose(self)

    def map_entries(self, fn: Callable[[GroupRingElement], GroupRingElement],
                    group: GroupSpec | None = None) -> GRMatrix:
        return GRMatrix(group or self.group, self.nrows, self.ncols,
                        tuple(tuple(fn(x) for x in r) for r in self.entries))

    def map_group(self, hom: GroupHom) -> GRMatrix:
        """Entrywise image along a group homomorphism."""
        return self.map_entries(lambda x: x.map_group(hom), hom.target)

    def __str__(self) -> str:
        if not self.nrows or not self.ncols:
            return f"[{self.nrows}x{self.ncols}]"
        return "[" + "; ".join(", ".join(str(x) for x in r) for r in self.entries) + "]"


def matmul(A: GRMatrix, B: GRMatrix) -> GRMatrix:
    if A.ncols != B.nrows:
        raise DimensionError(f"cannot multiply {A.shape} by {B.shape}")
    if A.group != B.group:
        raise GroupError(f"{A.group.label} and {B.group.label} matrices do not mix")
    zero = GroupRingElement.zero(A.group)
    cols = list(zip(*B.entries)) if B.nrows else [() for _ in range(B.ncols)]
    rows = []
    for r in A.entries:
        out = []
        for c in cols:
            acc = zero
            for a, b in zip(r, c):
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        rows.append(tuple(out))
    return GRMatrix(A.group, A.nrows, B.ncols, tuple(rows))


def bar_transpose(A: GRMatrix) -> GRMatrix:
    """(A*)[i][j] = bar(A[j][i])."""
    return GRMatrix(A.group, A.ncols, A.nrows,
                    tuple(tuple(A.entries[i][j].bar() for i in range(A.nrows))
                          for j in range(A.ncols)))


def block(group: GroupSpec, grid: Sequence[Sequence[GRMatrix]]) -> GRMatrix:
    """Assemble a block matrix; blocks in a row share nrows, in a column ncols."""
    rows: list[tuple] = []
    ncols = sum(b.ncols for b in grid[0]) if grid else 0
    for blocks in grid:
        heights = {b.nrows for b in blocks}
        if len(heights) > 1:
            raise DimensionError("blocks in one row differ in height")
        h = heights.pop() if heights else 0
        for i in range(h):
            rows.append(tuple(x for b in blocks for x in b.entries[i]))
    return GRMatrix(group, len(rows), ncols, tuple(rows))


def block_diag(group: GroupSpec, *mats: GRMatrix) -> GRMatrix:
    grid = []
    for i, A in enumerate(mats):
        grid.append([A if i == j else GRMatrix.zero(group, A.nrows, B.ncols)
                     for j, B in enumerate(mats)])
    if not grid:
        return GRMatrix.zero(group, 0, 0)
    return block(group, grid)


# ---------------------------------------------------------------------------
# Elementary operations
# ---------------------------------------------------------------------------

ADD_ROW = "add_row"
ADD_COL = "add_col"
SWAP_ROWS = "swap_rows"
SWAP_COLS = "swap_cols"
SCALE_ROW = "scale_row"
EXTRACT_UNIT = "extract_unit"
STABILIZE = "stabilize"
DESTABILIZE = "destabilize"

_ROW_KINDS = (ADD_ROW, SWAP_ROWS, SCALE_ROW, EXTRACT_UNIT)
_COL_KINDS = (ADD_COL, SWAP_COLS)


@dataclass(frozen=True)
class ElementaryOp:
    """One class-preserving move.

    add_row(i, j, f)     row_i += f * row_j
    add_col(i, j, f)     col_j += col_i * f
    swap_rows(i, j)      (row_i, row_j) -> (row_j, -row_i)
    swap_cols(i, j)      (col_i, col_j) -> (col_j, -col_i)
    scale_row(i, f)      row_i = f * row_i, f = +-g
    extract_unit(i, f)   row_i = f^-1 * row_i, f a certified unit
    stabilize            adjoin a trailing 1
    destabilize          drop the trailing 1
    """

    kind: str
    i: int = -1
    j: int = -1
    factor: GroupRingElement | None = None
    inverse: GroupRingElement | None = None

    @property
    def is_row_op(self) -> bool:
        return self.kind in _ROW_KINDS

    @property
    def is_col_op(self) -> bool:
        return self.kind in _COL_KINDS

    def __str__(self) -> str:
        extra = f", {self.factor}" if self.factor is not None else ""
        if self.kind in (STABILIZE, DESTABILIZE):
            return self.kind
        return f"{self.kind}({self.i}, {self.j}{extra})" if self.j >= 0 else \
            f"{self.kind}({self.i}{extra})"


def _apply_op(M: list[list[GroupRingElement]], op: ElementaryOp, group: GroupSpec) -> None:
    """Apply ``op`` to the full square grid ``M`` in place."""
    k = op.kind
    if k == ADD_ROW:
        f = op.factor
        M[op.i] = [a + f * b if b else a for a, b in zip(M[op.i], M[op.j])]
    elif k == ADD_COL:
        f = op.factor
        for row in M:
            if row[op.i]:
                row[op.j] = row[op.j] + row[op.i] * f
    elif k == SWAP_ROWS:
        M[op.i], M[op.j] = M[op.j], [-x for x in M[op.i]]
    elif k == SWAP_COLS:
        for row in M:
            row[op.i], row[op.j] = row[op.j], -row[op.i]
    elif k == SCALE_ROW:
        M[op.i] = [op.factor * x for x in M[op.i]]
    elif k == EXTRACT_UNIT:
        M[op.i] = [op.inverse * x for x in M[op.i]]
    elif k == STABILIZE:
        zero, one = GroupRingElement.zero(group), GroupRingElement.one(group)
        for row in M:
            row.append(zero)
        M.append([zero] * (len(M)) + [one])
    elif k == DESTABILIZE:
        pass
    else:
        raise ValueError(f"unknown elementary op {k!r}")


# ---------------------------------------------------------------------------
# Unit-pivot elimination
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EliminationResult:
    status: str
    residual: GRMatrix
    log: tuple[ElementaryOp, ...]
    units: tuple[GroupRingElement, ...]
    size: int

    @property
    def complete(self) -> bool:
        return self.status == COMPLETE


def _find_pivot(M, m: int, cache: dict, max_order: int):
    for i in range(m):
        for j in range(m):
            unit = M[i][j].trivial_unit() if M[i][j] else None
            if unit is not None:
                sign, g = unit
                G = M[i][j].group
                return i, j, GroupRingElement.monomial(G, G.inverse(g), sign)
    for i in range(m):
        for j in range(m):
            x = M[i][j]
            if not x:
                continue
            if x not in cache:
                cache[x] = certify_unit(x, max_order)
            if cache[x] is not None:
                return i, j, cache[x]
    return None


def unit_pivot_eliminate(A: GRMatrix, max_order: int = REGULAR_ORDER_LIMIT) -> EliminationResult:
    """Reduce a square matrix to the empty matrix by unit pivots.

    Pivots are taken row-major, trivial units before certified ones. Each
    pivot is moved to the bottom-right corner, its column and row are
    cleared, it is normalized to 1 and the matrix is destabilized.
    """
    if not A.is_square:
        raise DimensionError(f"elimination needs a square matrix, got {A.shape}")
    G = A.group
    n = A.nrows
    M = A.to_lists()
    log: list[ElementaryOp] = []
    units: list[GroupRingElement] = []
    cache: dict = {}

    def run(op: ElementaryOp) -> None:
        _apply_op(M, op, G)
        log.append(op)

    m = n
    while m > 0:
        found = _find_pivot(M, m, cache, max_order)
        if found is None:
            break
        i, j, inv = found
        last = m - 1
        logger.debug("pivot %s at (%d, %d), active size %d", M[i][j], i, j, m)
        if i != last:
            run(ElementaryOp(SWAP_ROWS, i, last))
        if j != last:
            run(ElementaryOp(SWAP_COLS, j, last))
        p = M[last][last]
        if i != last and j != last:
            p_inv = inv  # two sign flips cancel
        elif i != last or j != last:
            p_inv = -inv
        else:
            p_inv = inv
        for r in range(last):
            if M[r][last]:
                run(ElementaryOp(ADD_ROW, r, last, -(M[r][last] * p_inv)))
        for c in range(last):
            if M[last][c]:
                run(ElementaryOp(ADD_COL, last, c, -(p_inv * M[last][c])))
        if p.trivial_unit() is not None:
            run(ElementaryOp(SCALE_ROW, last, -1, p_inv))
        else:
            run(ElementaryOp(EXTRACT_UNIT, last, -1, p, p_inv))
            units.append(p)
        run(ElementaryOp(DESTABILIZE))
        m -= 1

    residual = GRMatrix(G, m, m, tuple(tuple(M[r][:m]) for r in range(m)))
    status = COMPLETE if m == 0 else STUCK
    if status == STUCK:
        logger.warning("elimination stuck with a %dx%d residual over %s", m, m, G.label)
    return EliminationResult(status, residual, tuple(log), tuple(units), n)


def replay(A: GRMatrix, log: Iterable[ElementaryOp]) -> GRMatrix:
    """Re-run an op log on ``A``; returns the active block it ends on."""
    M = A.to_lists()
    m = A.nrows
    for op in log:
        _apply_op(M, op, A.group)
        if op.kind == DESTABILIZE:
            m -= 1
        elif op.kind == STABILIZE:
            m += 1
    return GRMatrix(A.group, m, m, tuple(tuple(M[r][:m]) for r in range(m)))


def assemble_inverse(A: GRMatrix, result: EliminationResult) -> GRMatrix:
    """The two-sided inverse R·L certified by a complete elimination."""
    if not result.complete:
        raise CertificateError("only a complete elimination certifies an inverse")
    G = A.group
    n = A.nrows
    L = GRMatrix.identity(G, n).to_lists()
    R = GRMatrix.identity(G, n).to_lists()
    for op in result.log:
        if op.is_row_op:
            _apply_op(L, op, G)
        elif op.is_col_op:
            _apply_op(R, op, G)
        elif op.kind == STABILIZE:
            raise CertificateError("stabilized logs do not assemble inverses")
    inverse = GRMatrix(G, n, n, tuple(map(tuple, R))) @ GRMatrix(G, n, n, tuple(map(tuple, L)))
    if not (A @ inverse).is_identity() or not (inverse @ A).is_identity():
        raise CertificateError("assembled inverse does not invert the matrix")
    return inverse


def invert(A: GRMatrix) -> GRMatrix | None:
    """Certified inverse, or None when elimination gets stuck."""
    result = unit_pivot_eliminate(A)
    return assemble_inverse(A, result) if result.complete else None


# ---------------------------------------------------------------------------
# Determinants over commutative targets
# ---------------------------------------------------------------------------


def det_over_target(A: GRMatrix, m: RingMorphism):
    if not A.is_square:
        raise DimensionError(f"determinant needs a square matrix, got {A.shape}")
    rows = [[apply_morphism(x, m) for x in r] for r in A.entries]
    return field_det(rows, target_one(m.target, m.order))


# ---------------------------------------------------------------------------
# Smith normal form over Z
# ---------------------------------------------------------------------------


def _add_rows(m, i, j, a, b, c, d) -> None:
    # m[i] <- a*m[i] + b*m[j],  m[j] <- c*m[i] + d*m[j]
    for k in range(len(m[0]) if m else 0):
        e = m[i][k]
        m[i][k] = a * e + b * m[j][k]
        m[j][k] = c * e + d * m[j][k]


def _add_columns(m, i, j, a, b, c, d) -> None:
    for row in m:
        e = row[i]
        row[i] = a * e + b * row[j]
        row[j] = c * e + d * row[j]


def _gcdex(a: int, b: int) -> tuple[int, int, int]:
    x, y, g = ZZ.gcdex(ZZ(a), ZZ(b))
    return int(x), int(y), int(g)


def smith_normal_form(matrix: Sequence[Sequence[int]]
                      ) -> tuple[list[list[int]], list[int], list[list[int]]]:
    """(S, diagonal, T) with S·A·T = diag and each entry dividing the next."""
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    m = [[int(x) for x in r] for r in matrix]
    s = [[int(i == j) for j in range(rows)] for i in range(rows)]
    t = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def clear_column(k: int) -> None:
        for j in range(k + 1, rows):
            pivot, e = m[k][k], m[j][k]
            if e == 0:
                continue
            if e % pivot == 0:
                q = e // pivot
                _add_rows(m, k, j, 1, 0, -q, 1)
                _add_rows(s, k, j, 1, 0, -q, 1)
            else:
                a, b, g = _gcdex(pivot, e)
                _add_rows(m, k, j, a, b, e // g, -(pivot // g))
                _add_rows(s, k, j, a, b, e // g, -(pivot // g))

    def clear_row(k: int) -> None:
        for j in range(k + 1, cols):
            pivot, e = m[k][k], m[k][j]
            if e == 0:
                continue
            if e % pivot == 0:
                q = e // pivot
                _add_columns(m, k, j, 1, 0, -q, 1)
                _add_columns(t, k, j, 1, 0, -q, 1)
            else:
                a, b, g = _gcdex(pivot, e)
                _add_columns(m, k, j, a, b, e // g, -(pivot // g))
                _add_columns(t, k, j, a, b, e // g, -(pivot // g))

    for k in range(min(rows, cols)):
        while True:
            nonzero = [(abs(m[i][j]), i, j) for i in range(k, rows) for j in range(k, cols)
                       if m[i][j]]
            if not nonzero:
                break
            _, pi, pj = min(nonzero)
            m[k], m[pi] = m[pi], m[k]
            s[k], s[pi] = s[pi], s[k]
            for mat in (m, t):
                for row in mat:
                    row[k], row[pj] = row[pj], row[k]
            while any(m[i][k] for i in range(k + 1, rows)) or \
                    any(m[k][j] for j in range(k + 1, cols)):
                clear_column(k)
                clear_row(k)
            bad = next((i for i in range(k + 1, rows) for j in range(k + 1, cols)
                        if m[i][j] % m[k][k]), None)
            if bad is None:
                break
            _add_rows(m, k, bad, 1, 1, 0, 1)
            _add_rows(s, k, bad, 1, 1, 0, 1)
        if m[k][k] < 0:
            m[k] = [-x for x in m[k]]
            s[k] = [-x for x in s[k]]
    diagonal = [m[k][k] for k in range(min(rows, cols))]
    return s, diagonal, t
