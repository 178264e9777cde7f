"""Model documents: YAML text describing a group, complexes, maps and tasks.

Example::

    group: {kind: cyclic, order: 5}
    complexes:
      C: {ranks: [1, 1], d: {1: [["t - 1"]]}}
      L: "lens(5; 1,1)"
    maps:
      f: {source: C, target: C, matrices: {0: [["t + t^4 - 1"]], 1: [["t + t^4 - 1"]]}}
    tasks:
      - {op: torsion, map: f, expect: trivial}

Element literals read ``3*t^2 - g*t^-1 + 1`` with the generator names of the
group section. Built-in pairs are written ``sphere(2)``, ``lens(5; 1,2)``,
``disc(3)``, ``torus`` or ``A x B`` for products.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from math import gcd
from pathlib import Path
from typing import Any

import yaml

from src.chains import (
    BasedChainComplex,
    ChainMap,
    SelfEquivalenceWithTwist,
    basis_change,
    dual_complex,
    identity_map,
    make_complex,
    mapping_torus,
    sub_quotient_sequence,
)
from src.constants import SUBCOMMANDS
from src.errors import DocumentError, TorsionError
from src.fibering import HCobordismAlgebraic, S1FiberingModel
from src.group_ring import GroupRingElement
from src.groups import (
    CYCLIC,
    FREE_ABELIAN,
    SEMIDIRECT,
    TRIVIAL,
    GroupHom,
    GroupSpec,
    automorphism_hom,
    identity_hom,
    power_hom,
    semidirect_group,
)
from src.linalg import GRMatrix
from src.poincare import PoincarePairData, disc, lens, product, sphere, torus_surface
from src.whitehead import torsion_from_units

logger = logging.getLogger(__name__)

TASK_OPS = tuple(op for op in SUBCOMMANDS if op != "verify")

_FACTOR = re.compile(r"^([A-Za-z_][\w']*)(?:\^(-?\d+))?$")
_BUILTIN = re.compile(r"^\s*(\w+)\s*(?:\((.*)\))?\s*$")


# ---------------------------------------------------------------------------
# Located YAML
# ---------------------------------------------------------------------------


class _Marked(dict):
    """A mapping that remembers where each key was written (1-based)."""

    where: tuple[int, int] = (1, 1)
    marks: dict = {}


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader: _Loader, node: yaml.MappingNode) -> _Marked:
    data = _Marked(loader.construct_mapping(node, deep=True))
    data.where = (node.start_mark.line + 1, node.start_mark.column + 1)
    data.marks = {}
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=True)
        data.marks[key] = (key_node.start_mark.line + 1, key_node.start_mark.column + 1)
    return data


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def _at(owner: Any, key: Any = None) -> dict[str, int | None]:
    if isinstance(owner, _Marked):
        line, column = owner.marks.get(key, owner.where) if key is not None else owner.where
        return {"line": line, "column": column}
    return {"line": None, "column": None}


def _fail(message: str, owner: Any = None, key: Any = None, kind: str = "syntax"):
    raise DocumentError(message, kind=kind, **_at(owner, key))


# ---------------------------------------------------------------------------
# Element literals
# ---------------------------------------------------------------------------


def parse_element(text: str | int, G: GroupSpec) -> GroupRingElement:
    """``3*t^2 - 1*g*t^-1 + 1`` over Z[G]; raises ValueError on bad syntax."""
    if isinstance(text, bool):
        raise ValueError("booleans are not ring elements")
    if isinstance(text, int):
        return GroupRingElement.constant(G, text)
    s = str(text).replace(" ", "")
    if not s:
        raise ValueError("empty element")
    index = {name: i for i, name in enumerate(G.names)}
    result = GroupRingElement.zero(G)
    for term in re.split(r"(?<!\^)(?=[+-])", s):
        if not term:
            continue
        sign = -1 if term[0] == "-" else 1
        body = term.lstrip("+-")
        if not body or len(term) - len(body) > 1:
            raise ValueError(f"malformed term {term!r}")
        coeff, g = sign, G.identity()
        for factor in body.split("*"):
            if factor.isdigit():
                coeff *= int(factor)
                continue
            m = _FACTOR.match(factor)
            if m is None:
                raise ValueError(f"malformed factor {factor!r}")
            name, exp = m.group(1), int(m.group(2) or 1)
            if name not in index:
                raise ValueError(f"unknown generator {name!r} (declared: {', '.join(G.names)})")
            g = G.mul(g, G.power(G.generator(index[name]), exp))
        result = result + GroupRingElement.monomial(G, g, coeff)
    return result


def parse_matrix(rows: Any, G: GroupSpec, owner: Any = None, key: Any = None,
                 shape: tuple[int, int] | None = None) -> GRMatrix:
    if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
        _fail("a matrix is a list of rows", owner, key)
    try:
        entries = [[parse_element(x, G) for x in row] for row in rows]
    except ValueError as e:
        _fail(str(e), owner, key)
    ncols = shape[1] if shape is not None and not entries else None
    if len({len(r) for r in entries}) > 1:
        _fail("matrix rows have different lengths", owner, key)
    M = GRMatrix.from_rows(G, entries, ncols)
    if shape is not None and M.shape != shape:
        _fail(f"matrix has shape {M.shape}, expected {shape}", owner, key, "invariant")
    return M


# ---------------------------------------------------------------------------
# Groups
# ---------------------------------------------------------------------------


def parse_group(spec: Any) -> GroupSpec:
    if spec is None:
        return GroupSpec(TRIVIAL)
    if not isinstance(spec, dict):
        _fail("group must be a mapping")
    kind = spec.get("kind", TRIVIAL)
    try:
        if kind == SEMIDIRECT:
            base = parse_group(spec.get("base"))
            names = None
            if "z" in spec:
                names = str(spec["z"])
            return semidirect_group(base, spec.get("alpha", ()), int(spec.get("w_z", 1)), names)
        names = tuple(spec.get("names", ()))
        w = tuple(spec.get("w", ()))
        return GroupSpec(kind, order=int(spec.get("order", 0)), rank=int(spec.get("rank", 0)),
                         w=w, names=names)
    except TorsionError as e:
        _fail(str(e), spec, kind="invariant")


def parse_automorphism(value: Any, G: GroupSpec, owner: Any, key: Any) -> GroupHom:
    """An integer k (t -> t^k) on cyclic groups, an integer matrix on free abelian ones."""
    if value is None:
        return identity_hom(G)
    try:
        if G.kind == CYCLIC:
            if gcd(int(value), G.order) != 1:
                raise ValueError(f"t -> t^{value} is not invertible on {G.label}")
            return power_hom(G, int(value))
        if G.kind == FREE_ABELIAN:
            return automorphism_hom(G, tuple(tuple(int(x) for x in row) for row in value))
    except (TorsionError, TypeError, ValueError) as e:
        _fail(f"bad automorphism: {e}", owner, key, "invariant")
    _fail(f"automorphisms of {G.label} cannot be written here", owner, key)


# ---------------------------------------------------------------------------
# Built-ins
# ---------------------------------------------------------------------------


def _ints(text: str) -> list[int]:
    return [int(x) for x in re.split(r"[,\s]+", text.strip()) if x]


def resolve_builtin(ref: str) -> PoincarePairData:
    """``sphere(n)``, ``disc(n)``, ``lens(n; r1, ..., rk)``, ``torus``, ``A x B``."""
    parts = [p for p in re.split(r"\s+x\s+", ref.strip()) if p]
    if len(parts) > 1:
        pair = resolve_builtin(parts[0])
        for part in parts[1:]:
            pair = product(pair, resolve_builtin(part))
        return pair
    m = _BUILTIN.match(ref)
    if m is None:
        raise ValueError(f"unrecognized built-in {ref!r}")
    name, args = m.group(1), m.group(2) or ""
    if name == "sphere":
        return sphere(*_ints(args))
    if name == "disc":
        return disc(*_ints(args))
    if name == "torus":
        return torus_surface()
    if name == "lens":
        order, _, rest = args.partition(";")
        return lens(int(order), _ints(rest))
    raise ValueError(f"unknown built-in family {name!r}")


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DocumentTask:
    op: str
    args: dict[str, Any]
    name: str
    line: int | None = None


@dataclass
class ModelDocument:
    group: GroupSpec
    complexes: dict[str, BasedChainComplex] = field(default_factory=dict)
    maps: dict[str, ChainMap] = field(default_factory=dict)
    inverses: dict[str, ChainMap] = field(default_factory=dict)
    pairs: dict[str, PoincarePairData] = field(default_factory=dict)
    hcobordisms: dict[str, HCobordismAlgebraic] = field(default_factory=dict)
    s1_models: dict[str, S1FiberingModel] = field(default_factory=dict)
    tasks: list[DocumentTask] = field(default_factory=list)
    text: str = ""


def _section(raw: dict, key: str) -> dict:
    value = raw.get(key) or {}
    if not isinstance(value, dict):
        _fail(f"section '{key}' must be a mapping", raw, key)
    return value


def _degree_matrices(spec: Any, G: GroupSpec, owner: Any, key: Any) -> dict[int, GRMatrix]:
    if not isinstance(spec, dict):
        _fail("expected a degree -> matrix mapping", owner, key)
    out = {}
    for k, rows in spec.items():
        if not isinstance(k, int):
            _fail(f"degree {k!r} is not an integer", spec, k)
        out[k] = parse_matrix(rows, G, spec, k)
    return out


def _lookup(table: dict, name: Any, what: str, owner: Any, key: Any):
    if name not in table:
        _fail(f"unknown {what} {name!r}", owner, key, "reference")
    return table[name]


def _checked(build, owner: Any, key: Any):
    """Run a constructor; engine errors become invariant violations at ``key``."""
    try:
        return build()
    except TorsionError as e:
        _fail(str(e), owner, key, "invariant")
    except (TypeError, ValueError) as e:
        _fail(str(e), owner, key)


def _parse_complex(name: str, spec: Any, G: GroupSpec, owner: dict) -> BasedChainComplex:
    if isinstance(spec, str):
        return _checked(lambda: resolve_builtin(spec).complex, owner, name)
    if not isinstance(spec, dict) or "ranks" not in spec:
        _fail(f"complex {name!r} needs 'ranks'", owner, name)
    lo = int(spec.get("lo", 0))
    ranks = {lo + i: int(r) for i, r in enumerate(spec["ranks"])}
    diffs = _degree_matrices(spec.get("d", {}), G, spec, "d")
    return _checked(lambda: make_complex(G, ranks, diffs, name), owner, name)


def _parse_map(name: str, spec: Any, doc: ModelDocument, owner: dict) -> None:
    if not isinstance(spec, dict):
        _fail(f"map {name!r} must be a mapping", owner, name)
    source = _lookup(doc.complexes, spec.get("source"), "complex", spec, "source")
    target = _lookup(doc.complexes, spec.get("target"), "complex", spec, "target")
    G = source.group
    maps = _degree_matrices(spec.get("matrices", {}), G, spec, "matrices")
    doc.maps[name] = _checked(lambda: ChainMap(source, target, maps, name), owner, name)
    if "inverse" in spec:
        inv = _degree_matrices(spec["inverse"], G, spec, "inverse")
        doc.inverses[name] = _checked(lambda: ChainMap(target, source, inv, f"{name}^-1"),
                                      spec, "inverse")
        f, g = doc.maps[name], doc.inverses[name]
        if not all((f(k) @ g(k)).is_identity() and (g(k) @ f(k)).is_identity() for k in f.maps):
            _fail(f"inverse of {name!r} does not invert it", spec, "inverse", "invariant")


def _parse_pair(name: str, spec: Any, doc: ModelDocument, owner: dict) -> PoincarePairData:
    if isinstance(spec, str):
        return _checked(lambda: resolve_builtin(spec), owner, name)
    if not isinstance(spec, dict):
        _fail(f"pair {name!r} must be a mapping or a built-in", owner, name)
    C = _lookup(doc.complexes, spec.get("complex"), "complex", spec, "complex")
    if "n" not in spec:
        _fail(f"pair {name!r} needs its dimension 'n'", owner, name)
    n = int(spec["n"])
    cap = _degree_matrices(spec.get("cap", {}), C.group, spec, "cap")
    boundary = {int(k): int(v) for k, v in (spec.get("boundary") or {}).items()}

    def build():
        _, _, quotient = sub_quotient_sequence(C, boundary)
        f = ChainMap(dual_complex(C, n), quotient, cap, "cap")
        return PoincarePairData(C, n, f, boundary, name=name)

    return _checked(build, owner, name)


def _parse_hcobordism(name: str, spec: Any, G: GroupSpec, owner: dict) -> HCobordismAlgebraic:
    if not isinstance(spec, dict) or "tau" not in spec:
        _fail(f"h-cobordism {name!r} needs 'tau'", owner, name)
    A = parse_matrix(spec["tau"], G, spec, "tau")
    inv = parse_matrix(spec["tau_inverse"], G, spec, "tau_inverse") \
        if "tau_inverse" in spec else None
    if A.nrows == 1 and A.ncols == 1 and inv is None:
        tau = _checked(lambda: torsion_from_units([A[0, 0]]), spec, "tau")
    else:
        tau = _checked(lambda: torsion_from_units(A, inv), spec, "tau")
    phi = parse_automorphism(spec.get("phi"), G, spec, "phi")
    return _checked(lambda: HCobordismAlgebraic(tau, phi, int(spec.get("dim", 5))), owner, name)


def _parse_s1(name: str, spec: Any, doc: ModelDocument, owner: dict) -> S1FiberingModel:
    if not isinstance(spec, dict):
        _fail(f"model {name!r} must be a mapping", owner, name)
    C = _lookup(doc.complexes, spec.get("complex"), "complex", spec, "complex")
    G = C.group
    alpha = parse_automorphism(spec.get("alpha"), G, spec, "alpha")
    v = _degree_matrices(spec.get("v", {}), G, spec, "v")
    v_inv = _degree_matrices(spec["v_inverse"], G, spec, "v_inverse") \
        if "v_inverse" in spec else None
    twist = _checked(lambda: SelfEquivalenceWithTwist(C, v, alpha, "v", v_inv), spec, "v")
    T = _checked(lambda: mapping_torus(twist), owner, name)
    comparison = spec.get("comparison")
    if comparison is None:
        e = identity_map(T)
    else:
        Gamma = T.group
        P = _degree_matrices(comparison.get("matrices", {}), Gamma, comparison, "matrices")
        P_inv = _degree_matrices(comparison.get("inverse", {}), Gamma, comparison, "inverse")
        for k in P:
            if k not in P_inv or not (P[k] @ P_inv[k]).is_identity():
                _fail(f"comparison is not invertible in degree {k}", comparison, "inverse",
                      "invariant")
        _, e = _checked(lambda: basis_change(T, P, P_inv), comparison, "matrices")
    return _checked(lambda: S1FiberingModel(twist, e, name), owner, name)


def _parse_tasks(raw: Any, doc: ModelDocument, owner: dict) -> list[DocumentTask]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        _fail("tasks must be a list", owner, "tasks")
    tables = {"map": doc.maps, "pair": doc.pairs, "hcobordism": doc.hcobordisms,
              "model": doc.s1_models}
    tasks = []
    for i, spec in enumerate(raw):
        if not isinstance(spec, dict) or spec.get("op") not in TASK_OPS:
            _fail(f"task {i} needs op in {', '.join(TASK_OPS)}", spec if isinstance(spec, dict)
                  else owner, "op" if isinstance(spec, dict) else "tasks")
        for key, table in tables.items():
            if key in spec:
                _lookup(table, spec[key], key, spec, key)
        name = str(spec.get("name") or f"{spec['op']} #{i}")
        tasks.append(DocumentTask(spec["op"], dict(spec), name, _at(spec)["line"]))
    return tasks


def parse_document(text: str) -> ModelDocument:
    """Parse and validate a model document; DocumentError carries line and column."""
    try:
        raw = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        column = mark.column + 1 if mark is not None else None
        raise DocumentError(f"YAML: {getattr(e, 'problem', e)}", line=line,
                            column=column) from e
    if raw is None:
        raw = _Marked()
    if not isinstance(raw, dict):
        _fail("a document is a mapping of sections")
    G = parse_group(raw.get("group"))
    doc = ModelDocument(G, text=text)
    complexes = _section(raw, "complexes")
    for name, spec in complexes.items():
        doc.complexes[name] = _parse_complex(name, spec, G, complexes)
    maps = _section(raw, "maps")
    for name, spec in maps.items():
        _parse_map(name, spec, doc, maps)
    pairs = _section(raw, "pairs")
    for name, spec in pairs.items():
        doc.pairs[name] = _parse_pair(name, spec, doc, pairs)
    hcobordisms = _section(raw, "hcobordisms")
    for name, spec in hcobordisms.items():
        doc.hcobordisms[name] = _parse_hcobordism(name, spec, G, hcobordisms)
    models = _section(raw, "s1")
    for name, spec in models.items():
        doc.s1_models[name] = _parse_s1(name, spec, doc, models)
    doc.tasks = _parse_tasks(raw.get("tasks"), doc, raw)
    logger.info("Parsed document: %d complexes, %d maps, %d pairs, %d tasks",
                len(doc.complexes), len(doc.maps), len(doc.pairs), len(doc.tasks))
    return doc


def load_document(path: Path) -> ModelDocument:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e}") from e
    return parse_document(text)
