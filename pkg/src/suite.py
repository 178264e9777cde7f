"""Randomized instances, built-in checks and the task runner behind every subcommand.

Instances are drawn from an explicit ``random.Random(seed)`` before any task
runs, so the task list (and therefore the report) depends on the seed only.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from src.chains import (
    BasedChainComplex,
    ChainMap,
    basis_change,
    cone,
    direct_sum,
    direct_sum_maps,
    identity_map,
    make_complex,
    mapping_torus,
)
from src.constants import (
    FAIL,
    LEVEL_CLASS,
    NONTRIVIAL,
    PASS,
    TRIVIAL,
    UNKNOWN,
)
from src.document import DocumentTask, ModelDocument
from src.errors import CertificateError, DocumentError, TorsionError
from src.fibering import (
    HCobordismAlgebraic,
    S1FiberingModel,
    bundle_model,
    check_composite_formula,
    check_reversal,
    farrell_bridge,
    glue_hcobordism,
    s1_invariants,
    transfer_product,
    twist_from_units,
)
from src.group_ring import GroupRingElement
from src.groups import (
    CYCLIC,
    GroupHom,
    GroupSpec,
    cyclic_group,
    identity_hom,
    power_hom,
    product_group,
    trivial_group,
)
from src.linalg import GRMatrix
from src.poincare import (
    PoincarePairData,
    builtin_manifolds,
    check_gluing,
    check_homotopy_invariance,
    check_involution_identity,
    check_product,
    check_tate_invariance,
    disc,
    disc_double,
    lens,
    lens_equivalence,
    rho_class,
    rho_hat,
    sphere,
    synthetic,
)
from src.torsion import (
    check_composition_formula,
    check_product_formula,
    check_sum_formula,
    check_trivial,
    check_witness_independence,
    whitehead_torsion,
)
from src.whitehead import (
    TateVerdict,
    Verdict,
    check_equal,
    check_vanishing,
    classify,
    torsion_from_units,
    trivial_class,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Tasks
# ---------------------------------------------------------------------------


@dataclass
class TaskResult:
    verdicts: list[Verdict] = field(default_factory=list)
    payload: dict[str, Any] = field(default_factory=dict)
    stuck: bool = False


@dataclass(frozen=True)
class SuiteTask:
    name: str
    section: str
    run: Callable[[], TaskResult]
    # strict tasks need decisive passes, others may end unknown
    strict: bool = True


@dataclass
class TaskOutcome:
    name: str
    section: str
    verdicts: list[Verdict]
    payload: dict[str, Any]
    stuck: bool = False
    strict: bool = True
    error: str | None = None
    error_kind: str | None = None
    elapsed: float = 0.0

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        statuses = {v.status for v in self.verdicts}
        if FAIL in statuses:
            return FAIL
        if UNKNOWN in statuses:
            return UNKNOWN
        return PASS

    @property
    def ok(self) -> bool:
        """Counts as success for the exit code."""
        return self.status == PASS or (self.status == UNKNOWN and not self.strict)


def error_kind(e: TorsionError) -> str:
    """Class name, with the document error kind appended ('DocumentError:invariant')."""
    name = type(e).__name__
    return f"{name}:{e.kind}" if isinstance(e, DocumentError) else name


def execute(task: SuiteTask) -> TaskOutcome:
    """Run one task; engine errors become part of the outcome."""
    start = time.perf_counter()
    logger.info("Task '%s' started", task.name)
    try:
        result = task.run()
    except TorsionError as e:
        logger.exception("Task '%s' failed", task.name)
        return TaskOutcome(task.name, task.section, [], {}, strict=task.strict,
                           error=str(e), error_kind=error_kind(e),
                           elapsed=time.perf_counter() - start)
    outcome = TaskOutcome(task.name, task.section, result.verdicts, result.payload,
                          result.stuck, task.strict, elapsed=time.perf_counter() - start)
    for v in result.verdicts:
        if v.status == UNKNOWN:
            logger.warning("Task '%s': %s undecided", task.name, v.identity)
    logger.info("Task '%s' finished: %s (%.2fs)", task.name, outcome.status, outcome.elapsed)
    return outcome


def tate_verdict(tv: TateVerdict, identity: str = "rho-hat vanishes") -> Verdict:
    status = {TRIVIAL: PASS, NONTRIVIAL: FAIL}.get(tv.state, UNKNOWN)
    return Verdict(identity, status, LEVEL_CLASS, tv.certificate)


def invariant_payload(x) -> list[str]:
    return [str(i) for i in x.invariants]


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


def parse_group_label(label: str) -> GroupSpec:
    """'trivial' or 'cyclic n' as written in config/engine.yaml."""
    parts = label.split()
    if parts == ["trivial"]:
        return trivial_group()
    if len(parts) == 2 and parts[0] == "cyclic":
        return cyclic_group(int(parts[1]))
    raise ValueError(f"unknown group label {label!r}")


def golden_unit(G: GroupSpec) -> tuple[GroupRingElement, GroupRingElement]:
    """u = t + t^4 - 1 and its inverse t^2 + t^3 - 1 over Z[C5]."""
    if G.order != 5:
        raise ValueError("the golden unit lives over C5")
    u = GroupRingElement(G, [((1,), 1), ((4,), 1), ((0,), -1)])
    u_inv = GroupRingElement(G, [((2,), 1), ((3,), 1), ((0,), -1)])
    return u, u_inv


def _pool(G: GroupSpec) -> list:
    pool = [G.identity()]
    for i in range(G.ngens):
        g = G.generator(i)
        pool += [g, G.inverse(g)]
    return pool


def _units(G: GroupSpec, nontrivial: bool) -> list[tuple[GroupRingElement, GroupRingElement]]:
    units = []
    for g in _pool(G):
        for c in (1, -1):
            units.append((GroupRingElement.monomial(G, g, c),
                          GroupRingElement.monomial(G, G.inverse(g), c)))
    if nontrivial and G.kind == CYCLIC and G.order == 5:
        units.append(golden_unit(G))
    return units


def _random_element(rng: random.Random, G: GroupSpec) -> GroupRingElement:
    pool = _pool(G)
    return GroupRingElement(G, [(rng.choice(pool), rng.choice((1, -1, 2)))
                                for _ in range(rng.randint(1, 2))])


def _single(G: GroupSpec, n: int, i: int, j: int, x: GroupRingElement) -> GRMatrix:
    return GRMatrix.from_rows(G, [[x if (r, c) == (i, j) else 0 for c in range(n)]
                                  for r in range(n)], n)


def random_invertible(rng: random.Random, G: GroupSpec, n: int, ops: int,
                      nontrivial: bool = True) -> tuple[GRMatrix, GRMatrix]:
    """A product of transvections and unit scalings, with its inverse."""
    M = Minv = GRMatrix.identity(G, n)
    if n == 0:
        return M, Minv
    units = _units(G, nontrivial)
    one = GRMatrix.identity(G, n)
    for _ in range(ops):
        if n >= 2 and rng.random() < 0.6:
            i, j = rng.sample(range(n), 2)
            lam = _random_element(rng, G)
            E, E_inv = one + _single(G, n, i, j, lam), one - _single(G, n, i, j, lam)
        else:
            i = rng.randrange(n)
            u, u_inv = rng.choice(units)
            E = one + _single(G, n, i, i, u - 1)
            E_inv = one + _single(G, n, i, i, u_inv - 1)
        M, Minv = E @ M, Minv @ E_inv
    return M, Minv


def rebase(rng: random.Random, C: BasedChainComplex, ops: int,
           nontrivial: bool = True) -> ChainMap:
    """A based isomorphism C -> C' by random basis changes in every degree."""
    P, P_inv = {}, {}
    for k in C.degrees:
        P[k], P_inv[k] = random_invertible(rng, C.group, C.rank(k), ops, nontrivial)
    _, f = basis_change(C, P, P_inv)
    return f


def random_acyclic(rng: random.Random, G: GroupSpec, cfg: dict) -> BasedChainComplex:
    """cone(id) on a zero-differential complex, then rebased by elementary matrices."""
    bounds = cfg["random"]
    top = rng.randint(1, bounds["max_degree"])
    half = min(2, bounds["max_rank"] // 2)
    ranks = {k: rng.randint(0, half) for k in range(top)}
    if not any(ranks.values()):
        ranks[rng.randrange(top)] = 1
    C = cone(identity_map(make_complex(G, ranks, name="A")))
    return rebase(rng, C, bounds["ops_per_matrix"], nontrivial=False).target


def random_complex(rng: random.Random, G: GroupSpec, cfg: dict,
                   small: bool = False) -> BasedChainComplex:
    """A zero-differential part plus an acyclic part, mixed by a basis change."""
    if small:
        free = make_complex(G, {0: rng.randint(0, 1), 1: rng.randint(0, 1)})
        acyclic = cone(identity_map(make_complex(G, {0: 1})))
    else:
        free = make_complex(G, {k: rng.randint(0, 1) for k in range(cfg["random"]["max_degree"])})
        acyclic = random_acyclic(rng, G, cfg)
    C = direct_sum(free, acyclic)
    return rebase(rng, C, cfg["random"]["ops_per_matrix"], nontrivial=False).target


def random_equivalence(rng: random.Random, G: GroupSpec, cfg: dict,
                       small: bool = False) -> ChainMap:
    C = random_complex(rng, G, cfg, small)
    return rebase(rng, C, cfg["random"]["ops_per_matrix"])


def random_composable_pair(rng: random.Random, G: GroupSpec,
                           cfg: dict) -> tuple[ChainMap, ChainMap]:
    f = random_equivalence(rng, G, cfg)
    g = rebase(rng, f.target, cfg["random"]["ops_per_matrix"])
    return f, g


def random_sum_square(rng: random.Random, G: GroupSpec, cfg: dict
                      ) -> tuple[ChainMap, ChainMap, dict[int, int], dict[int, int]]:
    """f1 = fA ⊕ f1', f2 = fA ⊕ f2' agreeing on the shared summand A."""
    ops = cfg["random"]["ops_per_matrix"]
    fA = rebase(rng, random_complex(rng, G, cfg, small=True), ops)
    f1 = direct_sum_maps(fA, rebase(rng, random_complex(rng, G, cfg, small=True), ops))
    f2 = direct_sum_maps(fA, rebase(rng, random_complex(rng, G, cfg, small=True), ops))
    common_source = {k: fA.source.rank(k) for k in fA.source.degrees}
    common_target = {k: fA.target.rank(k) for k in fA.target.degrees}
    return f1, f2, common_source, common_target


def _random_group(rng: random.Random, cfg: dict) -> GroupSpec:
    return parse_group_label(rng.choice(cfg["random"]["groups"]))


def random_product_pair(rng: random.Random, cfg: dict
                        ) -> tuple[ChainMap, ChainMap, GroupSpec, GroupHom, GroupHom]:
    G1, G2 = _random_group(rng, cfg), _random_group(rng, cfg)
    if G1.kind == G2.kind == CYCLIC and G1.order == G2.order:
        G2 = trivial_group()
    f1 = random_equivalence(rng, G1, cfg, small=True)
    f2 = random_equivalence(rng, G2, cfg, small=True)
    P, i1, i2 = product_group(G1, G2)
    return f1, f2, P, i1, i2


def random_s1_model(rng: random.Random, cfg: dict, index: int = 0) -> S1FiberingModel:
    """Diagonal monodromy over C5 with alpha in {id, t -> t^2}, comparison rebased."""
    G = cyclic_group(5)
    alpha = power_hom(G, rng.choice((1, 2)))
    C = make_complex(G, {0: rng.randint(1, 2), 1: rng.randint(0, 1)}, name="F")
    units = _units(G, nontrivial=True)
    diag = {k: [rng.choice(units)[0] for _ in range(C.rank(k))] for k in C.degrees}
    twist = twist_from_units(C, alpha, diag)
    T = mapping_torus(twist)
    e = rebase(rng, T, cfg["random"]["ops_per_matrix"])
    return S1FiberingModel(twist, e, name=f"s1-{index}")


def fiber_complex(chi: int) -> BasedChainComplex:
    """A point, a circle or a 2-sphere, by Euler characteristic."""
    G = trivial_group()
    ranks = {0: {0: 1, 1: 1}, 1: {0: 1}, 2: {0: 1, 2: 1}}[chi]
    return make_complex(G, ranks, name=f"F{chi}")


def random_composite_model(rng: random.Random, cfg: dict,
                           index: int = 0) -> tuple[S1FiberingModel, BasedChainComplex]:
    return random_s1_model(rng, cfg, index), fiber_complex(rng.choice((0, 1, 2)))


# ---------------------------------------------------------------------------
# Built-in checks
# ---------------------------------------------------------------------------


def unit_oracle() -> TaskResult:
    """(t + t^4 - 1)(t^2 + t^3 - 1) = 1 over Z[C5], and the class is not trivial."""
    G = cyclic_group(5)
    u, u_inv = golden_unit(G)
    product_ok = u * u_inv == GroupRingElement.one(G)
    c = classify(torsion_from_units([u]))
    verdicts = [
        Verdict("unit product", PASS if product_ok else FAIL, LEVEL_CLASS, f"({u})({u_inv})"),
        Verdict("golden unit is nontrivial", PASS if c.state == NONTRIVIAL else FAIL,
                LEVEL_CLASS, c.certificate),
    ]
    return TaskResult(verdicts, {"certificate": c.certificate})


def manifold_checks(p: PoincarePairData) -> TaskResult:
    """rho vanishes, the involution identity holds and rho-hat is zero."""
    r = rho_class(p)
    verdicts = [check_vanishing(r, "rho vanishes"), check_involution_identity(p)]
    if p.closed:
        verdicts.append(tate_verdict(rho_hat(p).tate))
    return TaskResult(verdicts, {"invariants": invariant_payload(r)},
                      stuck=not p.torsion_result.complete)


def pair_checks(p: PoincarePairData) -> TaskResult:
    """rho and the involution identity of an arbitrary pair; rho is only reported."""
    r = rho_class(p)
    c = classify(r)
    payload = {"rho": str(r), "classification": c.state, "certificate": c.certificate,
               "invariants": invariant_payload(r)}
    return TaskResult([check_involution_identity(p)], payload,
                      stuck=not p.torsion_result.complete)


def synthetic_checks() -> TaskResult:
    G = cyclic_group(5)
    u, _ = golden_unit(G)
    p = synthetic(u, 2)
    r = rho_class(p)
    verdicts = [
        check_equal(r, torsion_from_units([u]), "synthetic rho is the unit's class"),
        check_involution_identity(p),
        check_product(p, sphere(2)),
        check_product(p, disc(1)),
    ]
    tv = rho_hat(p).tate
    return TaskResult(verdicts, {"rho-hat": tv.state, "rho-hat certificate": tv.certificate})


def witness_path() -> TaskResult:
    """rho = y + *y by construction: rho-hat vanishes and the corrected model is simple."""
    G = cyclic_group(5)
    u, _ = golden_unit(G)
    y = torsion_from_units([u])
    result = rho_hat(synthetic(u * u, 2), y)
    verdicts = [tate_verdict(result.tate)]
    if result.corrected_verdict is not None:
        verdicts.append(result.corrected_verdict)
    else:
        verdicts.append(Verdict("corrected rho vanishes", FAIL, LEVEL_CLASS, "no model emitted"))
    return TaskResult(verdicts)


def gluing_checks() -> TaskResult:
    G = cyclic_group(5)
    u, _ = golden_unit(G)
    verdicts = [check_gluing(disc_double(2, G)), check_gluing(disc_double(2, G, u)),
                check_gluing(disc_double(3, G, u))]
    return TaskResult(verdicts)


def product_checks() -> TaskResult:
    verdicts = [check_product(sphere(2), sphere(2)), check_product(lens(3, (1, 1)), sphere(2)),
                check_product(sphere(1), sphere(2))]
    return TaskResult(verdicts)


def lens_invariance(order: int = 7, source: tuple[int, ...] = (1, 1),
                    target: tuple[int, ...] = (1, 2)) -> TaskResult:
    """rho(q) - rho(p) = tau(f) - *tau(f) for the equivalence of two lens spaces."""
    p, q, f = lens_equivalence(order, source, target)
    tau = whitehead_torsion(f)
    verdicts = [check_homotopy_invariance(p, f, q), check_tate_invariance(p, f, q)]
    payload = {"equivalence": f"L({order}; {source}) -> L({order}; {target})",
               "tau(f) invariants": invariant_payload(tau.torsion)}
    return TaskResult(verdicts, payload, stuck=not tau.complete)


def s1_checks(alpha_power: int) -> TaskResult:
    G = cyclic_group(5)
    u, _ = golden_unit(G)
    C = make_complex(G, {0: 1}, name="F")
    model = bundle_model(twist_from_units(C, power_hom(G, alpha_power), {0: [u]}, "diag(u)"))
    return TaskResult([check_reversal(model)])


def hcobordism_task(h: HCobordismAlgebraic, expect_zero: bool = False) -> TaskResult:
    """The gluing calculator on one h-cobordism, with the bridge when theta vanishes."""
    glued = glue_hcobordism(h)
    verdicts = [glued.verdicts[k] for k in ("internal identity", "displayed value",
                                            "star symmetry", "equivalence")]
    if expect_zero:
        verdicts += [check_vanishing(glued.theta, "theta vanishes"),
                     check_vanishing(glued.tau_prime, "tau' vanishes")]
    if glued.verdicts["theta"].passed:
        bridge = farrell_bridge(h, glued)
        verdicts.append(bridge.verdict)
        if bridge.identification is not None:
            verdicts.append(bridge.identification)
    payload = {"theta": glued.verdicts["theta"].status,
               "tau_fib": "undefined" if glued.tau_fib is None else str(glued.tau_fib)}
    return TaskResult(verdicts, payload)


def hcobordism_checks(unit: bool, dim: int, phi_power: int = 1) -> TaskResult:
    G = cyclic_group(5)
    tau = torsion_from_units([golden_unit(G)[0]]) if unit else trivial_class(G)
    return hcobordism_task(HCobordismAlgebraic(tau, power_hom(G, phi_power), dim),
                           expect_zero=not unit)


def composite_checks(model: S1FiberingModel, F: BasedChainComplex) -> TaskResult:
    result = check_composite_formula(model, F)
    return TaskResult(list(result.verdicts), {"chi(F)": result.chi_fiber},
                      stuck=result.outer.stuck or result.composite.stuck)


def builtin_tasks() -> list[SuiteTask]:
    tasks = [SuiteTask("unit oracle", "builtins", unit_oracle)]
    for p in builtin_manifolds():
        tasks.append(SuiteTask(f"manifold {p.label}", "poincare",
                               lambda p=p: manifold_checks(p)))
    tasks += [
        SuiteTask("synthetic pair", "poincare", synthetic_checks),
        SuiteTask("rho-hat witness path", "poincare", witness_path),
        SuiteTask("gluing", "poincare", gluing_checks),
        SuiteTask("products", "poincare", product_checks),
        SuiteTask("lens homotopy invariance", "poincare", lens_invariance),
    ]
    for a in (1, 2):
        tasks.append(SuiteTask(f"reversal diag(u) alpha={a}", "fibering",
                               lambda a=a: s1_checks(a)))
    for unit in (False, True):
        for dim in (5, 6):
            tasks.append(SuiteTask(f"h-cobordism tau={'u' if unit else '0'} dim={dim}",
                                   "fibering", lambda unit=unit, dim=dim:
                                   hcobordism_checks(unit, dim)))
    tasks.append(SuiteTask("h-cobordism tau=u dim=5 phi=t^2", "fibering",
                           lambda: hcobordism_checks(True, 5, 2), strict=False))
    G = cyclic_group(5)
    u, _ = golden_unit(G)
    base = bundle_model(twist_from_units(make_complex(G, {0: 1}, name="F"), identity_hom(G),
                                         {0: [u]}, "diag(u)"))
    for chi in (0, 1, 2):
        tasks.append(SuiteTask(f"composite chi={chi}", "fibering",
                               lambda chi=chi: composite_checks(base, fiber_complex(chi))))
    return tasks


# ---------------------------------------------------------------------------
# Randomized sections
# ---------------------------------------------------------------------------


def _acyclic_checks(C: BasedChainComplex) -> TaskResult:
    return TaskResult([check_trivial(C, "random acyclic is simple"),
                       check_witness_independence(C)])


def random_tasks(seed: int, cfg: dict) -> list[SuiteTask]:
    """All randomized instances for one seed, drawn in a fixed order."""
    rng = random.Random(seed)
    sizes = cfg["suite"]
    tasks = []
    for i in range(sizes["acyclic"]):
        C = random_acyclic(rng, _random_group(rng, cfg), cfg)
        tasks.append(SuiteTask(f"acyclic #{i}", "random", lambda C=C: _acyclic_checks(C)))
    for i in range(sizes["composition"]):
        f, g = random_composable_pair(rng, _random_group(rng, cfg), cfg)
        tasks.append(SuiteTask(f"composition #{i}", "random",
                               lambda f=f, g=g: TaskResult([check_composition_formula(f, g)])))
    for i in range(sizes["sum"]):
        square = random_sum_square(rng, _random_group(rng, cfg), cfg)
        tasks.append(SuiteTask(f"sum #{i}", "random",
                               lambda s=square: TaskResult([check_sum_formula(*s)])))
    for i in range(sizes["product"]):
        pair = random_product_pair(rng, cfg)
        tasks.append(SuiteTask(f"product #{i}", "random",
                               lambda s=pair: TaskResult([check_product_formula(*s)])))
    for i in range(sizes["s1_models"]):
        model = random_s1_model(rng, cfg, i)
        tasks.append(SuiteTask(f"reversal #{i}", "random",
                               lambda m=model: TaskResult([check_reversal(m)]), strict=False))
    for i in range(sizes["composites"]):
        model, F = random_composite_model(rng, cfg, i)
        tasks.append(SuiteTask(f"composite #{i}", "random",
                               lambda m=model, F=F: composite_checks(m, F), strict=False))
    logger.info("Drew %d random instances from seed %d", len(tasks), seed)
    return tasks


def verification_tasks(seed: int, cfg: dict,
                       pairs: list[PoincarePairData] | None = None) -> list[SuiteTask]:
    """The full identity suite: built-ins, extra pairs, then the random sections."""
    tasks = builtin_tasks()
    for p in pairs or []:
        tasks.append(SuiteTask(f"pair {p.label}", "document", lambda p=p: pair_checks(p)))
    return tasks + random_tasks(seed, cfg)


# ---------------------------------------------------------------------------
# Document tasks
# ---------------------------------------------------------------------------


def _expect_verdict(state: str, expect: str | None, identity: str) -> Verdict | None:
    """Compare a classification with the ``expect`` key of a task."""
    if expect is None:
        if state == UNKNOWN:
            return Verdict(identity, UNKNOWN, LEVEL_CLASS, "classification undecided")
        return None
    if expect not in (TRIVIAL, NONTRIVIAL):
        raise DocumentError(f"expect must be {TRIVIAL} or {NONTRIVIAL}", kind="invariant")
    if state == UNKNOWN:
        return Verdict(identity, UNKNOWN, LEVEL_CLASS, "classification undecided")
    return Verdict(identity, PASS if state == expect else FAIL, LEVEL_CLASS,
                   f"classified {state}, expected {expect}")


def torsion_task(f: ChainMap, inverse: ChainMap | None = None,
                 expect: str | None = None) -> TaskResult:
    result = whitehead_torsion(f, inverse=inverse)
    c = classify(result.torsion)
    payload = {"status": result.status, "torsion": str(result.torsion),
               "classification": c.state, "certificate": c.certificate,
               "invariants": invariant_payload(result.torsion)}
    v = _expect_verdict(c.state, expect, f"torsion of {f.name or 'map'}")
    return TaskResult([v] if v else [], payload, stuck=not result.complete)


def rho_task(p: PoincarePairData, expect: str | None = None) -> TaskResult:
    result = pair_checks(p)
    v = _expect_verdict(result.payload["classification"], expect, f"rho of {p.label}")
    if v is not None:
        result.verdicts.append(v)
    return result


def s1_task(model: S1FiberingModel) -> TaskResult:
    result = s1_invariants(model)
    payload = {"theta": str(result.theta), "theta vanishes": result.theta_verdict.status,
               "tau'": str(result.tau_prime),
               "tau_fib": "undefined" if result.tau_fib is None else str(result.tau_fib)}
    verdicts = []
    try:
        verdicts.append(check_reversal(model))
    except CertificateError as e:
        payload["reversal"] = f"skipped: {e}"
    return TaskResult(verdicts, payload, stuck=result.stuck)


def transfer_task(model: S1FiberingModel, chi: int) -> TaskResult:
    result = composite_checks(model, fiber_complex(chi))
    outer = s1_invariants(model)
    moved = transfer_product(outer.tau_prime, chi, identity_hom(model.group))
    result.payload["transfer"] = str(moved)
    return result


def _task_for(doc: ModelDocument, task: DocumentTask) -> SuiteTask:
    a = task.args
    expect = a.get("expect")
    if task.op == "torsion" or (task.op == "invariants" and "map" in a):
        f = doc.maps[a["map"]]
        inverse = doc.inverses.get(a["map"])
        run = (lambda: torsion_task(f, inverse, expect))
    elif task.op in ("rho", "invariants"):
        if "pair" not in a:
            raise DocumentError(f"task {task.name!r} needs a pair", kind="reference",
                                line=task.line)
        p = doc.pairs[a["pair"]]
        run = (lambda: rho_task(p, expect))
    elif task.op == "glue":
        h = doc.hcobordisms[a["hcobordism"]]
        run = (lambda: hcobordism_task(h))
    elif task.op == "s1":
        m = doc.s1_models[a["model"]]
        run = (lambda: s1_task(m))
    else:
        m = doc.s1_models[a["model"]]
        chi = int(a.get("fiber_chi", 2))
        if chi not in (0, 1, 2):
            raise DocumentError("fiber_chi must be 0, 1 or 2", kind="invariant", line=task.line)
        run = (lambda: transfer_task(m, chi))
    return SuiteTask(task.name, "document", run)


def _default_tasks(doc: ModelDocument, op: str) -> list[DocumentTask]:
    """One task per object of the section an operation acts on."""
    if op in ("torsion", "invariants"):
        return [DocumentTask(op, {"map": n}, f"{op} {n}") for n in doc.maps]
    if op == "rho":
        return [DocumentTask(op, {"pair": n}, f"rho {n}") for n in doc.pairs]
    if op == "glue":
        return [DocumentTask(op, {"hcobordism": n}, f"glue {n}") for n in doc.hcobordisms]
    return [DocumentTask(op, {"model": n}, f"{op} {n}") for n in doc.s1_models]


def document_tasks(doc: ModelDocument, op: str | None = None) -> list[SuiteTask]:
    """The document's tasks for one operation (all tasks when op is None), in order."""
    chosen = [t for t in doc.tasks if op is None or t.op == op]
    if op is not None and not chosen:
        chosen = _default_tasks(doc, op)
    return [_task_for(doc, t) for t in chosen]
