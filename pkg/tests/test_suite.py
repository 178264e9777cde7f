"""Tests for src.suite: random instances, built-in checks and the task runner."""

import random

import pytest

from src.chains import ChainMap, concentrated
from src.config import load_engine_config
from src.constants import FAIL, LEVEL_CLASS, PASS, UNKNOWN
from src.document import parse_document
from src.errors import ChainError, DocumentError
from src.group_ring import GroupRingElement
from src.groups import cyclic_group, trivial_group
from src.linalg import GRMatrix
from src.suite import (
    SuiteTask,
    TaskResult,
    document_tasks,
    execute,
    golden_unit,
    hcobordism_checks,
    parse_group_label,
    random_acyclic,
    random_invertible,
    random_tasks,
    s1_checks,
    torsion_task,
    unit_oracle,
)
from src.whitehead import Verdict

G = cyclic_group(5)

TINY = {"acyclic": 2, "composition": 1, "sum": 1, "product": 1, "s1_models": 1,
        "composites": 1}


def _cfg():
    cfg = load_engine_config()
    cfg["suite"] = dict(TINY)
    return cfg


def _scaling(x):
    C = concentrated(G, 0, 1, "C")
    return ChainMap(C, C, {0: GRMatrix.from_rows(G, [[x]])}, "f")


class TestInstances:
    def test_golden_unit(self):
        u, u_inv = golden_unit(G)
        assert u * u_inv == 1
        with pytest.raises(ValueError):
            golden_unit(cyclic_group(3))

    def test_parse_group_label(self):
        assert parse_group_label("cyclic 5") == G
        assert parse_group_label("trivial") == trivial_group()
        with pytest.raises(ValueError):
            parse_group_label("dihedral 4")

    def test_random_invertible(self):
        M, M_inv = random_invertible(random.Random(1), G, 3, 6)
        assert (M @ M_inv).is_identity()
        assert (M_inv @ M).is_identity()

    def test_random_acyclic_depends_on_seed_only(self):
        cfg = _cfg()
        a = random_acyclic(random.Random(3), G, cfg)
        b = random_acyclic(random.Random(3), G, cfg)
        assert a.ranks == b.ranks
        assert all(a.d(k) == b.d(k) for k in a.degrees)

    def test_random_tasks(self):
        tasks = random_tasks(7, _cfg())
        assert len(tasks) == sum(TINY.values())
        assert [t.name for t in tasks] == [t.name for t in random_tasks(7, _cfg())]
        assert {t.section for t in tasks} == {"random"}


class TestBuiltinChecks:
    def test_unit_oracle(self):
        result = unit_oracle()
        assert all(v.passed for v in result.verdicts)
        assert result.payload["certificate"].startswith("chi1(det)")

    def test_reversal(self):
        assert all(v.passed for v in s1_checks(1).verdicts)

    def test_even_dimensional_hcobordism(self):
        result = hcobordism_checks(True, 6)
        assert result.payload["theta"] == FAIL
        assert result.payload["tau_fib"] == "undefined"


class TestExecute:
    def test_error_is_captured(self):
        def boom():
            raise ChainError("d∘d is not zero", degree=2)

        outcome = execute(SuiteTask("boom", "x", boom))
        assert outcome.status == "error"
        assert outcome.error_kind == "ChainError"
        assert "degree 2" in outcome.error
        assert not outcome.ok

    def test_document_error_keeps_its_kind(self):
        def bad_expect():
            raise DocumentError("expect must be trivial or nontrivial", kind="invariant")

        assert execute(SuiteTask("a", "x", bad_expect)).error_kind == "DocumentError:invariant"

    def test_lenient_task(self):
        open_ = TaskResult([Verdict("open", UNKNOWN, LEVEL_CLASS)])
        assert not execute(SuiteTask("a", "x", lambda: open_)).ok
        assert execute(SuiteTask("a", "x", lambda: open_, strict=False)).ok

    def test_pass(self):
        done = TaskResult([Verdict("done", PASS, LEVEL_CLASS)])
        outcome = execute(SuiteTask("a", "x", lambda: done))
        assert outcome.status == PASS
        assert outcome.elapsed >= 0


class TestTorsionTask:
    def test_expectations(self):
        u, _ = golden_unit(G)
        assert torsion_task(_scaling(u), expect="nontrivial").verdicts[0].status == PASS
        assert torsion_task(_scaling(u), expect="trivial").verdicts[0].status == FAIL

    def test_bad_expectation(self):
        u, _ = golden_unit(G)
        with pytest.raises(DocumentError):
            torsion_task(_scaling(u), expect="maybe")

    def test_stuck(self):
        result = torsion_task(_scaling(GroupRingElement.monomial(G, (1,)) - 1))
        assert result.stuck
        assert result.payload["status"] == "stuck"


class TestDocumentTasks:
    TEXT = ("group: {kind: cyclic, order: 5}\n"
            "complexes:\n"
            "  C: {ranks: [1]}\n"
            "maps:\n"
            "  f: {source: C, target: C, matrices: {0: [[\"t\"]]}}\n"
            "  g: {source: C, target: C, matrices: {0: [[\"-1\"]]}}\n"
            "s1:\n"
            "  M: {complex: C, v: {0: [[\"t\"]]}}\n"
            "tasks:\n"
            "  - {op: torsion, map: g, expect: trivial}\n"
            "  - {op: transfer, model: M, fiber_chi: 3}\n")

    def test_default_tasks(self):
        doc = parse_document(self.TEXT)
        tasks = document_tasks(doc, "glue")
        assert tasks == []
        names = [t.name for t in document_tasks(doc, "invariants")]
        assert names == ["invariants f", "invariants g"]

    def test_document_order(self):
        doc = parse_document(self.TEXT)
        tasks = document_tasks(doc, "torsion")
        assert [t.name for t in tasks] == ["torsion #0"]
        assert execute(tasks[0]).status == PASS

    def test_bad_fiber_chi(self):
        doc = parse_document(self.TEXT)
        with pytest.raises(DocumentError, match="fiber_chi"):
            document_tasks(doc, "transfer")
