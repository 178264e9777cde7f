"""Tests for src.report: exit codes, the JSON report and the text summary."""

import json

from src.constants import (
    EXIT_INTERNAL,
    EXIT_INVARIANT,
    EXIT_OK,
    EXIT_STUCK,
    EXIT_VERIFY,
    FAIL,
    LEVEL_CLASS,
    PASS,
    UNKNOWN,
)
from src.report import build_report, digest, exit_code, format_report, to_json
from src.suite import TaskOutcome
from src.whitehead import Verdict


def _outcome(name, *statuses, stuck=False, strict=True, error=None, error_kind=None,
             elapsed=0.0, payload=None):
    verdicts = [Verdict(f"{name} {i}", s, LEVEL_CLASS, "cert") for i, s in enumerate(statuses)]
    return TaskOutcome(name, "random", verdicts, payload or {}, stuck, strict, error,
                       error_kind, elapsed)


class TestExitCode:
    def test_all_pass(self):
        assert exit_code([_outcome("a", PASS), _outcome("b", PASS)]) == EXIT_OK
        assert exit_code([]) == EXIT_OK

    def test_fail(self):
        assert exit_code([_outcome("a", PASS), _outcome("b", FAIL)]) == EXIT_VERIFY

    def test_unknown_strict_and_lenient(self):
        assert exit_code([_outcome("a", UNKNOWN)]) == EXIT_VERIFY
        assert exit_code([_outcome("a", UNKNOWN, strict=False)]) == EXIT_OK

    def test_bare_stuck_computation(self):
        assert exit_code([_outcome("a", stuck=True)]) == EXIT_STUCK

    def test_stuck_with_undecided_verdict(self):
        assert exit_code([_outcome("a", UNKNOWN, stuck=True)]) == EXIT_STUCK

    def test_stuck_but_passing(self):
        assert exit_code([_outcome("a", PASS, stuck=True)]) == EXIT_OK

    def test_errors(self):
        invariant = _outcome("a", error="d∘d is not zero", error_kind="ChainError")
        internal = _outcome("b", error="contradiction", error_kind="EngineFailure")
        assert exit_code([invariant]) == EXIT_INVARIANT
        assert exit_code([invariant, internal]) == EXIT_INTERNAL

    def test_only_chain_level_errors_are_invariant_violations(self):
        document = _outcome("a", error="expect must be trivial",
                            error_kind="DocumentError:invariant")
        assert exit_code([document]) == EXIT_INVARIANT
        for kind in ("GroupError", "CertificateError", "DimensionError", "DocumentError:reference"):
            assert exit_code([_outcome("b", error="bad", error_kind=kind)]) == EXIT_INTERNAL

    def test_priority(self):
        outcomes = [_outcome("a", stuck=True), _outcome("b", FAIL)]
        assert exit_code(outcomes) == EXIT_VERIFY
        outcomes.append(_outcome("c", error="bad", error_kind="ChainError"))
        assert exit_code(outcomes) == EXIT_INVARIANT


class TestBuildReport:
    def test_structure(self):
        outcomes = [_outcome("a", PASS, payload={"rho": "[1]"}),
                    _outcome("b", FAIL),
                    _outcome("c", error="bad", error_kind="CertificateError")]
        report = build_report("verify", outcomes, 42, digest("builtins"))
        assert report["command"] == "verify"
        assert report["seed"] == 42
        assert report["summary"] == {PASS: 1, FAIL: 1, UNKNOWN: 0}
        assert report["exit_code"] == EXIT_INTERNAL
        assert report["tasks"][0]["result"] == {"rho": "[1]"}
        assert report["tasks"][2]["error"] == {"kind": "CertificateError", "message": "bad"}

    def test_json_ignores_wall_time(self):
        fast = [_outcome("a", PASS, elapsed=0.01)]
        slow = [_outcome("a", PASS, elapsed=9.5)]
        a = to_json(build_report("torsion", fast, 1, digest("x")))
        b = to_json(build_report("torsion", slow, 1, digest("x")))
        assert a == b
        assert json.loads(a)["tasks"][0]["verdicts"][0]["status"] == PASS

    def test_digest(self):
        assert digest("a") == digest("a")
        assert digest("a") != digest("b")
        assert len(digest("a")) == 16


class TestFormatReport:
    def test_summary_line(self):
        outcomes = [_outcome("a", PASS, elapsed=0.5), _outcome("b", FAIL)]
        text = format_report(build_report("verify", outcomes, 7, "abc"), outcomes)
        assert text.splitlines()[0] == "verify (seed 7, input abc)"
        assert "[random]" in text
        assert "0.50s" in text
        assert "b 0: FAIL cert" in text
        assert text.endswith("1 passed, 1 failed, 0 undecided (exit 5)")

    def test_list_payload_is_joined(self):
        outcomes = [_outcome("a", PASS, payload={"invariants": ["aug: 1", "chi1: 1"]})]
        text = format_report(build_report("rho", outcomes, 0, "abc"))
        assert "invariants: aug: 1; chi1: 1" in text
