"""Tests for src.main: subcommands, exit codes and output formats."""

import json
import tempfile
from pathlib import Path
from unittest.mock import patch

import pytest

from src.constants import (
    EXIT_INVARIANT,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_STUCK,
    EXIT_USAGE,
    EXIT_VERIFY,
)
from src.main import run

FIXTURES = Path(__file__).parent / "fixtures"


def _run(*args):
    return run([*args, "--workers", "1", "--log-level", "ERROR"])


class TestExitCodes:
    def test_expected_classification(self):
        assert _run("torsion", str(FIXTURES / "golden.yaml")) == EXIT_OK

    def test_wrong_expectation(self):
        assert _run("torsion", str(FIXTURES / "expect_trivial.yaml")) == EXIT_VERIFY

    def test_stuck_elimination(self):
        assert _run("torsion", str(FIXTURES / "stuck.yaml")) == EXIT_STUCK

    def test_invariant_violation(self):
        assert _run("torsion", str(FIXTURES / "not_a_complex.yaml")) == EXIT_INVARIANT

    def test_parse_failures(self):
        assert _run("torsion", str(FIXTURES / "unknown_reference.yaml")) == EXIT_PARSE
        assert _run("torsion", str(FIXTURES / "bad_syntax.yaml")) == EXIT_PARSE
        assert _run("torsion", str(FIXTURES / "absent.yaml")) == EXIT_PARSE

    def test_operation_without_tasks_runs_nothing(self):
        assert _run("rho", str(FIXTURES / "golden.yaml")) == EXIT_OK


class TestUsage:
    def test_unknown_command(self):
        with pytest.raises(SystemExit) as info:
            _run("frobnicate")
        assert info.value.code == EXIT_USAGE

    def test_document_required(self):
        with pytest.raises(SystemExit) as info:
            _run("torsion")
        assert info.value.code == EXIT_USAGE

    def test_builtin_only_for_pairs(self):
        with pytest.raises(SystemExit) as info:
            _run("torsion", "--builtin", "sphere(2)")
        assert info.value.code == EXIT_USAGE


class TestBuiltin:
    def test_sphere(self):
        assert _run("rho", "--builtin", "sphere(2)") == EXIT_OK

    def test_unknown_family(self):
        assert _run("rho", "--builtin", "klein(2)") == EXIT_PARSE

    def test_invalid_parameters(self):
        assert _run("invariants", "--builtin", "sphere(-1)") == EXIT_INVARIANT


class TestOutput:
    def test_json_report(self, capsys):
        code = _run("torsion", str(FIXTURES / "golden.yaml"), "--json")
        report = json.loads(capsys.readouterr().out)
        assert report["exit_code"] == code == EXIT_OK
        assert report["command"] == "torsion"
        task = report["tasks"][0]
        assert task["result"]["classification"] == "nontrivial"
        assert task["result"]["certificate"].startswith("chi1(det)")

    def test_json_is_reproducible(self, capsys):
        _run("torsion", str(FIXTURES / "golden.yaml"), "--json")
        first = capsys.readouterr().out
        _run("torsion", str(FIXTURES / "golden.yaml"), "--json")
        assert capsys.readouterr().out == first

    def test_text_report(self, capsys):
        _run("torsion", str(FIXTURES / "expect_trivial.yaml"))
        out = capsys.readouterr().out
        assert "[document]" in out
        assert out.rstrip().endswith("0 passed, 1 failed, 0 undecided (exit 5)")


class TestRecord:
    def test_record_stores_the_run(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            db_path = Path(tmpdir) / "test.db"
            with patch("src.db.DB_PATH", db_path):
                from src.db import get_previous_exit_code
                from src.report import digest

                path = FIXTURES / "expect_trivial.yaml"
                assert _run("torsion", str(path), "--record") == EXIT_VERIFY
                text = path.read_text(encoding="utf-8")
                assert get_previous_exit_code(digest(text), "torsion") == EXIT_VERIFY
