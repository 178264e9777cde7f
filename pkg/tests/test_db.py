"""Tests for db module: SQLite run history."""

import sqlite3
import tempfile
from pathlib import Path
from unittest.mock import patch


def _report(exit_code=0, digest="abc123", command="torsion", payload=None):
    return {
        "command": command,
        "seed": 42,
        "input": digest,
        "summary": {"pass": 1, "fail": 0, "unknown": 0},
        "exit_code": exit_code,
        "tasks": [
            {
                "name": "torsion f",
                "section": "document",
                "status": "pass",
                "verdicts": [
                    {"identity": "torsion of f", "status": "pass", "level": "class",
                     "certificate": "classified trivial, expected trivial"},
                ],
                "result": payload or {"classification": "trivial"},
            },
            {
                "name": "torsion g",
                "section": "document",
                "status": "pass",
                "verdicts": [],
                "stuck": True,
            },
        ],
    }


class TestInitDb:
    def test_creates_tables(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            db_path = Path(tmpdir) / "test.db"
            with patch("src.db.DB_PATH", db_path):
                from src.db import init_db

                init_db()

                conn = sqlite3.connect(str(db_path))
                tables = conn.execute(
                    "SELECT name FROM sqlite_master WHERE type='table'"
                ).fetchall()
                table_names = {t[0] for t in tables}

                assert "runs" in table_names
                assert "verdicts" in table_names
                conn.close()

    def test_is_idempotent(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            db_path = Path(tmpdir) / "nested" / "test.db"
            with patch("src.db.DB_PATH", db_path):
                from src.db import init_db

                init_db()
                init_db()
                assert db_path.exists()


class TestRecordRun:
    def test_inserts_records(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            db_path = Path(tmpdir) / "test.db"
            with patch("src.db.DB_PATH", db_path):
                from src.db import init_db, record_run

                init_db()
                run_id = record_run(_report())

                conn = sqlite3.connect(str(db_path))
                conn.row_factory = sqlite3.Row
                run = conn.execute("SELECT * FROM runs WHERE id = ?", (run_id,)).fetchone()
                assert run["command"] == "torsion"
                assert run["seed"] == 42
                assert run["input_digest"] == "abc123"

                rows = conn.execute(
                    "SELECT * FROM verdicts WHERE run_id = ? ORDER BY id", (run_id,)
                ).fetchall()
                assert len(rows) == 2
                assert rows[0]["identity"] == "torsion of f"
                assert rows[0]["level"] == "class"
                # a task without verdicts still gets one row
                assert rows[1]["identity"] is None
                assert rows[1]["status"] == "pass"
                conn.close()


class TestRegressionInvariants:
    def test_returns_latest_payload(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            db_path = Path(tmpdir) / "test.db"
            with patch("src.db.DB_PATH", db_path):
                from src.db import init_db, record_run, regression_invariants

                init_db()
                record_run(_report(payload={"invariants": ["aug: 1"]}))
                record_run(_report(payload={"invariants": ["aug: 1", "chi1: 1"]}))

                result = regression_invariants("torsion f")
                assert result == {"invariants": ["aug: 1", "chi1: 1"]}

    def test_returns_none_for_missing_task(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            db_path = Path(tmpdir) / "test.db"
            with patch("src.db.DB_PATH", db_path):
                from src.db import init_db, regression_invariants

                init_db()
                assert regression_invariants("nonexistent") is None


class TestGetPreviousExitCode:
    def test_returns_latest_matching_run(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            db_path = Path(tmpdir) / "test.db"
            with patch("src.db.DB_PATH", db_path):
                from src.db import get_previous_exit_code, init_db, record_run

                init_db()
                record_run(_report(exit_code=5))
                record_run(_report(exit_code=0))
                record_run(_report(exit_code=4, command="rho"))

                assert get_previous_exit_code("abc123", "torsion") == 0
                assert get_previous_exit_code("abc123", "rho") == 4
                assert get_previous_exit_code("other", "torsion") is None
