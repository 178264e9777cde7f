"""SQLite run history.

Stores each recorded run and its verdicts so later runs can compare against
earlier results, in particular the equivalence torsion invariants that serve
as regression ground truth.

Tables:
  runs      – one row per recorded run (document digest, subcommand, seed, exit code)
  verdicts  – one row per identity verdict of a run, plus the task's result payload
"""

from __future__ import annotations

import json
import logging
import sqlite3
from datetime import datetime
from typing import Any

from src.config import DB_PATH

logger = logging.getLogger(__name__)


def _connect() -> sqlite3.Connection:
    conn = sqlite3.connect(str(DB_PATH))
    conn.row_factory = sqlite3.Row
    conn.execute("PRAGMA journal_mode=WAL")
    return conn


def init_db() -> None:
    """Create tables if they don't exist."""
    DB_PATH.parent.mkdir(parents=True, exist_ok=True)
    conn = _connect()
    conn.executescript(
        """
        CREATE TABLE IF NOT EXISTS runs (
            id            INTEGER PRIMARY KEY AUTOINCREMENT,
            input_digest  TEXT    NOT NULL,
            command       TEXT    NOT NULL,
            seed          INTEGER NOT NULL,
            exit_code     INTEGER NOT NULL,
            finished_at   TEXT    NOT NULL   -- ISO timestamp
        );

        CREATE TABLE IF NOT EXISTS verdicts (
            id            INTEGER PRIMARY KEY AUTOINCREMENT,
            run_id        INTEGER NOT NULL REFERENCES runs(id),
            task_name     TEXT    NOT NULL,
            identity      TEXT,             -- NULL for a task without verdicts
            status        TEXT    NOT NULL,
            level         TEXT,
            certificate   TEXT,
            payload       TEXT               -- JSON result of the task
        );

        CREATE INDEX IF NOT EXISTS idx_verdicts_task
            ON verdicts(task_name);
        """
    )
    conn.commit()
    conn.close()
    logger.debug("Database initialized at %s", DB_PATH)


# ---------------------------------------------------------------------------
# Recording
# ---------------------------------------------------------------------------


def record_run(report: dict[str, Any]) -> int:
    """Store a built report; returns the run id."""
    conn = _connect()
    cur = conn.execute(
        """INSERT INTO runs (input_digest, command, seed, exit_code, finished_at)
           VALUES (?, ?, ?, ?, ?)""",
        (report["input"], report["command"], report["seed"], report["exit_code"],
         datetime.now().isoformat(timespec="seconds")),
    )
    run_id = cur.lastrowid
    for task in report["tasks"]:
        payload = json.dumps(task.get("result") or {}, sort_keys=True, ensure_ascii=False)
        rows = task["verdicts"] or [{"identity": None, "status": task["status"],
                                     "level": None, "certificate": None}]
        for v in rows:
            conn.execute(
                """INSERT INTO verdicts (run_id, task_name, identity, status, level,
                       certificate, payload)
                   VALUES (?, ?, ?, ?, ?, ?, ?)""",
                (run_id, task["name"], v["identity"], v["status"], v["level"],
                 v["certificate"], payload),
            )
    conn.commit()
    conn.close()
    logger.info("Recorded run %d (%s, %d tasks)", run_id, report["command"],
                len(report["tasks"]))
    return run_id


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------


def regression_invariants(task_name: str) -> dict[str, Any] | None:
    """The result payload of the latest recorded run of a task, or None."""
    conn = _connect()
    row = conn.execute(
        """SELECT payload FROM verdicts
           WHERE task_name = ?
           ORDER BY run_id DESC, id DESC LIMIT 1""",
        (task_name,),
    ).fetchone()
    conn.close()
    if row and row["payload"]:
        return json.loads(row["payload"])
    return None


def get_previous_exit_code(input_digest: str, command: str) -> int | None:
    """Exit code of the latest recorded run of the same input and command."""
    conn = _connect()
    row = conn.execute(
        """SELECT exit_code FROM runs
           WHERE input_digest = ? AND command = ?
           ORDER BY id DESC LIMIT 1""",
        (input_digest, command),
    ).fetchone()
    conn.close()
    return int(row["exit_code"]) if row else None
