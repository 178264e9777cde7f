"""Verdict reports: the structured record of a run and its plain-text rendering."""

from __future__ import annotations

import hashlib
import json
import logging
from typing import Any

from src.constants import (
    EXIT_INTERNAL,
    EXIT_INVARIANT,
    EXIT_OK,
    EXIT_STUCK,
    EXIT_VERIFY,
    FAIL,
    PASS,
    UNKNOWN,
)
from src.suite import TaskOutcome

logger = logging.getLogger(__name__)

_PRIORITY = (EXIT_INTERNAL, EXIT_INVARIANT, EXIT_VERIFY, EXIT_STUCK, EXIT_OK)

# task errors that mean the input broke a chain-level rule; anything else is internal
INVARIANT_ERRORS = frozenset({"ChainError", "DocumentError:invariant"})

STATUS_MARKS = {PASS: "ok", FAIL: "FAIL", UNKNOWN: "??", "error": "ERR"}


def digest(text: str) -> str:
    """Short content digest of a document (or of the built-in corpus name)."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def exit_code(outcomes: list[TaskOutcome]) -> int:
    """0 when everything passed, otherwise the most serious failure seen."""
    codes = {EXIT_OK}
    for o in outcomes:
        if o.error is not None:
            codes.add(EXIT_INVARIANT if o.error_kind in INVARIANT_ERRORS else EXIT_INTERNAL)
        elif o.status == FAIL:
            codes.add(EXIT_VERIFY)
        elif o.stuck and not o.verdicts:
            # a bare computation that did not reduce
            codes.add(EXIT_STUCK)
        elif o.ok:
            continue
        elif o.stuck:
            codes.add(EXIT_STUCK)
        else:
            codes.add(EXIT_VERIFY)
    return next(c for c in _PRIORITY if c in codes)


def build_report(command: str, outcomes: list[TaskOutcome], seed: int,
                 source_digest: str) -> dict[str, Any]:
    """The deterministic VerdictReport; wall times stay out so reruns compare equal."""
    tasks = []
    for o in outcomes:
        entry: dict[str, Any] = {
            "name": o.name,
            "section": o.section,
            "status": o.status,
            "verdicts": [
                {"identity": v.identity, "status": v.status, "level": v.level,
                 "certificate": v.certificate}
                for v in o.verdicts
            ],
        }
        if o.payload:
            entry["result"] = o.payload
        if o.stuck:
            entry["stuck"] = True
        if o.error is not None:
            entry["error"] = {"kind": o.error_kind, "message": o.error}
        tasks.append(entry)
    counts = {s: sum(1 for o in outcomes if o.status == s) for s in (PASS, FAIL, UNKNOWN)}
    return {
        "command": command,
        "seed": seed,
        "input": source_digest,
        "summary": counts,
        "exit_code": exit_code(outcomes),
        "tasks": tasks,
    }


def to_json(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False)


def format_report(report: dict[str, Any], outcomes: list[TaskOutcome] | None = None) -> str:
    """Human-readable summary grouped by section, with timings when outcomes are given."""
    times = {o.name: o.elapsed for o in outcomes or []}
    lines = [f"{report['command']} (seed {report['seed']}, input {report['input']})"]
    section = None
    for task in report["tasks"]:
        if task["section"] != section:
            section = task["section"]
            lines.append("")
            lines.append(f"[{section}]")
        elapsed = f" {times[task['name']]:.2f}s" if task["name"] in times else ""
        lines.append(f"  {STATUS_MARKS.get(task['status'], '?'):>4}  {task['name']}{elapsed}")
        for v in task["verdicts"]:
            if v["status"] != PASS:
                lines.append(f"        {v['identity']}: {v['status']} {v['certificate']}".rstrip())
        for key, value in (task.get("result") or {}).items():
            if isinstance(value, list):
                value = "; ".join(str(x) for x in value)
            lines.append(f"        {key}: {value}")
        if "error" in task:
            lines.append(f"        {task['error']['kind']}: {task['error']['message']}")
    s = report["summary"]
    lines.append("")
    lines.append(f"{s[PASS]} passed, {s[FAIL]} failed, {s[UNKNOWN]} undecided "
                 f"(exit {report['exit_code']})")
    return "\n".join(lines)
