#!/usr/bin/env python3
"""Record the equivalence torsion invariants of L(7; 1,1) -> L(7; 1,2).

The invariants are not known in advance; the first recorded run becomes the
ground truth and later runs are compared against it.

Usage:
    python scripts/record_lens_invariants.py
"""

import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.db import init_db, record_run, regression_invariants
from src.report import build_report, digest
from src.suite import SuiteTask, execute, lens_invariance

TASK_NAME = "lens homotopy invariance"

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    datefmt="%H:%M:%S",
)
logger = logging.getLogger("record_lens_invariants")


def main() -> int:
    init_db()
    outcome = execute(SuiteTask(TASK_NAME, "poincare", lens_invariance))
    if outcome.error is not None:
        logger.error("%s: %s", outcome.error_kind, outcome.error)
        return 1

    previous = regression_invariants(TASK_NAME)
    current = outcome.payload
    if previous is None:
        logger.info("No earlier record, storing ground truth")
    elif previous != current:
        logger.error("Invariants changed:\n  was %s\n  now %s", previous, current)
        return 5
    else:
        logger.info("Invariants match the recorded run")

    for line in current["tau(f) invariants"]:
        print(line)
    report = build_report("invariants", [outcome], 0, digest(f"builtin:{TASK_NAME}"))
    record_run(report)
    return report["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
