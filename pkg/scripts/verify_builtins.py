#!/usr/bin/env python3
"""Run the built-in identity suite without the randomized sections.

Usage:
    python scripts/verify_builtins.py
    # the full suite, random sections included:
    python -m src.main verify --seed 42
"""

import asyncio
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.config import WORKERS
from src.main import run_tasks
from src.report import build_report, digest, format_report
from src.suite import builtin_tasks

logging.basicConfig(
    level=logging.WARNING,
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    datefmt="%H:%M:%S",
)


def main() -> int:
    outcomes = asyncio.run(run_tasks(builtin_tasks(), WORKERS))
    report = build_report("verify", outcomes, 0, digest("builtins"))
    print(format_report(report, outcomes))
    return report["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
