"""Command-line entry point: parse, run tasks concurrently, report, exit."""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from pathlib import Path

from src.config import LOG_LEVEL, SEED, WORKERS, load_engine_config
from src.constants import (
    EXIT_CODE_NAMES,
    EXIT_INTERNAL,
    EXIT_INVARIANT,
    EXIT_PARSE,
    EXIT_USAGE,
    SUBCOMMANDS,
)
from src.db import get_previous_exit_code, init_db, record_run
from src.document import ModelDocument, load_document, resolve_builtin
from src.errors import DocumentError, TorsionError
from src.report import build_report, digest, format_report, to_json
from src.suite import (
    SuiteTask,
    TaskOutcome,
    document_tasks,
    execute,
    rho_task,
    verification_tasks,
)

logger = logging.getLogger(__name__)

# Subcommands that accept --builtin NAME in place of a document.
_BUILTIN_COMMANDS = ("rho", "invariants")


class _Parser(argparse.ArgumentParser):
    """argparse with the usage exit code of this tool."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="whitehead-torsion",
        description="Exact Whitehead torsion, fibering obstructions and Poincaré torsion.",
    )
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("file", nargs="?", type=Path, help="model document (YAML)")
    parser.add_argument("--seed", type=int, default=SEED,
                        help=f"seed of the randomized suites (default {SEED})")
    parser.add_argument("--json", action="store_true", help="emit the report as JSON")
    parser.add_argument("--record", action="store_true",
                        help="store the run in the verdict history database")
    parser.add_argument("--workers", type=int, default=WORKERS,
                        help="tasks run in parallel (default %(default)s)")
    parser.add_argument("--log-level", default=LOG_LEVEL,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--builtin", metavar="NAME",
                        help="built-in pair such as 'lens(7; 1,2)' or 'sphere(2) x torus'")
    return parser


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


async def run_tasks(tasks: list[SuiteTask], workers: int) -> list[TaskOutcome]:
    """Run tasks in worker threads; outcomes keep the order of ``tasks``."""
    semaphore = asyncio.Semaphore(max(1, workers))

    async def run_one(task: SuiteTask) -> TaskOutcome:
        async with semaphore:
            return await asyncio.to_thread(execute, task)

    return list(await asyncio.gather(*(run_one(t) for t in tasks)))


def _plan(args: argparse.Namespace, parser: argparse.ArgumentParser
          ) -> tuple[list[SuiteTask], str]:
    """The task list of a command and the digest naming its input."""
    if args.builtin is not None:
        if args.command not in _BUILTIN_COMMANDS or args.file is not None:
            parser.error(f"--builtin works with {' or '.join(_BUILTIN_COMMANDS)} and no file")
        try:
            p = resolve_builtin(args.builtin)
        except (ValueError, TypeError) as e:
            raise DocumentError(f"built-in {args.builtin!r}: {e}", kind="reference") from e
        except TorsionError as e:
            raise DocumentError(f"built-in {args.builtin!r}: {e}", kind="invariant") from e
        task = SuiteTask(f"{args.command} {p.label}", "builtins", lambda: rho_task(p))
        return [task], digest(f"builtin:{args.builtin}")

    if args.file is None:
        if args.command != "verify":
            parser.error(f"{args.command} needs a model document or --builtin")
        cfg = load_engine_config()
        return verification_tasks(args.seed, cfg), digest("builtins")

    doc: ModelDocument = load_document(args.file)
    if args.command == "verify":
        cfg = load_engine_config()
        tasks = verification_tasks(args.seed, cfg, pairs=list(doc.pairs.values()))
        return tasks + document_tasks(doc), digest(doc.text)
    return document_tasks(doc, args.command), digest(doc.text)


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%H:%M:%S",
        stream=sys.stderr,
    )

    try:
        tasks, source = _plan(args, parser)
    except DocumentError as e:
        code = EXIT_INVARIANT if e.kind == "invariant" else EXIT_PARSE
        logger.error("Cannot use document: %s", e)
        print(f"error: {e}", file=sys.stderr)
        return code
    except TorsionError as e:
        logger.exception("Building tasks failed")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INTERNAL

    logger.info("Running %d tasks for '%s' with %d workers", len(tasks), args.command,
                args.workers)
    outcomes = asyncio.run(run_tasks(tasks, args.workers))
    report = build_report(args.command, outcomes, args.seed, source)

    if args.json:
        print(to_json(report))
    else:
        print(format_report(report, outcomes))

    code = report["exit_code"]
    if args.record:
        init_db()
        previous = get_previous_exit_code(source, args.command)
        if previous is not None and previous != code:
            logger.warning("Exit code changed since last recorded run: %d -> %d",
                           previous, code)
        record_run(report)

    logger.info("Done: %s", EXIT_CODE_NAMES.get(code, str(code)))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
