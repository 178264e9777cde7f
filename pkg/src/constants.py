"""Shared constants used across modules.

Verdict labels, exit codes and engine defaults live here so the CLI, the
report formatter and the history database agree on spelling.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Classification and verdict labels
# ---------------------------------------------------------------------------
TRIVIAL = "trivial"
NONTRIVIAL = "nontrivial"
UNKNOWN = "unknown"

PASS = "pass"
FAIL = "fail"

COMPLETE = "complete"
STUCK = "stuck"

# Certificate levels of an identity verdict
LEVEL_CLASS = "class"
LEVEL_CHARACTERS = "characters"
LEVEL_INVARIANTS = "invariants"

# ---------------------------------------------------------------------------
# CLI exit codes
# ---------------------------------------------------------------------------
EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_STUCK = 4
EXIT_VERIFY = 5
EXIT_USAGE = 64

EXIT_CODE_NAMES: dict[int, str] = {
    EXIT_OK: "ok",
    EXIT_INTERNAL: "internal error",
    EXIT_PARSE: "parse failure",
    EXIT_INVARIANT: "invariant violation",
    EXIT_STUCK: "stuck elimination",
    EXIT_VERIFY: "verification failure",
    EXIT_USAGE: "usage error",
}

SUBCOMMANDS: tuple[str, ...] = (
    "torsion",
    "rho",
    "glue",
    "s1",
    "transfer",
    "verify",
    "invariants",
)

# ---------------------------------------------------------------------------
# Engine defaults (overridable via config/engine.yaml and the environment)
# ---------------------------------------------------------------------------
DEFAULT_SEED = 42

# Largest |G| for which units are certified through the regular representation.
MAX_REGULAR_ORDER = 64

# Working precision (decimal digits) for numeric square-root candidates.
SQRT_SEARCH_DPS = 60

# Largest prime p for which the witness-free Tate search over C_p runs.
TATE_MAX_PRIME = 13

# Name of the generator adjoined by SemidirectWithZ when none is declared.
DEFAULT_Z_GENERATOR = "z"
