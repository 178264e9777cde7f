"""Exception hierarchy for the torsion engine.

Stuck eliminations are results, not exceptions; everything here means the
input (or the engine) is wrong.
"""

from __future__ import annotations


class TorsionError(Exception):
    """Base class for all engine errors."""


class GroupError(TorsionError):
    """Unsupported group, violated relation, or mismatched ambient groups."""


class DimensionError(TorsionError):
    """Matrix shapes do not fit."""


class ChainError(TorsionError):
    """A chain-level relation fails (d∘d, chain map, homotopy)."""

    def __init__(self, message: str, *, degree: int | None = None):
        super().__init__(message if degree is None else f"{message} (degree {degree})")
        self.degree = degree


class CertificateError(TorsionError):
    """An invertibility or equivalence certificate is missing."""


class EngineFailure(TorsionError):
    """Contradictory certificates; always a bug."""


class DocumentError(TorsionError):
    """A model document cannot be used.

    ``kind`` is one of "syntax", "reference" or "invariant"; the CLI maps it
    to an exit code.
    """

    def __init__(self, message: str, *, kind: str = "syntax", line: int | None = None,
                 column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.kind = kind
        self.line = line
        self.column = column
