"""
Exception hierarchy for the GRATR engine and its harnesses.

Every error raised on purpose by this codebase derives from GratrError so the
CLI can map failures onto exit codes in one place.
"""
from typing import List, Optional


class GratrError(Exception):
    """Root of all deliberate failures."""


class ConfigError(GratrError):
    """Invalid run or graph configuration."""


# ── Graph ─────────────────────────────────────────────────────────────────────

class TrustGraphError(GratrError):
    pass


class UnknownPlayerError(TrustGraphError):
    def __init__(self, player: str):
        super().__init__(f"unknown player: {player!r}")
        self.player = player


class NonMonotoneTickError(TrustGraphError):
    pass


class CredibilityRangeError(TrustGraphError):
    pass


class RetrievalError(GratrError):
    pass


# ── Extraction / LLM ──────────────────────────────────────────────────────────

class ExtractionError(GratrError):
    """Reply could not be turned into evidence. Keeps the raw text for audit."""

    def __init__(self, message: str, raw_response: str = ""):
        super().__init__(message)
        self.raw_response = raw_response


class CompletionError(GratrError):
    def __init__(self, message: str, retryable: bool = False):
        super().__init__(message)
        self.retryable = retryable


# ── Harnesses ─────────────────────────────────────────────────────────────────

class GameError(GratrError):
    pass


class DatasetError(GratrError):
    """Dataset could not be ingested. `diagnostics` holds line-numbered reasons."""

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class EvaluationError(GratrError):
    pass
