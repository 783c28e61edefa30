from __future__ import annotations

from typing import Optional


class LoopqrError(Exception):
    """Base class for every error raised by loopqr."""


class ConfigError(LoopqrError, ValueError):
    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


class DomainError(LoopqrError, ValueError):
    """A numerical-domain violation (e.g. q = 1, negative variance)."""


class ThresholdNotFound(DomainError):
    def __init__(
        self,
        message: str,
        *,
        bracket: tuple[float, float],
        skf_low: Optional[float] = None,
        skf_high: Optional[float] = None,
    ) -> None:
        super().__init__(message)
        self.bracket = bracket
        self.skf_low = skf_low
        self.skf_high = skf_high


class ValidationFailed(LoopqrError):
    def __init__(self, failed_rows: list[str]) -> None:
        super().__init__("validation failed: " + ", ".join(failed_rows))
        self.failed_rows = failed_rows
