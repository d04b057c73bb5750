from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NA:
    """A statistic that could not be given a value, with the reason why."""

    reason: str

    def __str__(self) -> str:
        return f"N/A ({self.reason})"


def is_na(value) -> bool:
    return isinstance(value, NA)
