"""Cooperative deadlines shared by the solver loops."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional


class SolveTimeout(RuntimeError):
    """A solver hit its wall-clock deadline before finishing."""


@dataclass(frozen=True)
class Deadline:
    """Wall-clock budget; solvers poll :meth:`check` at loop boundaries."""

    expires_at: float

    @staticmethod
    def after(seconds: Optional[float]) -> Optional["Deadline"]:
        if seconds is None:
            return None
        return Deadline(time.monotonic() + seconds)

    def expired(self) -> bool:
        return time.monotonic() >= self.expires_at

    def check(self) -> None:
        if self.expired():
            raise SolveTimeout("time limit exceeded")

    def remaining(self) -> float:
        return max(0.0, self.expires_at - time.monotonic())
