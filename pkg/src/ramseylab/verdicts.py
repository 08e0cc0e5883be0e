"""Three-valued verdicts for bounded searches."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any


class BudgetExceeded(RuntimeError):
    """A bounded search ran past its budget without deciding."""


class Status(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Verdict:
    status: Status
    certificate: Any = None
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    @classmethod
    def ok(cls, certificate=None, note=""):
        return cls(Status.HOLDS, certificate, note)

    @classmethod
    def fail(cls, certificate=None, note=""):
        return cls(Status.FAILS, certificate, note)

    @classmethod
    def unknown(cls, note="", certificate=None):
        return cls(Status.INCONCLUSIVE, certificate, note)


EXIT_CODES = {Status.HOLDS: 0, Status.FAILS: 1, Status.INCONCLUSIVE: 2}
