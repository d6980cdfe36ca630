"""Enumeration budgets, checked before an expansion starts."""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

from .errors import BudgetExceeded

DEFAULT_ITEMS = 2_000_000


def default_items() -> int:
    raw = os.environ.get("PREDCOMB_BUDGET")
    return int(raw) if raw else DEFAULT_ITEMS


@dataclass
class EnumBudget:
    max_items: int = field(default_factory=default_items)
    max_seconds: float | None = None
    started: float = field(default_factory=time.monotonic, repr=False)

    def check(self, what: str, count: int) -> None:
        if count > self.max_items:
            raise BudgetExceeded(what, count, self.max_items)
        if self.max_seconds is not None and time.monotonic() - self.started > self.max_seconds:
            raise BudgetExceeded(f"{what} (time)", count, self.max_items)


def resolve(budget) -> EnumBudget:
    if budget is None:
        return EnumBudget()
    if isinstance(budget, EnumBudget):
        return budget
    return EnumBudget(max_items=int(budget))
