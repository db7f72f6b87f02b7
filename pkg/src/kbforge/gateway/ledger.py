"""Cost accounting for LLM usage.

All money arithmetic is exact decimal. Prices arrive as floats from config
files, so they are converted through str() to get the intended literal
value rather than the float's binary expansion.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from decimal import Decimal


def as_decimal(value: float | int | str | Decimal) -> Decimal:
    if isinstance(value, Decimal):
        return value
    return Decimal(str(value))


@dataclass
class LedgerSnapshot:
    prompt_count: int
    tokens_in: int
    tokens_out: int
    monetary_cost: Decimal
    budget_cap: Decimal | None

    def as_dict(self) -> dict:
        return {
            "prompt_count": self.prompt_count,
            "tokens_in": self.tokens_in,
            "tokens_out": self.tokens_out,
            "monetary_cost": str(self.monetary_cost),
            "budget_cap": None if self.budget_cap is None else str(self.budget_cap),
        }


class CostLedger:
    """Running totals of prompts, tokens, and spend against an optional cap."""

    def __init__(
        self,
        price_per_input_token: float | str | Decimal = 0,
        price_per_output_token: float | str | Decimal = 0,
        budget_cap: float | str | Decimal | None = None,
    ) -> None:
        self.price_in = as_decimal(price_per_input_token)
        self.price_out = as_decimal(price_per_output_token)
        self.budget_cap = None if budget_cap is None else as_decimal(budget_cap)
        self.prompt_count = 0
        self.tokens_in = 0
        self.tokens_out = 0
        self.monetary_cost = Decimal("0")
        self._lock = threading.Lock()

    def charge(self, tokens_in: int, tokens_out: int) -> Decimal:
        """Record token usage; returns the cost of this charge.

        Zero usage is an exact no-op. Prompt counting is separate
        (count_prompt) so that pure usage charges leave it alone.
        """
        cost = self.price_in * tokens_in + self.price_out * tokens_out
        with self._lock:
            self.tokens_in += tokens_in
            self.tokens_out += tokens_out
            self.monetary_cost += cost
        return cost

    def count_prompt(self, n: int = 1) -> None:
        with self._lock:
            self.prompt_count += n

    @property
    def exceeded(self) -> bool:
        # strictly over: a spend exactly at the cap still allows queued work
        # to finish, the next send is what gets refused
        with self._lock:
            return self.budget_cap is not None and self.monetary_cost > self.budget_cap

    def snapshot(self) -> LedgerSnapshot:
        with self._lock:
            return LedgerSnapshot(
                prompt_count=self.prompt_count,
                tokens_in=self.tokens_in,
                tokens_out=self.tokens_out,
                monetary_cost=self.monetary_cost,
                budget_cap=self.budget_cap,
            )
