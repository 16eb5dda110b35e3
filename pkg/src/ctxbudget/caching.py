"""Prompt-caching break-even and ROI analysis.

Daily-cost convention: a day is one initial send plus n reuses. The
uncached side bills all n+1 sends at the input rate; the cached side bills
the first send at the cache-write rate and the n reuses at the cache-read
rate. Internal arithmetic is exact fixed-point; display rounds half-up to
cents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from .money import dec, tokens_cost
from .registry import PricingRule


@dataclass(frozen=True)
class CacheScenario:
    cached_tokens: int
    reuses_per_day: int
    input_per_mtok: Decimal
    cache_write_per_mtok: Decimal
    cache_read_per_mtok: Decimal

    def __post_init__(self):
        object.__setattr__(self, "input_per_mtok", dec(self.input_per_mtok))
        object.__setattr__(self, "cache_write_per_mtok", dec(self.cache_write_per_mtok))
        object.__setattr__(self, "cache_read_per_mtok", dec(self.cache_read_per_mtok))
        if self.cached_tokens <= 0:
            raise ValueError("cached_tokens must be > 0")
        if self.reuses_per_day < 0:
            raise ValueError("reuses_per_day must be >= 0")
        for name in ("input_per_mtok", "cache_write_per_mtok", "cache_read_per_mtok"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def from_rule(cls, cached_tokens: int, reuses_per_day: int, rule: PricingRule) -> "CacheScenario":
        return cls(
            cached_tokens=cached_tokens,
            reuses_per_day=reuses_per_day,
            input_per_mtok=rule.input_per_mtok,
            cache_write_per_mtok=rule.cache_write_per_mtok,
            cache_read_per_mtok=rule.cache_read_per_mtok,
        )


@dataclass(frozen=True)
class RoiReport:
    scenario: CacheScenario
    write_cost: Decimal
    uncached_daily: Decimal
    cached_daily: Decimal
    net_savings: Decimal
    savings_pct: Decimal | None  # None when the uncached cost is zero
    break_even_reuses: int | None


def break_even(cache_write_per_mtok, input_per_mtok, cache_read_per_mtok) -> int | None:
    """Least reuse count after which caching beats resending:
    ceil(c_w / (c_in - c_r)). None means it never breaks even
    (reads cost at least as much as plain input).
    """
    c_w, c_in, c_r = dec(cache_write_per_mtok), dec(input_per_mtok), dec(cache_read_per_mtok)
    if min(c_w, c_in, c_r) < 0:
        raise ValueError("rates must be >= 0")
    if c_w == 0:
        return 0
    if c_in <= c_r:
        return None
    # Fraction keeps the ceiling exact at integer boundaries.
    return math.ceil(Fraction(c_w) / (Fraction(c_in) - Fraction(c_r)))


def caching_roi(scenario: CacheScenario) -> RoiReport:
    t = scenario.cached_tokens
    n = scenario.reuses_per_day
    write_cost = tokens_cost(t, scenario.cache_write_per_mtok)
    uncached = tokens_cost((n + 1) * t, scenario.input_per_mtok)
    cached = write_cost + tokens_cost(n * t, scenario.cache_read_per_mtok)
    savings = uncached - cached
    pct = None if uncached == 0 else savings / uncached * 100
    return RoiReport(
        scenario=scenario,
        write_cost=write_cost,
        uncached_daily=uncached,
        cached_daily=cached,
        net_savings=savings,
        savings_pct=pct,
        break_even_reuses=break_even(
            scenario.cache_write_per_mtok,
            scenario.input_per_mtok,
            scenario.cache_read_per_mtok,
        ),
    )
