"""Multi-turn conversation cost simulation under three resend strategies.

At turn t the model receives the system prompt plus some window of prior
(user + assistant) traffic:

    full history     I_t = S + sum_{i=1..t} (u + a)         -> O(T^2) cumulative
    sliding window   I_t = S + sum_{i=max(1,t-W+1)..t} (u+a) -> capped at S + W(u+a)
    summarize        I_t = S + rho * sum_{i=1..t-k} (u+a) + sum_{i=t-k+1..t} (u+a)

Output is billed every turn at the output rate. Summarization itself is
assumed free, an optimistic bound. Note the summarize strategy's per-turn
input still grows (at rate rho*(u+a)); its "linear" growth class holds only
while that term stays small against the fixed per-turn base.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from typing import Union

from .money import dec
from .registry import PricingRule, price_request

MAX_TURNS = 100_000

GROWTH_QUADRATIC = "quadratic"
GROWTH_LINEAR = "linear"


@dataclass(frozen=True)
class FullHistory:
    name = "full"


@dataclass(frozen=True)
class SlidingWindow:
    window: int
    name = "window"

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")


@dataclass(frozen=True)
class Summarize:
    ratio: float
    keep_last: int = 1
    name = "summarize"

    def __post_init__(self):
        if not 0 <= self.ratio <= 1:
            raise ValueError("ratio must be in [0, 1]")
        if self.keep_last < 0:
            raise ValueError("keep_last must be >= 0")


Strategy = Union[FullHistory, SlidingWindow, Summarize]


@dataclass(frozen=True)
class ConversationParams:
    system_tokens: int
    user_tokens: int
    assistant_tokens: int
    strategy: Strategy
    turns: int
    pricing: PricingRule

    def __post_init__(self):
        if min(self.system_tokens, self.user_tokens, self.assistant_tokens) < 0:
            raise ValueError("token counts must be >= 0")
        if self.turns < 1:
            raise ValueError("turns must be >= 1")


@dataclass(frozen=True)
class StrategyProjection:
    strategy: Strategy
    per_turn_input: tuple
    per_turn_output: tuple[int, ...]
    per_turn_cost: tuple[Decimal, ...]
    cumulative_cost: tuple[Decimal, ...]
    growth_class: str

    @property
    def total_input(self):
        return sum(self.per_turn_input)

    @property
    def total_cost(self) -> Decimal:
        return self.cumulative_cost[-1]


def input_at_turn(p: ConversationParams, t: int):
    """Input tokens sent at turn t (1-based). Exact: integer for full and
    window, Decimal for summarize (the ratio makes it fractional)."""
    s, pair = p.system_tokens, p.user_tokens + p.assistant_tokens
    strat = p.strategy
    if isinstance(strat, FullHistory):
        return s + t * pair
    if isinstance(strat, SlidingWindow):
        return s + min(t, strat.window) * pair
    if t <= strat.keep_last:
        return s + t * pair
    summarized = dec(strat.ratio) * ((t - strat.keep_last) * pair)
    return dec(s) + summarized + strat.keep_last * pair


def growth_class(strategy: Strategy) -> str:
    return GROWTH_QUADRATIC if isinstance(strategy, FullHistory) else GROWTH_LINEAR


def simulate(p: ConversationParams) -> StrategyProjection:
    inputs = []
    outputs = []
    costs = []
    cumulative = []
    running = Decimal(0)
    for t in range(1, p.turns + 1):
        i_t = input_at_turn(p, t)
        cost = price_request(i_t, p.assistant_tokens, 0, 0, p.pricing)
        running += cost
        inputs.append(i_t)
        outputs.append(p.assistant_tokens)
        costs.append(cost)
        cumulative.append(running)
    return StrategyProjection(
        strategy=p.strategy,
        per_turn_input=tuple(inputs),
        per_turn_output=tuple(outputs),
        per_turn_cost=tuple(costs),
        cumulative_cost=tuple(cumulative),
        growth_class=growth_class(p.strategy),
    )


def cumulative_full_closed_form(system_tokens: int, user_tokens: int, assistant_tokens: int, turns: int) -> int:
    """S*T + T(T+1)/2 * (u+a): closed form of total full-history input."""
    if turns < 1:
        raise ValueError("turns must be >= 1")
    pair = user_tokens + assistant_tokens
    return system_tokens * turns + turns * (turns + 1) // 2 * pair


def turns_for_budget(
    system_tokens: int,
    user_tokens: int,
    assistant_tokens: int,
    strategy: Strategy,
    pricing: PricingRule,
    budget,
    max_turns: int = MAX_TURNS,
) -> int:
    """Largest turn count whose cumulative cost stays within budget,
    by incremental simulation. Returns 0 when turn 1 already exceeds it;
    capped at ``max_turns`` so degenerate near-zero pricing terminates."""
    budget = dec(budget)
    if budget <= 0:
        raise ValueError("budget must be > 0")
    p = ConversationParams(system_tokens, user_tokens, assistant_tokens, strategy, 1, pricing)
    running = Decimal(0)
    for t in range(1, max_turns + 1):
        running += price_request(input_at_turn(p, t), assistant_tokens, 0, 0, pricing)
        if running > budget:
            return t - 1
    return max_turns
