"""Cobb-Douglas quality production and cost-minimizing token allocation.

Quality of a request is modeled as Q = X^alpha * Y^beta * (b + Z)^gamma over
input tokens X, output tokens Y, and cached tokens Z. The exponents are
author-assigned placeholder values (no provider publishes them) satisfying
two structural constraints: alpha + beta + gamma < 1 (diminishing returns)
and alpha < beta (output tokens matter more than input). All outputs carry
that placeholder label.

Without caching the cost minimum under a quality floor has a closed form;
with caching we minimize over Z with a bracketed one-dimensional search
(the inner problem reduces to the no-cache closed form at a rescaled
target).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import product

from .caching import CacheScenario, caching_roi
from .conversation import ConversationParams, FullHistory, SlidingWindow, simulate
from .money import tokens_cost
from .registry import PricingRule

PARAMS_DISCLAIMER = "author-assigned placeholder values"

# Defaults for top-tier models; scale by a profile's quality_multiplier for
# smaller tiers.
DEFAULT_ALPHA = 0.30
DEFAULT_BETA = 0.35
DEFAULT_GAMMA = 0.20


class QualityParamError(ValueError):
    pass


@dataclass(frozen=True)
class QualityParams:
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA
    base_quality: float = 1.0

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) <= 0:
            raise QualityParamError("alpha, beta, gamma must be > 0")
        if self.alpha + self.beta + self.gamma >= 1:
            raise QualityParamError("alpha + beta + gamma must be < 1 (diminishing returns)")
        if self.alpha >= self.beta:
            raise QualityParamError("alpha must be < beta")
        if self.base_quality <= 0:
            raise QualityParamError("base_quality must be > 0")

    def scaled(self, multiplier: float) -> "QualityParams":
        return replace(
            self,
            alpha=self.alpha * multiplier,
            beta=self.beta * multiplier,
            gamma=self.gamma * multiplier,
        )


@dataclass(frozen=True)
class Allocation:
    input_tokens: float
    output_tokens: float
    cache_tokens: float
    cost: float
    quality: float


def quality(x: float, y: float, z: float, p: QualityParams) -> float:
    """Q = X^alpha * Y^beta * (b + Z)^gamma. Zero input or output gives 0."""
    if x < 0 or y < 0 or z < 0:
        raise ValueError("token quantities must be >= 0")
    if x == 0 or y == 0:
        return 0.0
    return x**p.alpha * y**p.beta * (p.base_quality + z) ** p.gamma


def quality_gradient(x: float, y: float, z: float, p: QualityParams) -> tuple[float, float, float]:
    """Analytic partials: dQ/dX = alpha*Q/X, dQ/dY = beta*Q/Y,
    dQ/dZ = gamma*Q/(b+Z)."""
    q = quality(x, y, z, p)
    return (p.alpha * q / x, p.beta * q / y, p.gamma * q / (p.base_quality + z))


def min_cost_no_cache(target: float, cost_in: float, cost_out: float, p: QualityParams) -> Allocation:
    """Cheapest (X, Y) with quality(X, Y, 0) = target, from the first-order
    conditions: X*/Y* = (alpha * c_y) / (beta * c_x)."""
    if target <= 0:
        raise ValueError("target quality must be > 0")
    if cost_in <= 0 or cost_out <= 0:
        raise ValueError("prices must be > 0")
    ab = p.alpha + p.beta
    ratio = (p.alpha * cost_out) / (p.beta * cost_in)
    try:
        y = (target / (p.base_quality**p.gamma * ratio**p.alpha)) ** (1 / ab)
        x = ratio * y
        cost = (
            ab
            * (target / p.base_quality**p.gamma) ** (1 / ab)
            * (cost_in / p.alpha) ** (p.alpha / ab)
            * (cost_out / p.beta) ** (p.beta / ab)
        )
    except OverflowError:
        raise ValueError(f"target quality {target} too large to minimize") from None
    return Allocation(
        input_tokens=x,
        output_tokens=y,
        cache_tokens=0.0,
        cost=cost,
        quality=quality(x, y, 0.0, p),
    )


def _golden_min(f, lo: float, hi: float, rel_tol: float = 1e-9) -> float:
    """Golden-section minimum of a unimodal f on [lo, hi]."""
    inv_phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > rel_tol * max(1.0, abs(a), abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (a + b) / 2


def min_cost_with_cache(
    target: float,
    cost_in: float,
    cost_out: float,
    cost_cache: float,
    p: QualityParams,
) -> Allocation:
    """Minimize c_x*X + c_y*Y + c_z*Z subject to quality >= target.

    For fixed Z the inner problem is min_cost_no_cache at the rescaled
    target Q * b^gamma / (b+Z)^gamma, so only Z needs a numeric search:
    grow the upper bracket geometrically until the objective turns upward,
    then golden-section at relative tolerance 1e-9. Never worse than the
    no-cache optimum.
    """
    if cost_cache <= 0:
        raise ValueError("prices must be > 0")

    def inner_cost(z: float) -> float:
        eff = target * p.base_quality**p.gamma / (p.base_quality + z) ** p.gamma
        return min_cost_no_cache(eff, cost_in, cost_out, p).cost

    def objective(z: float) -> float:
        return inner_cost(z) + cost_cache * z

    no_cache = min_cost_no_cache(target, cost_in, cost_out, p)
    hi = max(p.base_quality, 1.0)
    while objective(hi * 2) < objective(hi) and hi < 1e18:
        hi *= 2
    z_star = _golden_min(objective, 0.0, hi * 2)
    if z_star < 0 or objective(z_star) >= no_cache.cost:
        return no_cache
    eff = target * p.base_quality**p.gamma / (p.base_quality + z_star) ** p.gamma
    inner = min_cost_no_cache(eff, cost_in, cost_out, p)
    x, y = inner.input_tokens, inner.output_tokens
    return Allocation(
        input_tokens=x,
        output_tokens=y,
        cache_tokens=z_star,
        cost=inner.cost + cost_cache * z_star,
        quality=quality(x, y, z_star, p),
    )


# --- +/-30% sensitivity of the strategy ranking ---------------------------

STRATEGY_CACHING = "caching"
STRATEGY_WINDOW = "sliding_window"
STRATEGY_FULL = "full_history"

PERTURBATION_FACTORS = (0.7, 1.0, 1.3)


@dataclass(frozen=True)
class StrategyScenario:
    """One what-if cell input: a daily workload whose token volumes come
    from the quality optimum under the (perturbed) parameters."""

    label: str
    quality_target: float
    reuses_per_day: int
    user_tokens: int
    window: int
    pricing: PricingRule


@dataclass(frozen=True)
class GridCell:
    factors: tuple[float, float, float]
    params: QualityParams | None
    valid: bool
    reason: str | None
    daily_costs: dict | None
    ranking: tuple[str, ...] | None


@dataclass(frozen=True)
class ScenarioResult:
    scenario: StrategyScenario
    cells: tuple[GridCell, ...]
    ranking: tuple[str, ...] | None  # shared ranking over valid cells, if invariant
    invariant: bool

    @property
    def valid_cells(self) -> int:
        return sum(1 for c in self.cells if c.valid)


@dataclass(frozen=True)
class SensitivityReport:
    base: QualityParams
    results: tuple[ScenarioResult, ...]
    disclaimer: str = PARAMS_DISCLAIMER

    @property
    def all_invariant(self) -> bool:
        return all(r.invariant for r in self.results)


def _perturbed(base: QualityParams, factors) -> tuple[QualityParams | None, str | None]:
    fa, fb, fg = factors
    try:
        return (
            QualityParams(
                alpha=base.alpha * fa,
                beta=base.beta * fb,
                gamma=base.gamma * fg,
                base_quality=base.base_quality,
            ),
            None,
        )
    except QualityParamError as exc:
        return None, str(exc)


def strategy_daily_costs(scenario: StrategyScenario, params: QualityParams) -> dict:
    """Daily cost of serving n+1 interactions under each strategy, with the
    stable prompt X* and per-turn output Y* taken from the quality optimum."""
    rule = scenario.pricing
    cost_in = float(rule.input_per_mtok) / 1e6
    cost_out = float(rule.output_per_mtok) / 1e6
    opt = min_cost_no_cache(scenario.quality_target, cost_in, cost_out, params)
    prompt_tokens = max(1, round(opt.input_tokens))
    output_tokens = max(0, round(opt.output_tokens))
    n = scenario.reuses_per_day
    sends = n + 1

    roi = caching_roi(CacheScenario.from_rule(prompt_tokens, n, rule))
    fresh_daily = tokens_cost(sends * scenario.user_tokens, rule.input_per_mtok)
    output_daily = tokens_cost(sends * output_tokens, rule.output_per_mtok)
    caching_daily = roi.cached_daily + fresh_daily + output_daily

    def conv_total(strategy):
        p = ConversationParams(
            system_tokens=prompt_tokens,
            user_tokens=scenario.user_tokens,
            assistant_tokens=output_tokens,
            strategy=strategy,
            turns=sends,
            pricing=rule,
        )
        return simulate(p).total_cost

    return {
        STRATEGY_CACHING: caching_daily,
        STRATEGY_WINDOW: conv_total(SlidingWindow(scenario.window)),
        STRATEGY_FULL: conv_total(FullHistory()),
    }


def sensitivity_grid(
    base: QualityParams,
    scenarios,
    factors=PERTURBATION_FACTORS,
) -> SensitivityReport:
    """Evaluate the strategy ranking at every cell of the 3^3 grid of
    {-30%, 0, +30%} perturbations on (alpha, beta, gamma).

    Cells whose perturbed parameters violate the structural constraints are
    flagged, excluded from the invariance judgment, and reported.
    """
    scenarios = list(scenarios)
    if not scenarios:
        raise ValueError("scenario list is empty")
    results = []
    for scenario in scenarios:
        cells = []
        rankings = set()
        for cell_factors in product(factors, repeat=3):
            params, reason = _perturbed(base, cell_factors)
            if params is None:
                cells.append(GridCell(cell_factors, None, False, reason, None, None))
                continue
            costs = strategy_daily_costs(scenario, params)
            ranking = tuple(sorted(costs, key=lambda k: costs[k]))
            rankings.add(ranking)
            cells.append(GridCell(cell_factors, params, True, None, costs, ranking))
        invariant = len(rankings) == 1
        results.append(
            ScenarioResult(
                scenario=scenario,
                cells=tuple(cells),
                ranking=next(iter(rankings)) if invariant else None,
                invariant=invariant,
            )
        )
    return SensitivityReport(base=base, results=tuple(results))


def high_reuse_scenarios(rule: PricingRule) -> list[StrategyScenario]:
    """The documented high-reuse scenario set: large stable prompts reused
    many times a day, where caching should dominate."""
    return [
        StrategyScenario("100 reuses, mid quality", 1000.0, 100, 500, 5, rule),
        StrategyScenario("50 reuses, high quality", 5000.0, 50, 500, 5, rule),
        StrategyScenario("200 reuses, low quality", 200.0, 200, 300, 3, rule),
    ]
