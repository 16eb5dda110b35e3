import math
import random

import pytest

from ctxbudget.quality import (
    GridCell,
    QualityParamError,
    QualityParams,
    StrategyScenario,
    high_reuse_scenarios,
    min_cost_no_cache,
    min_cost_with_cache,
    quality,
    quality_gradient,
    sensitivity_grid,
    strategy_daily_costs,
)
from ctxbudget.registry import PricingRule

from decimal import Decimal

SONNET = PricingRule(
    input_per_mtok=Decimal("3"),
    output_per_mtok=Decimal("15"),
    cache_write_per_mtok=Decimal("3.75"),
    cache_read_per_mtok=Decimal("0.3"),
)

C_IN = 3e-6
C_OUT = 15e-6


def constrained_minimum_oracle(target, cost_in, cost_out, p, zooms=60):
    """Grid-plus-refinement minimizer over the constraint surface
    Y = (target / (X^alpha * b^gamma))^(1/beta), independent of the closed
    form."""

    def cost_at(log_x):
        x = math.exp(log_x)
        y = (target / (x**p.alpha * p.base_quality**p.gamma)) ** (1 / p.beta)
        return cost_in * x + cost_out * y

    lo, hi = math.log(1e-8), math.log(1e30)
    for _ in range(zooms):
        grid = [lo + (hi - lo) * i / 40 for i in range(41)]
        values = [cost_at(g) for g in grid]
        best = values.index(min(values))
        lo = grid[max(0, best - 1)]
        hi = grid[min(len(grid) - 1, best + 1)]
        if hi - lo < 1e-14:
            break
    best_log = (lo + hi) / 2
    x = math.exp(best_log)
    y = (target / (x**p.alpha * p.base_quality**p.gamma)) ** (1 / p.beta)
    return x, y, cost_in * x + cost_out * y


class TestQuality:
    def test_identity_point(self):
        assert quality(1, 1, 0, QualityParams()) == 1.0

    def test_zero_input_gives_zero(self):
        assert quality(0, 123, 456, QualityParams()) == 0.0
        assert quality(123, 0, 456, QualityParams()) == 0.0

    def test_thousand_tokens_each_no_cache(self):
        # 1000^(0.30+0.35) = 1000^0.65, evaluated with mpmath at 40 digits
        q = quality(1000, 1000, 0, QualityParams())
        assert q == pytest.approx(89.125094, rel=1e-6)

    def test_strictly_increasing_in_each_argument(self):
        p = QualityParams()
        base = quality(100, 100, 10, p)
        assert quality(101, 100, 10, p) > base
        assert quality(100, 101, 10, p) > base
        assert quality(100, 100, 11, p) > base

    def test_diminishing_returns(self):
        p = QualityParams()
        assert quality(200, 100, 0, p) < 2 * quality(100, 100, 0, p)

    def test_structural_constraints_enforced(self):
        with pytest.raises(QualityParamError):
            QualityParams(alpha=0.4, beta=0.4, gamma=0.3)  # sum >= 1
        with pytest.raises(QualityParamError):
            QualityParams(alpha=0.4, beta=0.3, gamma=0.1)  # alpha >= beta
        with pytest.raises(QualityParamError):
            QualityParams(alpha=0.0, beta=0.3, gamma=0.1)


class TestGradient:
    def test_matches_central_differences(self):
        rng = random.Random(7)
        p = QualityParams()
        for _ in range(25):
            x = rng.uniform(10, 1e5)
            y = rng.uniform(10, 1e5)
            z = rng.uniform(0, 1e4)
            gx, gy, gz = quality_gradient(x, y, z, p)
            for grad, var, point in ((gx, "x", (x, y, z)), (gy, "y", (x, y, z)), (gz, "z", (x, y, z))):
                h = {"x": x, "y": y, "z": max(z, 1.0)}[var] * 1e-6
                px, py, pz = point
                if var == "x":
                    numeric = (quality(px + h, py, pz, p) - quality(px - h, py, pz, p)) / (2 * h)
                elif var == "y":
                    numeric = (quality(px, py + h, pz, p) - quality(px, py - h, pz, p)) / (2 * h)
                else:
                    numeric = (quality(px, py, pz + h, p) - quality(px, py, pz - h, p)) / (2 * h)
                assert grad == pytest.approx(numeric, rel=1e-5)


class TestMinCostNoCache:
    def test_symmetric_params_and_prices_split_evenly(self):
        p = QualityParams(alpha=0.3, beta=0.30000001, gamma=0.2)
        alloc = min_cost_no_cache(100.0, 1e-6, 1e-6, p)
        assert alloc.input_tokens == pytest.approx(alloc.output_tokens, rel=1e-4)

    def test_default_ratio_is_30_over_7(self):
        alloc = min_cost_no_cache(1000.0, C_IN, C_OUT, QualityParams())
        assert alloc.input_tokens / alloc.output_tokens == pytest.approx(30 / 7, rel=1e-9)

    def test_achieves_the_target_quality(self):
        alloc = min_cost_no_cache(1234.5, C_IN, C_OUT, QualityParams())
        assert alloc.quality == pytest.approx(1234.5, rel=1e-9)

    def test_first_order_marginal_equality(self):
        p = QualityParams()
        alloc = min_cost_no_cache(500.0, C_IN, C_OUT, p)
        lhs = (p.alpha / alloc.input_tokens) / C_IN
        rhs = (p.beta / alloc.output_tokens) / C_OUT
        assert lhs == pytest.approx(rhs, rel=1e-6)

    def test_closed_form_matches_numeric_oracle_on_random_draws(self):
        rng = random.Random(42)
        for _ in range(100):
            alpha = rng.uniform(0.05, 0.4)
            beta = rng.uniform(alpha + 0.02, min(0.55, alpha + 0.3))
            gamma = rng.uniform(0.02, max(0.03, 0.95 - alpha - beta - 0.02))
            p = QualityParams(alpha=alpha, beta=beta, gamma=gamma, base_quality=rng.uniform(0.5, 4))
            target = rng.uniform(1, 1e4)
            cost_in = rng.uniform(1e-7, 1e-4)
            cost_out = rng.uniform(1e-7, 1e-4)
            alloc = min_cost_no_cache(target, cost_in, cost_out, p)
            _, _, oracle_cost = constrained_minimum_oracle(target, cost_in, cost_out, p)
            assert alloc.cost == pytest.approx(oracle_cost, rel=1e-6)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            min_cost_no_cache(0, C_IN, C_OUT, QualityParams())
        with pytest.raises(ValueError):
            min_cost_no_cache(10, 0, C_OUT, QualityParams())


class TestMinCostWithCache:
    def test_prohibitive_cache_price_reduces_to_no_cache(self):
        p = QualityParams()
        with_cache = min_cost_with_cache(1000.0, C_IN, C_OUT, 1e6 * C_IN, p)
        no_cache = min_cost_no_cache(1000.0, C_IN, C_OUT, p)
        assert with_cache.cost == pytest.approx(no_cache.cost, rel=1e-6)
        assert with_cache.cache_tokens == pytest.approx(0.0, abs=1e-3)

    def test_tiny_gamma_leaves_cache_unused(self):
        # caching pays only while the marginal quality gain outruns the
        # cache price; at gamma = 0.01 and a unit target it never does
        p = QualityParams(alpha=0.3, beta=0.35, gamma=0.01)
        alloc = min_cost_with_cache(1.0, C_IN, C_OUT, 1.25 * C_IN, p)
        assert alloc.cache_tokens < 1.0

        def total(z):
            eff = 1.0 / (p.base_quality + z) ** p.gamma
            return min_cost_no_cache(eff, C_IN, C_OUT, p).cost + 1.25 * C_IN * z

        assert all(total(z) >= alloc.cost for z in (1, 2, 5, 10, 100))

    def test_shrinking_gamma_shrinks_the_cache_allocation(self):
        small = QualityParams(alpha=0.3, beta=0.35, gamma=0.01)
        large = QualityParams(alpha=0.3, beta=0.35, gamma=0.20)
        z_small = min_cost_with_cache(1000.0, C_IN, C_OUT, 1.25 * C_IN, small).cache_tokens
        z_large = min_cost_with_cache(1000.0, C_IN, C_OUT, 1.25 * C_IN, large).cache_tokens
        assert z_small < z_large

    def test_moderate_cache_price_beats_no_cache_for_large_targets(self):
        p = QualityParams()
        for target in (1e3, 1e4, 1e5):
            cached = min_cost_with_cache(target, C_IN, C_OUT, 1.25 * C_IN, p)
            plain = min_cost_no_cache(target, C_IN, C_OUT, p)
            assert cached.cost < plain.cost
            assert cached.quality == pytest.approx(target, rel=1e-6)

    def test_never_worse_than_no_cache(self):
        rng = random.Random(3)
        p = QualityParams()
        for _ in range(20):
            target = rng.uniform(1, 1e4)
            cz = rng.uniform(0.5, 10) * C_IN
            assert (
                min_cost_with_cache(target, C_IN, C_OUT, cz, p).cost
                <= min_cost_no_cache(target, C_IN, C_OUT, p).cost * (1 + 1e-12)
            )

    def test_outer_search_matches_brute_force_over_z(self):
        p = QualityParams()
        target = 5e3
        cz = 1.25 * C_IN
        alloc = min_cost_with_cache(target, C_IN, C_OUT, cz, p)

        def total(z):
            eff = target * p.base_quality**p.gamma / (p.base_quality + z) ** p.gamma
            return min_cost_no_cache(eff, C_IN, C_OUT, p).cost + cz * z

        zs = [i * alloc.cache_tokens / 500 for i in range(1, 1001)]
        assert alloc.cost <= min(total(z) for z in zs) * (1 + 1e-9)


class TestSensitivityGrid:
    def test_zero_perturbation_grid_is_trivially_invariant(self):
        report = sensitivity_grid(
            QualityParams(), high_reuse_scenarios(SONNET)[:1], factors=(1.0,)
        )
        assert report.all_invariant
        assert report.results[0].valid_cells == 1

    def test_constraint_breaking_cells_are_flagged_excluded_reported(self):
        report = sensitivity_grid(QualityParams(), high_reuse_scenarios(SONNET)[:1])
        cells = report.results[0].cells
        assert len(cells) == 27
        all_up = next(c for c in cells if c.factors == (1.3, 1.3, 1.3))
        assert not all_up.valid
        assert "diminishing returns" in all_up.reason
        assert all_up.ranking is None
        # alpha up while beta down breaks alpha < beta
        skew = next(c for c in cells if c.factors == (1.3, 0.7, 1.0))
        assert not skew.valid and "alpha" in skew.reason
        assert report.results[0].valid_cells == 15

    def test_high_reuse_ranking_invariant_across_valid_cells(self):
        report = sensitivity_grid(QualityParams(), high_reuse_scenarios(SONNET))
        assert report.all_invariant
        for result in report.results:
            assert result.ranking == ("caching", "sliding_window", "full_history")
            for cell in result.cells:
                if cell.valid:
                    assert cell.ranking == result.ranking

    def test_empty_scenario_list_rejected(self):
        with pytest.raises(ValueError):
            sensitivity_grid(QualityParams(), [])

    def test_daily_costs_order_caching_cheapest_full_dearest(self):
        scenario = high_reuse_scenarios(SONNET)[0]
        costs = strategy_daily_costs(scenario, QualityParams())
        assert costs["caching"] < costs["sliding_window"] < costs["full_history"]


class TestExtremeInputs:
    def test_absurd_target_is_a_value_error_not_a_crash(self):
        # the 1/(alpha+beta) exponent exceeds 1, so this genuinely overflows
        with pytest.raises(ValueError, match="too large"):
            min_cost_no_cache(1e300, C_IN, C_OUT, QualityParams())

    def test_point_evaluation_cannot_overflow_for_finite_inputs(self):
        # exponents sum below 1, so Q stays under its largest input
        q = quality(1e300, 1e300, 1e300, QualityParams())
        assert q < 1e300 and q == pytest.approx(1e300 ** 0.85, rel=1e-6)
