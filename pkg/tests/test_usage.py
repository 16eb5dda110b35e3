import io
import random
from datetime import date
from decimal import Decimal

import pytest

from ctxbudget.usage import (
    METHOD_REGRESSION,
    METHOD_SMOOTHING,
    Phase,
    UsageError,
    UsageStore,
    aggregate,
    daily_net_series,
    ingest_csv,
    project,
)

from conftest import FIXTURES

SPRINT = Phase("sprint", date(2026, 2, 6), date(2026, 2, 11))
TAIL = Phase("tail", date(2026, 2, 12), date(2026, 3, 7))


class TestIngest:
    def test_header_only_file(self):
        result = ingest_csv(io.StringIO("date,sku,quantity,unit_price,gross,credit,net\n"))
        assert result.records == ()
        assert result.rejected == ()

    def test_peak_session_row(self):
        row = "2026-02-07,copilot_premium_request,244,0.04,9.76,0.00,9.76"
        result = ingest_csv(io.StringIO("date,sku,quantity,unit_price,gross,credit,net\n" + row))
        (rec,) = result.records
        assert rec.date == date(2026, 2, 7)
        assert rec.gross == Decimal("9.76")
        assert rec.quantity == 244
        assert result.warnings == ()

    def test_quantity_times_price_mismatch_warns_but_accepts(self):
        row = "2026-02-07,copilot_premium_request,244,0.04,9.99,0.00,9.99"
        result = ingest_csv(io.StringIO("date,sku,quantity,unit_price,gross,credit,net\n" + row))
        assert len(result.records) == 1
        assert any("quantity x unit price" in w for w in result.warnings)

    def test_missing_required_column(self):
        with pytest.raises(UsageError, match="missing required columns.*net"):
            ingest_csv(io.StringIO("date,sku,quantity,unit_price,gross,credit\n"))

    def test_bad_rows_rejected_with_line_numbers_good_rows_kept(self):
        body = (
            "date,sku,quantity,unit_price,gross,credit,net\n"
            "2026-02-07,copilot_premium_request,244,0.04,9.76,0.00,9.76\n"
            "not-a-date,copilot_premium_request,1,0.04,0.04,0,0.04\n"
            "2026-02-08,copilot_premium_request,1,0.04,banana,0,0.04\n"
            "2026-02-09,copilot_premium_request,10,0.04,0.40,0,0.40\n"
        )
        result = ingest_csv(io.StringIO(body))
        assert len(result.records) == 2
        assert [r.line_no for r in result.rejected] == [3, 4]
        assert "unparseable date" in result.rejected[0].reason
        assert "unparseable amount" in result.rejected[1].reason

    def test_header_aliases_accepted(self):
        body = "Day,Product,Qty,Unit Price,Gross,Credits,Net\n2026-02-07,x_request,2,0.04,0.08,0,0.08\n"
        result = ingest_csv(io.StringIO(body))
        assert result.records[0].quantity == 2

    def test_dollar_signs_and_commas_stripped(self):
        body = 'date,sku,quantity,unit_price,gross,credit,net\n2026-02-07,big_request,100000,$0.04,"$4,000.00",$0,"$4,000.00"\n'
        result = ingest_csv(io.StringIO(body))
        assert result.records[0].gross == Decimal("4000.00")

    def test_fixture_parses_clean(self, billing_csv):
        result = ingest_csv(billing_csv)
        assert len(result.records) == 30
        assert result.rejected == () and result.warnings == ()


class TestAggregate:
    def test_thirty_day_fixture_reproduces_published_totals(self, billing_csv):
        records = ingest_csv(billing_csv).records
        summary = aggregate(records, [SPRINT, TAIL])
        assert summary.total_requests == 1_413
        assert summary.gross == Decimal("56.52")
        assert summary.credits == Decimal("28.16")
        assert summary.net == Decimal("28.36")

    def test_phase_rows(self, billing_csv):
        records = ingest_csv(billing_csv).records
        summary = aggregate(records, [SPRINT, TAIL])
        rows = {r.name: r for r in summary.phases}
        assert rows["sprint"].requests == 911
        assert rows["sprint"].net == Decimal("25.00")
        assert rows["tail"].requests == 502
        assert rows["tail"].net == Decimal("3.36")

    def test_phase_nets_sum_to_total_to_the_cent(self, billing_csv):
        records = ingest_csv(billing_csv).records
        summary = aggregate(records, [SPRINT, TAIL])
        assert sum(r.net for r in summary.phases) == summary.net

    def test_unassigned_records_fall_into_other(self, billing_csv):
        records = ingest_csv(billing_csv).records
        summary = aggregate(records, [SPRINT])
        rows = {r.name: r for r in summary.phases}
        assert rows["other"].requests == 502

    def test_zero_records(self):
        summary = aggregate([])
        assert summary.total_requests == 0
        assert summary.gross == 0 and summary.net == 0
        assert summary.start is None

    def test_permutation_invariant(self, billing_csv):
        records = list(ingest_csv(billing_csv).records)
        shuffled = records[:]
        random.Random(5).shuffle(shuffled)
        assert aggregate(records, [SPRINT, TAIL]) == aggregate(shuffled, [SPRINT, TAIL])

    def test_overlapping_phases_rejected(self, billing_csv):
        records = ingest_csv(billing_csv).records
        with pytest.raises(UsageError, match="overlap"):
            aggregate(records, [SPRINT, Phase("clash", date(2026, 2, 10), date(2026, 2, 20))])

    def test_actions_minutes_do_not_count_as_requests(self):
        result = ingest_csv(FIXTURES / "copilot_billing_with_actions.csv")
        summary = aggregate(result.records)
        assert summary.total_requests == 244
        products = {r.name: r for r in summary.products}
        assert products["actions_linux_minutes"].gross == Decimal("1.57")
        assert products["actions_linux_minutes"].net == Decimal("0.00")


class TestProject:
    def _records(self, nets, start=date(2026, 1, 1)):
        from datetime import timedelta

        from ctxbudget.usage import UsageRecord

        return [
            UsageRecord(
                date=start + timedelta(days=i),
                sku="r_request",
                quantity=Decimal(1),
                unit_price=Decimal(n),
                gross=Decimal(n),
                credit=Decimal(0),
                net=Decimal(n),
            )
            for i, n in enumerate(nets)
        ]

    def test_constant_history_forecasts_constant(self):
        records = self._records(["1.00"] * 10)
        for method in (METHOD_REGRESSION, METHOD_SMOOTHING):
            forecast = project(records, 5, method)
            assert all(v == pytest.approx(1.0) for v in forecast.values)

    def test_linear_history_extrapolates_exactly(self):
        records = self._records([str(i) for i in range(1, 11)])  # 1..10
        forecast = project(records, 3, METHOD_REGRESSION)
        assert list(forecast.values) == pytest.approx([11.0, 12.0, 13.0])

    def test_regression_zero_residual_on_linear_series(self):
        records = self._records(["2.50", "5.00", "7.50", "10.00"])
        forecast = project(records, 1, METHOD_REGRESSION)
        assert forecast.values[0] == pytest.approx(12.5)

    def test_fixture_smoothing_golden_value(self, billing_csv):
        # hand-computed recursion: s_t = 0.3 x_t + 0.7 s_{t-1} over the
        # fixture's daily nets, final level held flat
        records = ingest_csv(billing_csv).records
        forecast = project(records, 7, METHOD_SMOOTHING, smoothing=0.3)
        assert len(forecast.values) == 7
        assert all(v == pytest.approx(0.0018313956772437784, rel=1e-12) for v in forecast.values)

    def test_smoothing_recursion_matches_straightline_oracle(self, billing_csv):
        records = ingest_csv(billing_csv).records
        series = [float(v) for _, v in daily_net_series(records)]
        lam = 0.45
        level = series[0]
        for x in series[1:]:
            level = lam * x + (1 - lam) * level
        forecast = project(records, 3, METHOD_SMOOTHING, smoothing=lam)
        assert forecast.values[0] == pytest.approx(level, rel=1e-12)

    def test_regression_needs_two_distinct_dates(self):
        records = self._records(["1.00"])
        with pytest.raises(UsageError, match="2 distinct dates"):
            project(records, 3, METHOD_REGRESSION)

    def test_bad_smoothing_factor(self, billing_csv):
        records = ingest_csv(billing_csv).records
        with pytest.raises(UsageError):
            project(records, 3, METHOD_SMOOTHING, smoothing=0.0)

    def test_forecast_starts_day_after_history(self, billing_csv):
        records = ingest_csv(billing_csv).records
        forecast = project(records, 1, METHOD_SMOOTHING)
        assert forecast.start == date(2026, 3, 8)


class TestStore:
    def test_roundtrip_is_lossless(self, tmp_path, billing_csv):
        records = ingest_csv(billing_csv).records
        store = UsageStore(tmp_path / "usage.jsonl")
        store.append(records)
        assert tuple(store.load()) == records

    def test_append_accumulates(self, tmp_path, billing_csv):
        records = ingest_csv(billing_csv).records
        store = UsageStore(tmp_path / "usage.jsonl")
        store.append(records[:10])
        store.append(records[10:])
        assert len(store.load()) == 30

    def test_compact_dedupes_by_identity_key(self, tmp_path, billing_csv):
        records = ingest_csv(billing_csv).records
        store = UsageStore(tmp_path / "usage.jsonl")
        store.append(records)
        store.append(records[:7])  # accidental double import
        assert store.compact() == 7
        assert len(store.load()) == 30

    def test_missing_store_loads_empty(self, tmp_path):
        assert UsageStore(tmp_path / "nope.jsonl").load() == []

    def test_version_mismatch_rejected(self, tmp_path):
        path = tmp_path / "usage.jsonl"
        path.write_text('{"store_version": 99}\n')
        with pytest.raises(UsageError, match="version"):
            UsageStore(path).load()
