"""Billing CSV ingestion, phase aggregation, and spend projections.

The documented column schema is: date, sku, quantity, unit_price, gross,
credit, net. A small alias table maps common alternative header spellings.
Amounts parse as exact decimals; bad rows are rejected with their line
number while ingestion continues. Records persist in an append-only JSONL
store with advisory locking (one writer, any readers).
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from decimal import Decimal, InvalidOperation
from pathlib import Path
from statistics import linear_regression

from filelock import FileLock

from .money import CENT, dec

STORE_ENV = "CTXBUDGET_USAGE_STORE"
STORE_VERSION = 1

COLUMNS = ("date", "sku", "quantity", "unit_price", "gross", "credit", "net")

HEADER_ALIASES = {
    "date": ("date", "usage_date", "usage date", "day"),
    "sku": ("sku", "product", "sku_name", "item"),
    "quantity": ("quantity", "qty", "units", "volume"),
    "unit_price": ("unit_price", "unit price", "price_per_unit", "list_price", "unit_price_usd"),
    "gross": ("gross", "gross_amount", "gross_cost", "gross_usd"),
    "credit": ("credit", "credits", "discount", "credit_usd"),
    "net": ("net", "net_amount", "net_cost", "net_usd"),
}

_DATE_FORMATS = ("%Y-%m-%d", "%m/%d/%Y", "%Y/%m/%d")


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class UsageRecord:
    date: date
    sku: str
    quantity: Decimal
    unit_price: Decimal
    gross: Decimal
    credit: Decimal
    net: Decimal

    @property
    def is_request_sku(self) -> bool:
        return "request" in self.sku.lower()


@dataclass(frozen=True)
class RejectedRow:
    line_no: int
    reason: str


@dataclass(frozen=True)
class IngestResult:
    records: tuple[UsageRecord, ...]
    rejected: tuple[RejectedRow, ...]
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class Phase:
    name: str
    start: date
    end: date  # inclusive

    def __post_init__(self):
        if self.end < self.start:
            raise UsageError(f"phase {self.name!r}: end before start")

    def contains(self, d: date) -> bool:
        return self.start <= d <= self.end


@dataclass(frozen=True)
class SummaryRow:
    name: str
    requests: Decimal
    gross: Decimal
    credit: Decimal
    net: Decimal


@dataclass(frozen=True)
class UsageSummary:
    start: date | None
    end: date | None
    total_requests: Decimal
    gross: Decimal
    credits: Decimal
    net: Decimal
    phases: tuple[SummaryRow, ...]
    products: tuple[SummaryRow, ...]


@dataclass(frozen=True)
class Forecast:
    method: str
    start: date
    values: tuple[float, ...]  # one per forecast day


def _parse_date(text: str) -> date:
    text = text.strip()
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    raise ValueError(f"unparseable date {text!r}")


def _parse_amount(text: str) -> Decimal:
    cleaned = text.strip().replace("$", "").replace(",", "")
    if not cleaned:
        return Decimal(0)
    try:
        return Decimal(cleaned)
    except InvalidOperation:
        raise ValueError(f"unparseable amount {text!r}") from None


def _resolve_headers(fieldnames) -> dict[str, str]:
    lowered = {name.strip().lower(): name for name in fieldnames if name}
    mapping = {}
    for column, aliases in HEADER_ALIASES.items():
        for alias in aliases:
            if alias in lowered:
                mapping[column] = lowered[alias]
                break
    missing = [c for c in COLUMNS if c not in mapping]
    if missing:
        raise UsageError(f"missing required columns: {', '.join(missing)}")
    return mapping


def ingest_csv(source) -> IngestResult:
    """Parse a billing CSV. Returns records plus rejected rows (with line
    numbers) and consistency warnings; valid rows always survive bad ones.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8-sig") as fh:
            return ingest_csv(fh)
    reader = csv.DictReader(source)
    if reader.fieldnames is None:
        raise UsageError("file is empty (no header row)")
    mapping = _resolve_headers(reader.fieldnames)
    records, rejected, warnings = [], [], []
    for row in reader:
        line_no = reader.line_num
        try:
            rec = UsageRecord(
                date=_parse_date(row[mapping["date"]] or ""),
                sku=(row[mapping["sku"]] or "").strip(),
                quantity=_parse_amount(row[mapping["quantity"]] or ""),
                unit_price=_parse_amount(row[mapping["unit_price"]] or ""),
                gross=_parse_amount(row[mapping["gross"]] or ""),
                credit=_parse_amount(row[mapping["credit"]] or ""),
                net=_parse_amount(row[mapping["net"]] or ""),
            )
        except ValueError as exc:
            rejected.append(RejectedRow(line_no=line_no, reason=str(exc)))
            continue
        if (rec.gross - rec.credit - rec.net).copy_abs() > CENT:
            warnings.append(
                f"line {line_no}: net {rec.net} differs from gross - credit "
                f"{rec.gross - rec.credit}"
            )
        if rec.is_request_sku and rec.quantity * rec.unit_price != rec.gross:
            warnings.append(
                f"line {line_no}: gross {rec.gross} differs from quantity x unit price "
                f"{rec.quantity * rec.unit_price}"
            )
        records.append(rec)
    return IngestResult(tuple(records), tuple(rejected), tuple(warnings))


def _sum_rows(name: str, records) -> SummaryRow:
    return SummaryRow(
        name=name,
        requests=sum((r.quantity for r in records if r.is_request_sku), Decimal(0)),
        gross=sum((r.gross for r in records), Decimal(0)),
        credit=sum((r.credit for r in records), Decimal(0)),
        net=sum((r.net for r in records), Decimal(0)),
    )


def aggregate(records, phases=()) -> UsageSummary:
    """Totals plus per-phase and per-product breakdowns. Records outside
    every phase fall into an "other" phase; phases must not overlap."""
    records = list(records)
    phases = list(phases)
    for i, a in enumerate(phases):
        for b in phases[i + 1 :]:
            if a.start <= b.end and b.start <= a.end:
                raise UsageError(f"phases {a.name!r} and {b.name!r} overlap")
    phase_rows = []
    assigned = set()
    for phase in phases:
        members = [r for r in records if phase.contains(r.date)]
        assigned.update(id(r) for r in members)
        phase_rows.append(_sum_rows(phase.name, members))
    leftovers = [r for r in records if id(r) not in assigned]
    if phases and leftovers:
        phase_rows.append(_sum_rows("other", leftovers))
    products = [
        _sum_rows(sku, [r for r in records if r.sku == sku])
        for sku in sorted({r.sku for r in records})
    ]
    total = _sum_rows("total", records)
    dates = [r.date for r in records]
    return UsageSummary(
        start=min(dates) if dates else None,
        end=max(dates) if dates else None,
        total_requests=total.requests,
        gross=total.gross,
        credits=total.credit,
        net=total.net,
        phases=tuple(phase_rows),
        products=tuple(products),
    )


def daily_net_series(records) -> list[tuple[date, Decimal]]:
    """Net cost per calendar date (UTC dates as parsed); gap days inside
    the observed range count as zero."""
    records = list(records)
    if not records:
        return []
    by_day: dict[date, Decimal] = {}
    for r in records:
        by_day[r.date] = by_day.get(r.date, Decimal(0)) + r.net
    first, last = min(by_day), max(by_day)
    series = []
    day = first
    while day <= last:
        series.append((day, by_day.get(day, Decimal(0))))
        day += timedelta(days=1)
    return series


METHOD_REGRESSION = "linear_regression"
METHOD_SMOOTHING = "exponential_smoothing"


def project(records, horizon_days: int, method: str, smoothing: float = 0.3) -> Forecast:
    """Forecast daily net spend.

    linear_regression: least-squares fit of daily net vs day index,
    extrapolated. exponential_smoothing: s_t = lambda*x_t + (1-lambda)*s_{t-1},
    final level held flat.
    """
    if horizon_days < 1:
        raise UsageError("horizon_days must be >= 1")
    series = daily_net_series(records)
    values = [float(v) for _, v in series]
    if method == METHOD_REGRESSION:
        if len({d for d, _ in series}) < 2:
            raise UsageError("linear regression needs at least 2 distinct dates")
        slope, intercept = linear_regression(range(len(values)), values)
        forecast = [intercept + slope * (len(values) + i) for i in range(horizon_days)]
    elif method == METHOD_SMOOTHING:
        if not 0 < smoothing <= 1:
            raise UsageError("smoothing factor must be in (0, 1]")
        if not values:
            raise UsageError("no records to project from")
        level = values[0]
        for x in values[1:]:
            level = smoothing * x + (1 - smoothing) * level
        forecast = [level] * horizon_days
    else:
        raise UsageError(f"unknown projection method {method!r}")
    start = series[-1][0] + timedelta(days=1)
    return Forecast(method=method, start=start, values=tuple(forecast))


# --- append-only local store ----------------------------------------------


def default_store_path() -> Path:
    env = os.environ.get(STORE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".ctxbudget" / "usage.jsonl"


def _record_to_obj(r: UsageRecord) -> dict:
    return {
        "date": r.date.isoformat(),
        "sku": r.sku,
        "quantity": str(r.quantity),
        "unit_price": str(r.unit_price),
        "gross": str(r.gross),
        "credit": str(r.credit),
        "net": str(r.net),
    }


def _record_from_obj(obj: dict) -> UsageRecord:
    return UsageRecord(
        date=date.fromisoformat(obj["date"]),
        sku=obj["sku"],
        quantity=dec(obj["quantity"]),
        unit_price=dec(obj["unit_price"]),
        gross=dec(obj["gross"]),
        credit=dec(obj["credit"]),
        net=dec(obj["net"]),
    )


class UsageStore:
    """Append-only JSONL record store, version-stamped in its first line."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else default_store_path()
        self._lock = FileLock(str(self.path) + ".lock")

    def append(self, records) -> int:
        records = list(records)
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            new_file = not self.path.exists()
            with open(self.path, "a", encoding="utf-8") as fh:
                if new_file:
                    fh.write(json.dumps({"store_version": STORE_VERSION}) + "\n")
                for r in records:
                    fh.write(json.dumps(_record_to_obj(r)) + "\n")
        return len(records)

    def load(self) -> list[UsageRecord]:
        if not self.path.exists():
            return []
        lines = self.path.read_text(encoding="utf-8").splitlines()
        if not lines:
            return []
        header = json.loads(lines[0])
        if header.get("store_version") != STORE_VERSION:
            raise UsageError(f"unsupported store version in {self.path}")
        return [_record_from_obj(json.loads(line)) for line in lines[1:] if line]

    def compact(self) -> int:
        """Deduplicate by (date, sku, quantity, gross); returns rows removed."""
        with self._lock:
            records = self.load()
            seen = set()
            kept = []
            for r in records:
                key = (r.date, r.sku, r.quantity, r.gross)
                if key in seen:
                    continue
                seen.add(key)
                kept.append(r)
            with open(self.path, "w", encoding="utf-8") as fh:
                fh.write(json.dumps({"store_version": STORE_VERSION}) + "\n")
                for r in kept:
                    fh.write(json.dumps(_record_to_obj(r)) + "\n")
        return len(records) - len(kept)
