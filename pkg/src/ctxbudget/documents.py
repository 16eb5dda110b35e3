"""Canonical JSON documents shared by the CLI --json output, the HTTP
service, and the stdio tool server.

Every calculator has exactly one document builder here so the three
surfaces emit byte-identical bodies. Dollar amounts serialize as exact
decimal strings; token counts as numbers.
"""

from __future__ import annotations

import json
from decimal import Decimal

from .budget import ContextSnapshot, InstructionFile, PreviewResult, format_status
from .caching import RoiReport
from .conversation import (
    ConversationParams,
    FullHistory,
    SlidingWindow,
    StrategyProjection,
    Summarize,
)
from .quality import Allocation, QualityParams, SensitivityReport
from .registry import ModelProfile, Registry, profile_to_entry
from .relevance import OptimizationReport, ScoreBreakdown
from .usage import Forecast, UsageSummary


def canonical_json(doc) -> str:
    """The one serialization used everywhere (keys stay in insertion
    order; documents are built deterministically)."""
    return json.dumps(doc, indent=2, allow_nan=False)


_MICRO = Decimal("0.000001")


def money(value: Decimal) -> str:
    """Plain fixed-point string, canonically 6 fractional digits."""
    micro = value.quantize(_MICRO)
    if micro == value:
        return f"{micro:f}"
    return f"{value.normalize():f}"


def _tokens(value):
    """Token quantities: int when integral (covers the Decimal summarize
    inputs), float otherwise."""
    if isinstance(value, int):
        return value
    if isinstance(value, Decimal):
        return int(value) if value == value.to_integral_value() else float(value)
    return value


def models_document(registry: Registry) -> dict:
    return {"models": [profile_to_entry(p) for p in registry.list_models()]}


def count_document(text_tokens: int, profile: ModelProfile) -> dict:
    return {"tokens": text_tokens, "model": profile.id}


def snapshot_document(snapshot: ContextSnapshot, profile: ModelProfile) -> dict:
    return {
        "profile_id": snapshot.profile_id,
        "context_window": snapshot.context_window,
        "turn": snapshot.turn,
        "per_tab": [
            {"path": u.path, "tokens": u.tokens, "relevance": u.relevance}
            for u in snapshot.per_tab
        ],
        "t_files": snapshot.t_files,
        "t_sys": snapshot.t_sys,
        "t_instr": snapshot.t_instr,
        "t_conv": snapshot.t_conv,
        "t_out": snapshot.t_out,
        "t_total": snapshot.t_total,
        "level": snapshot.level,
        "warnings": list(snapshot.warnings),
        "status": format_status(snapshot, profile),
    }


def preview_document(preview: PreviewResult) -> dict:
    return {
        "next_input_tokens": preview.next_input_tokens,
        "next_cost": money(preview.next_cost),
        "remaining_window": preview.remaining_window,
        "turns_to_rot": preview.turns_to_rot,
    }


def instructions_document(files: list[InstructionFile]) -> dict:
    return {
        "files": [{"path": f.path, "pattern": f.pattern, "tokens": f.tokens} for f in files],
        "total_tokens": sum(f.tokens for f in files),
    }


def breakdown_entry(b: ScoreBreakdown) -> dict:
    return {
        "signals": {
            "language": b.s_lang,
            "import": b.s_import,
            "path": b.s_path,
            "recency": b.s_recency,
            "diagnostics": b.s_diag,
        },
        "score": round(b.score, 6),
        "pinned_or_active": b.pinned_or_active,
        "distractor": b.distractor,
    }


def scores_document(breakdowns: dict[str, ScoreBreakdown]) -> dict:
    return {
        "tabs": [
            {"path": path, **breakdown_entry(b)}
            for path, b in sorted(breakdowns.items())
        ]
    }


def optimize_document(report: OptimizationReport) -> dict:
    return {
        "kept": [t.path for t in report.kept],
        "distractors": [
            {"path": t.path, **breakdown_entry(report.breakdowns[t.path])}
            for t in report.distractors
        ],
        "freed_tokens": report.freed_tokens,
    }


def roi_document(report: RoiReport) -> dict:
    s = report.scenario
    return {
        "cached_tokens": s.cached_tokens,
        "reuses_per_day": s.reuses_per_day,
        "rates": {
            "input_per_mtok": money(s.input_per_mtok),
            "cache_write_per_mtok": money(s.cache_write_per_mtok),
            "cache_read_per_mtok": money(s.cache_read_per_mtok),
        },
        "write_cost": money(report.write_cost),
        "uncached_daily": money(report.uncached_daily),
        "cached_daily": money(report.cached_daily),
        "net_savings": money(report.net_savings),
        "savings_pct": None if report.savings_pct is None else f"{report.savings_pct:.1f}",
        "break_even_reuses": report.break_even_reuses,
    }


def _strategy_obj(strategy) -> dict:
    if isinstance(strategy, FullHistory):
        return {"kind": "full"}
    if isinstance(strategy, SlidingWindow):
        return {"kind": "window", "window": strategy.window}
    return {"kind": "summarize", "ratio": strategy.ratio, "keep_last": strategy.keep_last}


def projection_document(p: ConversationParams, proj: StrategyProjection) -> dict:
    return {
        "strategy": _strategy_obj(p.strategy),
        "system_tokens": p.system_tokens,
        "user_tokens": p.user_tokens,
        "assistant_tokens": p.assistant_tokens,
        "turns": p.turns,
        "growth_class": proj.growth_class,
        "per_turn_input": [_tokens(v) for v in proj.per_turn_input],
        "per_turn_output": list(proj.per_turn_output),
        "per_turn_cost": [money(c) for c in proj.per_turn_cost],
        "cumulative_cost": [money(c) for c in proj.cumulative_cost],
        "total_input": _tokens(proj.total_input),
        "total_cost": money(proj.total_cost),
    }


def _params_obj(p: QualityParams) -> dict:
    return {
        "alpha": p.alpha,
        "beta": p.beta,
        "gamma": p.gamma,
        "base_quality": p.base_quality,
    }


def allocation_document(alloc: Allocation, params: QualityParams, disclaimer: str) -> dict:
    return {
        "params": _params_obj(params),
        "params_note": disclaimer,
        "input_tokens": alloc.input_tokens,
        "output_tokens": alloc.output_tokens,
        "cache_tokens": alloc.cache_tokens,
        "cost": alloc.cost,
        "quality": alloc.quality,
    }


def quality_point_document(q: float, params: QualityParams, disclaimer: str) -> dict:
    return {"params": _params_obj(params), "params_note": disclaimer, "quality": q}


def sensitivity_document(report: SensitivityReport) -> dict:
    return {
        "base_params": _params_obj(report.base),
        "params_note": report.disclaimer,
        "all_invariant": report.all_invariant,
        "scenarios": [
            {
                "label": r.scenario.label,
                "invariant": r.invariant,
                "ranking": list(r.ranking) if r.ranking else None,
                "valid_cells": r.valid_cells,
                "cells": [
                    {
                        "factors": list(c.factors),
                        "valid": c.valid,
                        "reason": c.reason,
                        "ranking": list(c.ranking) if c.ranking else None,
                        "daily_costs": None
                        if c.daily_costs is None
                        else {k: money(v) for k, v in c.daily_costs.items()},
                    }
                    for c in r.cells
                ],
            }
            for r in report.results
        ],
    }


def _row_obj(row) -> dict:
    return {
        "name": row.name,
        "requests": _tokens(row.requests),
        "gross": money(row.gross),
        "credit": money(row.credit),
        "net": money(row.net),
    }


def usage_summary_document(summary: UsageSummary) -> dict:
    return {
        "start": summary.start.isoformat() if summary.start else None,
        "end": summary.end.isoformat() if summary.end else None,
        "total_requests": _tokens(summary.total_requests),
        "gross": money(summary.gross),
        "credits": money(summary.credits),
        "net": money(summary.net),
        "phases": [_row_obj(r) for r in summary.phases],
        "products": [_row_obj(r) for r in summary.products],
    }


def forecast_document(f: Forecast) -> dict:
    return {
        "method": f.method,
        "start": f.start.isoformat(),
        "values": list(f.values),
    }
