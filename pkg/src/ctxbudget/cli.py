"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error (bad files, unknown
models, invariant violations). Every calculator subcommand takes --json for
machine output; the documents are identical to the HTTP service bodies.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import date
from pathlib import Path

from . import documents
from .budget import (
    OverheadConstants,
    estimate_budget,
    format_status,
    preview_turn,
    scan_instructions,
)
from .caching import CacheScenario, caching_roi
from .conversation import (
    ConversationParams,
    FullHistory,
    SlidingWindow,
    Summarize,
    simulate,
    turns_for_budget,
)
from .money import usd
from .quality import (
    PARAMS_DISCLAIMER,
    QualityParamError,
    QualityParams,
    high_reuse_scenarios,
    min_cost_no_cache,
    min_cost_with_cache,
    quality,
    sensitivity_grid,
)
from .registry import (
    MODELS_FILE_ENV,
    ModelNotFoundError,
    RegistryError,
    bundled_models_path,
    load_registry,
    models_schema_path,
)
from .relevance import load_tab_manifest, optimize, score_tabs
from .tokenizer import TokenCounter, TokenizerError
from .usage import (
    METHOD_REGRESSION,
    METHOD_SMOOTHING,
    Phase,
    UsageError,
    UsageStore,
    aggregate,
    ingest_csv,
    project,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class DataError(Exception):
    """Wraps module errors into exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(doc, as_json: bool, human) -> None:
    if as_json:
        print(documents.canonical_json(doc))
    else:
        human()


def _registry(args):
    try:
        return load_registry(args.models_file)
    except RegistryError as exc:
        raise DataError(str(exc)) from None


def _find_model(registry, query):
    try:
        return registry.find_model(query)
    except ModelNotFoundError as exc:
        raise DataError(str(exc)) from None


def _load_tabs(path):
    try:
        return load_tab_manifest(path)
    except (OSError, KeyError, ValueError) as exc:
        raise DataError(f"cannot load tab manifest {path}: {exc}") from None


# --- subcommand handlers ----------------------------------------------------


def _cmd_models(args):
    registry = _registry(args)
    doc = documents.models_document(registry)

    def human():
        print(f"{'id':<20} {'provider':<10} {'window':>9} {'in $/MTok':>10} {'out $/MTok':>11}")
        for p in registry.list_models():
            print(
                f"{p.id:<20} {p.provider.value:<10} {p.context_window:>9,} "
                f"{p.pricing.input_per_mtok:>10} {p.pricing.output_per_mtok:>11}"
            )
        print(f"{len(registry)} models")

    _emit(doc, args.json, human)
    return EXIT_OK


def _cmd_check_models(args):
    import jsonschema

    path = Path(args.models_file) if args.models_file else bundled_models_path()
    schema = json.loads(models_schema_path().read_text(encoding="utf-8"))
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        jsonschema.validate(raw, schema)
        registry = load_registry(path)
    except (OSError, json.JSONDecodeError, RegistryError) as exc:
        print(f"INVALID: {exc}", file=sys.stderr)
        return EXIT_DATA
    except jsonschema.ValidationError as exc:
        print(f"INVALID: {exc.message} (at {'/'.join(str(p) for p in exc.absolute_path)})", file=sys.stderr)
        return EXIT_DATA
    print(f"OK: {path} ({len(registry)} models)")
    return EXIT_OK


def _read_text(args) -> str:
    if args.text is not None:
        return args.text
    if args.file:
        try:
            return Path(args.file).read_text(encoding="utf-8")
        except OSError as exc:
            raise DataError(str(exc)) from None
    return sys.stdin.read()


def _cmd_count(args):
    registry = _registry(args)
    profile = _find_model(registry, args.model)
    text = _read_text(args)
    try:
        tokens = TokenCounter(args.bpe_dir).count(text, profile)
    except TokenizerError as exc:
        raise DataError(str(exc)) from None
    _emit(
        documents.count_document(tokens, profile),
        args.json,
        lambda: print(f"{tokens} tokens ({profile.id})"),
    )
    return EXIT_OK


def _cmd_budget(args):
    registry = _registry(args)
    profile = _find_model(registry, args.model)
    tabs = _load_tabs(args.tabs) if args.tabs else []
    counter = TokenCounter(args.bpe_dir)
    measured = None
    n_instr = args.instruction_files
    if args.scan:
        files = scan_instructions(args.scan, profile, counter)
        n_instr = len(files)
        if args.measured:
            measured = sum(f.tokens for f in files)
    try:
        snapshot = estimate_budget(
            tabs,
            profile,
            turn=args.turn,
            n_instr=n_instr,
            constants=OverheadConstants(),
            counter=counter,
            measured_instr_tokens=measured,
        )
    except (ValueError, TokenizerError) as exc:
        raise DataError(str(exc)) from None
    doc = documents.snapshot_document(snapshot, profile)

    def human():
        print(format_status(snapshot, profile))
        print(
            f"files {snapshot.t_files:,} | sys {snapshot.t_sys:,} | "
            f"instr {snapshot.t_instr:,} | conv {snapshot.t_conv:,} | out {snapshot.t_out:,}"
        )
        print(f"level: {snapshot.level}")
        for w in snapshot.warnings:
            print(f"warning: {w}")
        if args.preview is not None:
            pv = preview_turn(snapshot, args.preview, profile)
            print(
                f"next turn: {pv.next_input_tokens:,} input tokens, {usd(pv.next_cost)}, "
                f"{pv.remaining_window:,} window left, {pv.turns_to_rot} turns to rot"
            )

    _emit(doc, args.json, human)
    return EXIT_OK


def _cmd_score(args):
    tabs = _load_tabs(args.tabs)
    breakdowns = score_tabs(tabs, threshold=args.threshold)
    doc = documents.scores_document(breakdowns)

    def human():
        print(f"{'path':<40} {'score':>6}  flags")
        for path, b in sorted(breakdowns.items()):
            flags = []
            if b.pinned_or_active:
                flags.append("pinned/active")
            if b.distractor:
                flags.append("distractor")
            print(f"{path:<40} {b.score:>6.2f}  {', '.join(flags)}")

    _emit(doc, args.json, human)
    return EXIT_OK


def _cmd_optimize(args):
    tabs = _load_tabs(args.tabs)
    report = optimize(tabs, threshold=args.threshold)
    doc = documents.optimize_document(report)

    def human():
        for t in report.distractors:
            b = report.breakdowns[t.path]
            print(f"close {t.path} (score {b.score:.2f})")
        print(f"kept {len(report.kept)} tabs, freed {report.freed_tokens:,} tokens")

    _emit(doc, args.json, human)
    return EXIT_OK


def _cmd_scan_instructions(args):
    registry = _registry(args)
    profile = _find_model(registry, args.model) if args.model else None
    try:
        files = scan_instructions(args.root, profile, TokenCounter(args.bpe_dir))
    except (OSError, TokenizerError) as exc:
        raise DataError(str(exc)) from None
    doc = documents.instructions_document(files)

    def human():
        for f in files:
            print(f"{f.path:<50} {f.tokens:>8,} tokens  ({f.pattern})")
        print(f"{len(files)} instruction files, {sum(f.tokens for f in files):,} tokens total")

    _emit(doc, args.json, human)
    return EXIT_OK


def _cmd_cache_roi(args):
    if args.model:
        registry = _registry(args)
        rule = _find_model(registry, args.model).pricing
        scenario = CacheScenario.from_rule(args.tokens, args.reuses, rule)
    else:
        if None in (args.input_rate, args.write_rate, args.read_rate):
            raise DataError("give --model or all of --input-rate/--write-rate/--read-rate")
        scenario = CacheScenario(
            cached_tokens=args.tokens,
            reuses_per_day=args.reuses,
            input_per_mtok=args.input_rate,
            cache_write_per_mtok=args.write_rate,
            cache_read_per_mtok=args.read_rate,
        )
    try:
        report = caching_roi(scenario)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    doc = documents.roi_document(report)

    def human():
        print(f"cached tokens        {scenario.cached_tokens:,}")
        print(f"reuses per day       {scenario.reuses_per_day}")
        print(f"write cost           {usd(report.write_cost)}")
        print(f"uncached daily       {usd(report.uncached_daily)}")
        print(f"cached daily         {usd(report.cached_daily)}")
        pct = f" ({report.savings_pct:.1f}%)" if report.savings_pct is not None else ""
        print(f"net savings          {usd(report.net_savings)}/day{pct}")
        be = report.break_even_reuses
        print(f"break-even reuses    {'never' if be is None else be}")

    _emit(doc, args.json, human)
    return EXIT_OK


def _strategy_from_args(args):
    if args.strategy == "full":
        return FullHistory()
    if args.strategy == "window":
        return SlidingWindow(window=args.window)
    return Summarize(ratio=args.ratio, keep_last=args.keep_last)


def _cmd_conversation(args):
    registry = _registry(args)
    rule = _find_model(registry, args.model).pricing
    strategy = _strategy_from_args(args)
    if args.budget is not None:
        turns = turns_for_budget(
            args.system, args.user, args.assistant, strategy, rule, str(args.budget)
        )
        _emit(
            {"strategy": args.strategy, "budget": str(args.budget), "affordable_turns": turns},
            args.json,
            lambda: print(f"{turns} affordable turns within ${args.budget}"),
        )
        return EXIT_OK
    try:
        params = ConversationParams(
            system_tokens=args.system,
            user_tokens=args.user,
            assistant_tokens=args.assistant,
            strategy=strategy,
            turns=args.turns,
            pricing=rule,
        )
    except ValueError as exc:
        raise DataError(str(exc)) from None
    proj = simulate(params)
    doc = documents.projection_document(params, proj)
    if args.dump_csv:
        with open(args.dump_csv, "w", encoding="utf-8") as fh:
            fh.write("turn,input_tokens,output_tokens,cost,cumulative_cost\n")
            for i in range(params.turns):
                fh.write(
                    f"{i + 1},{proj.per_turn_input[i]},{proj.per_turn_output[i]},"
                    f"{proj.per_turn_cost[i]},{proj.cumulative_cost[i]}\n"
                )

    def human():
        print(f"{'turn':>4} {'input':>10} {'output':>8} {'cost':>10} {'cumulative':>11}")
        for i in range(params.turns):
            print(
                f"{i + 1:>4} {proj.per_turn_input[i]:>10} {proj.per_turn_output[i]:>8} "
                f"{usd(proj.per_turn_cost[i]):>10} {usd(proj.cumulative_cost[i]):>11}"
            )
        print(f"growth class: {proj.growth_class}")

    _emit(doc, args.json, human)
    return EXIT_OK


def _quality_params(args, profile=None):
    try:
        base = QualityParams(alpha=args.alpha, beta=args.beta, gamma=args.gamma, base_quality=args.base)
        if profile is not None and args.scale_to_model:
            base = base.scaled(profile.quality_multiplier)
        return base
    except QualityParamError as exc:
        raise DataError(str(exc)) from None


def _cmd_quality(args):
    registry = _registry(args)
    profile = _find_model(registry, args.model)
    params = _quality_params(args, profile)
    cost_in = float(profile.pricing.input_per_mtok) / 1e6
    cost_out = float(profile.pricing.output_per_mtok) / 1e6
    cost_cache = float(profile.pricing.cache_write_per_mtok) / 1e6
    if args.mode == "point":
        q = quality(args.input_tokens, args.output_tokens, args.cache_tokens, params)
        doc = documents.quality_point_document(q, params, PARAMS_DISCLAIMER)
        _emit(doc, args.json, lambda: print(f"quality: {q:.6g}  [{PARAMS_DISCLAIMER}]"))
        return EXIT_OK
    if args.mode == "minimize":
        if args.target is None:
            raise DataError("minimize mode needs --target")
        try:
            if args.with_cache:
                alloc = min_cost_with_cache(args.target, cost_in, cost_out, cost_cache, params)
            else:
                alloc = min_cost_no_cache(args.target, cost_in, cost_out, params)
        except ValueError as exc:
            raise DataError(str(exc)) from None
        doc = documents.allocation_document(alloc, params, PARAMS_DISCLAIMER)

        def human():
            print(f"input tokens   {alloc.input_tokens:,.1f}")
            print(f"output tokens  {alloc.output_tokens:,.1f}")
            print(f"cache tokens   {alloc.cache_tokens:,.1f}")
            print(f"minimum cost   ${alloc.cost:.6f}")
            print(f"quality        {alloc.quality:.6g}  [{PARAMS_DISCLAIMER}]")

        _emit(doc, args.json, human)
        return EXIT_OK
    # sensitivity
    report = sensitivity_grid(params, high_reuse_scenarios(profile.pricing))
    doc = documents.sensitivity_document(report)

    def human():
        for r in report.results:
            ranking = " > ".join(r.ranking) if r.ranking else "NOT invariant"
            print(f"{r.scenario.label}: {ranking} ({r.valid_cells}/27 valid cells)")
        print(f"all scenarios invariant: {report.all_invariant}  [{PARAMS_DISCLAIMER}]")

    _emit(doc, args.json, human)
    return EXIT_OK


def _parse_phase(spec: str) -> Phase:
    try:
        name, start, end = spec.split(":")
        return Phase(name, date.fromisoformat(start), date.fromisoformat(end))
    except (ValueError, UsageError) as exc:
        raise DataError(f"bad phase spec {spec!r} (want name:YYYY-MM-DD:YYYY-MM-DD): {exc}") from None


def _cmd_usage(args):
    store = UsageStore(args.store)
    if args.usage_cmd == "import":
        try:
            result = ingest_csv(args.file)
        except (OSError, UsageError) as exc:
            raise DataError(str(exc)) from None
        store.append(result.records)
        print(f"imported {len(result.records)} records into {store.path}")
        for w in result.warnings:
            print(f"warning: {w}", file=sys.stderr)
        for r in result.rejected:
            print(f"rejected line {r.line_no}: {r.reason}", file=sys.stderr)
        return EXIT_DATA if result.rejected and not result.records else EXIT_OK
    if args.usage_cmd == "compact":
        removed = store.compact()
        print(f"removed {removed} duplicate rows")
        return EXIT_OK
    try:
        records = store.load()
    except UsageError as exc:
        raise DataError(str(exc)) from None
    if args.usage_cmd == "report":
        phases = [_parse_phase(s) for s in args.phase or []]
        try:
            summary = aggregate(records, phases)
        except UsageError as exc:
            raise DataError(str(exc)) from None
        doc = documents.usage_summary_document(summary)

        def human():
            print(f"range: {summary.start} .. {summary.end}")
            print(f"requests {summary.total_requests:,} | gross {usd(summary.gross)} | "
                  f"credits {usd(summary.credits)} | net {usd(summary.net)}")
            for row in summary.phases:
                print(f"  {row.name:<24} {row.requests:>8,} req  gross {usd(row.gross):>9}  net {usd(row.net):>9}")
            for row in summary.products:
                print(f"  [{row.name}] gross {usd(row.gross)} net {usd(row.net)}")

        _emit(doc, args.json, human)
        return EXIT_OK
    # project
    method = METHOD_REGRESSION if args.method == "regression" else METHOD_SMOOTHING
    try:
        forecast = project(records, args.horizon, method, smoothing=args.smoothing)
    except UsageError as exc:
        raise DataError(str(exc)) from None
    doc = documents.forecast_document(forecast)

    def human():
        for i, v in enumerate(forecast.values):
            print(f"day +{i + 1}: ${v:.2f}")

    _emit(doc, args.json, human)
    return EXIT_OK


def _cmd_serve(args):
    from .stdio_server import serve_stdio

    serve_stdio(_registry(args), counter=TokenCounter(args.bpe_dir))
    return EXIT_OK


def _cmd_serve_http(args):
    from .http_service import serve_http

    serve_http(host=args.host, port=args.port, registry=_registry(args), store_path=args.store)
    return EXIT_OK


# --- parser wiring -----------------------------------------------------------


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--models-file", default=None, help=f"model data file (or ${MODELS_FILE_ENV})")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--bpe-dir", default=None, help="directory of BPE table files")

    parser = _Parser(prog="ctxbudget", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("models", parents=[common], help="list model profiles")
    p.set_defaults(func=_cmd_models)

    p = sub.add_parser("check-models", parents=[common], help="validate a model data file")
    p.set_defaults(func=_cmd_check_models)

    p = sub.add_parser("count", parents=[common], help="count tokens")
    p.add_argument("--model", required=True)
    p.add_argument("--text")
    p.add_argument("--file")
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("budget", parents=[common], help="estimate the context budget")
    p.add_argument("--model", required=True)
    p.add_argument("--tabs", help="tab manifest file")
    p.add_argument("--turn", type=int, default=0)
    p.add_argument("--instruction-files", type=int, default=0, dest="instruction_files")
    p.add_argument("--scan", help="scan this workspace root for instruction files")
    p.add_argument("--measured", action="store_true", help="use measured instruction tokens instead of the flat constant")
    p.add_argument("--preview", type=int, default=None, metavar="NEXT_USER_TOKENS")
    p.set_defaults(func=_cmd_budget)

    p = sub.add_parser("score", parents=[common], help="score tab relevance")
    p.add_argument("--tabs", required=True)
    p.add_argument("--threshold", type=float, default=0.3)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("optimize", parents=[common], help="find distractor tabs to close")
    p.add_argument("--tabs", required=True)
    p.add_argument("--threshold", type=float, default=0.3)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("scan-instructions", parents=[common], help="find instruction files")
    p.add_argument("root")
    p.add_argument("--model")
    p.set_defaults(func=_cmd_scan_instructions)

    p = sub.add_parser("cache-roi", parents=[common], help="prompt caching break-even / ROI")
    p.add_argument("--tokens", type=int, required=True)
    p.add_argument("--reuses", type=int, required=True)
    p.add_argument("--model")
    p.add_argument("--input-rate", dest="input_rate", help="$/MTok")
    p.add_argument("--write-rate", dest="write_rate", help="$/MTok")
    p.add_argument("--read-rate", dest="read_rate", help="$/MTok")
    p.set_defaults(func=_cmd_cache_roi)

    p = sub.add_parser("conversation", parents=[common], help="multi-turn cost projection")
    p.add_argument("--model", required=True)
    p.add_argument("--system", type=int, default=2000)
    p.add_argument("--user", type=int, default=500)
    p.add_argument("--assistant", type=int, default=1500)
    p.add_argument("--turns", type=int, default=20)
    p.add_argument("--strategy", choices=["full", "window", "summarize"], default="full")
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--ratio", type=float, default=0.2)
    p.add_argument("--keep-last", type=int, default=1, dest="keep_last")
    p.add_argument("--budget", type=str, default=None, help="report affordable turns for this budget instead")
    p.add_argument("--dump-csv", help="write the per-turn table to this file")
    p.set_defaults(func=_cmd_conversation)

    p = sub.add_parser("quality", parents=[common], help="Cobb-Douglas quality / cost minimization")
    p.add_argument("mode", choices=["point", "minimize", "sensitivity"])
    p.add_argument("--model", required=True)
    p.add_argument("--alpha", type=float, default=QualityParams().alpha)
    p.add_argument("--beta", type=float, default=QualityParams().beta)
    p.add_argument("--gamma", type=float, default=QualityParams().gamma)
    p.add_argument("--base", type=float, default=1.0)
    p.add_argument("--scale-to-model", action="store_true", help="apply the profile quality multiplier")
    p.add_argument("--input-tokens", type=float, default=0.0, dest="input_tokens")
    p.add_argument("--output-tokens", type=float, default=0.0, dest="output_tokens")
    p.add_argument("--cache-tokens", type=float, default=0.0, dest="cache_tokens")
    p.add_argument("--target", type=float, default=None)
    p.add_argument("--with-cache", action="store_true", dest="with_cache")
    p.set_defaults(func=_cmd_quality)

    p = sub.add_parser("usage", parents=[common], help="billing import / report / projection")
    usage_sub = p.add_subparsers(dest="usage_cmd", required=True)
    pi = usage_sub.add_parser("import", parents=[common])
    pi.add_argument("file")
    pi.add_argument("--store")
    pr = usage_sub.add_parser("report", parents=[common])
    pr.add_argument("--store")
    pr.add_argument("--phase", action="append", help="name:YYYY-MM-DD:YYYY-MM-DD (repeatable)")
    pp = usage_sub.add_parser("project", parents=[common])
    pp.add_argument("--store")
    pp.add_argument("--horizon", type=int, default=7)
    pp.add_argument("--method", choices=["regression", "smoothing"], default="regression")
    pp.add_argument("--smoothing", type=float, default=0.3)
    pc = usage_sub.add_parser("compact", parents=[common])
    pc.add_argument("--store")
    p.set_defaults(func=_cmd_usage)

    p = sub.add_parser("serve", parents=[common], help="stdio tool server")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("serve-http", parents=[common], help="local HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--store")
    p.set_defaults(func=_cmd_serve_http)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
