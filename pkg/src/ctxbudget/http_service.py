"""Local read-only HTTP service mirroring the calculators.

Request and response bodies are identical to the CLI --json documents (the
same builders produce both, and responses are serialized here rather than
by the framework so the bytes match). Malformed or invariant-violating
bodies get a 400 with an error document. Binds to localhost by default;
no auth, not meant for remote deployment.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import documents
from .budget import OverheadConstants, estimate_budget
from .caching import CacheScenario, caching_roi
from .conversation import ConversationParams, FullHistory, SlidingWindow, Summarize, simulate
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
from .registry import ModelNotFoundError, Registry, load_registry
from .stdio_server import _tabs_from_manifest, ToolError
from .tokenizer import TokenCounter
from .usage import Phase, UsageError, UsageStore, aggregate

from datetime import date


class BadRequest(Exception):
    def __init__(self, message: str, code: str = "invalid_params"):
        super().__init__(message)
        self.code = code


def _json_response(doc, status: int = 200) -> Response:
    return Response(
        content=documents.canonical_json(doc) + "\n",
        status_code=status,
        media_type="application/json",
    )


def _error_response(message: str, code: str) -> Response:
    return _json_response({"error": {"code": code, "message": message}}, status=400)


def parse_strategy(obj) -> FullHistory | SlidingWindow | Summarize:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise BadRequest('strategy must be an object with a "kind"')
    kind = obj["kind"]
    if kind == "full":
        return FullHistory()
    if kind == "window":
        return SlidingWindow(window=int(obj.get("window", 5)))
    if kind == "summarize":
        return Summarize(ratio=float(obj.get("ratio", 0.2)), keep_last=int(obj.get("keep_last", 1)))
    raise BadRequest(f"unknown strategy kind {kind!r}")


def create_app(
    registry: Registry | None = None,
    counter: TokenCounter | None = None,
    store_path=None,
) -> FastAPI:
    registry = registry or load_registry()
    counter = counter or TokenCounter()
    app = FastAPI(title="ctxbudget", docs_url=None, redoc_url=None)
    # same-machine browser clients (the dashboard) only
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"http://(127\.0\.0\.1|localhost)(:\d+)?",
        allow_methods=["GET", "POST"],
        allow_headers=["content-type"],
    )

    async def _body(request: Request) -> dict:
        try:
            body = json.loads(await request.body() or b"{}")
        except json.JSONDecodeError as exc:
            raise BadRequest(f"malformed JSON body: {exc}", code="invalid_request") from None
        if not isinstance(body, dict):
            raise BadRequest("body must be a JSON object", code="invalid_request")
        return body

    def _model(body: dict):
        if "model" not in body:
            raise BadRequest('missing "model"')
        return registry.find_model(str(body["model"]))

    @app.exception_handler(BadRequest)
    async def _bad_request(_, exc: BadRequest):
        return _error_response(str(exc), exc.code)

    @app.exception_handler(ModelNotFoundError)
    async def _not_found(_, exc: ModelNotFoundError):
        return _error_response(str(exc), "not_found")

    @app.exception_handler(QualityParamError)
    async def _bad_params(_, exc: QualityParamError):
        return _error_response(str(exc), "invariant_violation")

    @app.exception_handler(ValueError)
    async def _value_error(_, exc: ValueError):
        return _error_response(str(exc), "invalid_params")

    @app.get("/models")
    async def models():
        return _json_response(documents.models_document(registry))

    @app.post("/budget")
    async def budget(request: Request):
        body = await _body(request)
        profile = _model(body)
        try:
            tabs = _tabs_from_manifest(body.get("tabs", []))
        except ToolError as exc:
            raise BadRequest(str(exc)) from None
        snapshot = estimate_budget(
            tabs,
            profile,
            turn=int(body.get("turn", 0)),
            n_instr=int(body.get("instruction_files", 0)),
            constants=OverheadConstants(),
            counter=counter,
            measured_instr_tokens=body.get("measured_instr_tokens"),
        )
        return _json_response(documents.snapshot_document(snapshot, profile))

    @app.post("/cache-roi")
    async def cache_roi(request: Request):
        body = await _body(request)
        if "tokens" not in body or "reuses" not in body:
            raise BadRequest('missing "tokens" or "reuses"')
        if "model" in body:
            scenario = CacheScenario.from_rule(
                int(body["tokens"]), int(body["reuses"]), _model(body).pricing
            )
        else:
            scenario = CacheScenario(
                cached_tokens=int(body["tokens"]),
                reuses_per_day=int(body["reuses"]),
                input_per_mtok=str(body.get("input_per_mtok", 0)),
                cache_write_per_mtok=str(body.get("cache_write_per_mtok", 0)),
                cache_read_per_mtok=str(body.get("cache_read_per_mtok", 0)),
            )
        return _json_response(documents.roi_document(caching_roi(scenario)))

    @app.post("/conversation")
    async def conversation(request: Request):
        body = await _body(request)
        params = ConversationParams(
            system_tokens=int(body.get("system_tokens", 0)),
            user_tokens=int(body.get("user_tokens", 0)),
            assistant_tokens=int(body.get("assistant_tokens", 0)),
            strategy=parse_strategy(body.get("strategy", {"kind": "full"})),
            turns=int(body.get("turns", 1)),
            pricing=_model(body).pricing,
        )
        return _json_response(documents.projection_document(params, simulate(params)))

    @app.post("/quality")
    async def quality_endpoint(request: Request):
        body = await _body(request)
        params = QualityParams(
            alpha=float(body.get("alpha", QualityParams().alpha)),
            beta=float(body.get("beta", QualityParams().beta)),
            gamma=float(body.get("gamma", QualityParams().gamma)),
            base_quality=float(body.get("base_quality", 1.0)),
        )
        mode = body.get("mode", "minimize")
        if mode == "point":
            q = quality(
                float(body.get("input_tokens", 0)),
                float(body.get("output_tokens", 0)),
                float(body.get("cache_tokens", 0)),
                params,
            )
            return _json_response(documents.quality_point_document(q, params, PARAMS_DISCLAIMER))
        profile = _model(body)
        cost_in = float(profile.pricing.input_per_mtok) / 1e6
        cost_out = float(profile.pricing.output_per_mtok) / 1e6
        cost_cache = float(profile.pricing.cache_write_per_mtok) / 1e6
        if mode == "minimize":
            if "target" not in body:
                raise BadRequest('missing "target" quality')
            target = float(body["target"])
            if body.get("with_cache"):
                alloc = min_cost_with_cache(target, cost_in, cost_out, cost_cache, params)
            else:
                alloc = min_cost_no_cache(target, cost_in, cost_out, params)
            return _json_response(documents.allocation_document(alloc, params, PARAMS_DISCLAIMER))
        if mode == "sensitivity":
            report = sensitivity_grid(params, high_reuse_scenarios(profile.pricing))
            return _json_response(documents.sensitivity_document(report))
        raise BadRequest(f"unknown mode {mode!r}")

    def _usage_doc(phases):
        store = UsageStore(store_path)
        summary = aggregate(store.load(), phases)
        return documents.usage_summary_document(summary)

    @app.get("/usage/report")
    async def usage_report():
        return _json_response(_usage_doc(()))

    @app.post("/usage/report")
    async def usage_report_phases(request: Request):
        body = await _body(request)
        try:
            phases = [
                Phase(p["name"], date.fromisoformat(p["start"]), date.fromisoformat(p["end"]))
                for p in body.get("phases", [])
            ]
        except (KeyError, TypeError, ValueError, UsageError) as exc:
            raise BadRequest(f"bad phases: {exc}") from None
        try:
            return _json_response(_usage_doc(phases))
        except UsageError as exc:
            raise BadRequest(str(exc)) from None

    return app


def serve_http(host: str = "127.0.0.1", port: int = 8787, registry=None, store_path=None) -> None:
    import uvicorn

    uvicorn.run(create_app(registry=registry, store_path=store_path), host=host, port=port)
