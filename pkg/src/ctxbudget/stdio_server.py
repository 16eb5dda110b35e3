"""Newline-delimited stdio tool server for agent runtimes.

Requests are one JSON object per line: {"id": <caller string>, "tool":
<name>, "arguments": {...}}. Responses mirror the id and carry either
"result" or "error" {code, message}. The four tools are count_tokens,
estimate_budget, preview_turn, and list_models. Per-request failures never
end the loop; it is strictly sequential (read, compute, respond) and keeps
no history, so memory stays bounded by the largest single request. The
framing is a minimal protocol compatible in spirit with agent-tool
transports; a full Model Context Protocol handshake would wrap these same
handlers.
"""

from __future__ import annotations

import json
import sys

from . import documents
from .budget import ContextSnapshot, OverheadConstants, estimate_budget, preview_turn
from .registry import ModelNotFoundError, Registry, load_registry
from .relevance import TabRecord
from .tokenizer import TokenCounter, TokenizerError

ERROR_INVALID_REQUEST = "invalid_request"
ERROR_UNKNOWN_TOOL = "unknown_tool"
ERROR_INVALID_PARAMS = "invalid_params"
ERROR_NOT_FOUND = "not_found"


class ToolError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _require(args: dict, key: str):
    if key not in args:
        raise ToolError(ERROR_INVALID_PARAMS, f"missing argument {key!r}")
    return args[key]


def _model(args: dict, registry: Registry):
    query = _require(args, "model")
    try:
        return registry.find_model(str(query))
    except ModelNotFoundError as exc:
        raise ToolError(ERROR_NOT_FOUND, str(exc)) from None


def _tabs_from_manifest(entries) -> list[TabRecord]:
    if not isinstance(entries, list):
        raise ToolError(ERROR_INVALID_PARAMS, "tabs must be a list")
    tabs = []
    for entry in entries:
        if not isinstance(entry, dict) or "path" not in entry:
            raise ToolError(ERROR_INVALID_PARAMS, "each tab needs at least a path")
        tabs.append(
            TabRecord(
                path=entry["path"],
                language=entry.get("language", ""),
                content=entry.get("content"),
                tokens=entry.get("tokens"),
                last_edit_age=entry.get("last_edit_age"),
                diagnostics_count=entry.get("diagnostics", 0),
                pinned=bool(entry.get("pinned", False)),
                is_active=bool(entry.get("active", False)),
            )
        )
    return tabs


def _tool_count_tokens(args, registry, counter):
    profile = _model(args, registry)
    text = _require(args, "text")
    if not isinstance(text, str):
        raise ToolError(ERROR_INVALID_PARAMS, "text must be a string")
    return documents.count_document(counter.count(text, profile), profile)


def _tool_estimate_budget(args, registry, counter):
    profile = _model(args, registry)
    tabs = _tabs_from_manifest(args.get("tabs", []))
    snapshot = estimate_budget(
        tabs,
        profile,
        turn=int(args.get("turn", 0)),
        n_instr=int(args.get("instruction_files", 0)),
        constants=OverheadConstants(),
        counter=counter,
        measured_instr_tokens=args.get("measured_instr_tokens"),
    )
    return documents.snapshot_document(snapshot, profile)


def _tool_preview_turn(args, registry, counter):
    profile = _model(args, registry)
    snapshot = ContextSnapshot(
        per_tab=(),
        t_files=0,
        t_sys=0,
        t_instr=0,
        t_conv=0,
        t_out=int(_require(args, "t_out")),
        t_total=int(_require(args, "t_total")),
        turn=int(args.get("turn", 0)),
        profile_id=profile.id,
        context_window=profile.context_window,
        level="low",
        warnings=(),
    )
    preview = preview_turn(snapshot, int(args.get("next_user_tokens", 0)), profile)
    return documents.preview_document(preview)


def _tool_list_models(args, registry, counter):
    return documents.models_document(registry)


TOOLS = {
    "count_tokens": _tool_count_tokens,
    "estimate_budget": _tool_estimate_budget,
    "preview_turn": _tool_preview_turn,
    "list_models": _tool_list_models,
}


def handle_line(line: str, registry: Registry, counter: TokenCounter) -> dict:
    try:
        request = json.loads(line)
    except json.JSONDecodeError as exc:
        return {"id": None, "error": {"code": ERROR_INVALID_REQUEST, "message": f"malformed JSON: {exc}"}}
    if not isinstance(request, dict):
        return {"id": None, "error": {"code": ERROR_INVALID_REQUEST, "message": "request must be an object"}}
    request_id = request.get("id")
    tool = request.get("tool")
    args = request.get("arguments", {})
    if not isinstance(tool, str):
        return {"id": request_id, "error": {"code": ERROR_INVALID_REQUEST, "message": 'missing "tool" name'}}
    if not isinstance(args, dict):
        return {"id": request_id, "error": {"code": ERROR_INVALID_PARAMS, "message": "arguments must be an object"}}
    handler = TOOLS.get(tool)
    if handler is None:
        return {"id": request_id, "error": {"code": ERROR_UNKNOWN_TOOL, "message": f"unknown tool {tool!r}"}}
    try:
        return {"id": request_id, "result": handler(args, registry, counter)}
    except ToolError as exc:
        return {"id": request_id, "error": {"code": exc.code, "message": str(exc)}}
    except (TokenizerError, ValueError, TypeError) as exc:
        return {"id": request_id, "error": {"code": ERROR_INVALID_PARAMS, "message": str(exc)}}


def serve_stdio(
    registry: Registry | None = None,
    stdin=None,
    stdout=None,
    counter: TokenCounter | None = None,
) -> None:
    """Run the request loop until end-of-input. One response line per
    request line, in request order."""
    registry = registry or load_registry()
    counter = counter or TokenCounter()
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        response = handle_line(line, registry, counter)
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()
