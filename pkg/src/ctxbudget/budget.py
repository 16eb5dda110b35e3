"""Context budget snapshots: five-part decomposition, health levels,
instruction-file scanning, and next-turn preview.

Total estimated tokens decompose as

    t_total = t_files + t_sys + t_instr + t_conv + t_out

with t_files summed from open tabs and the other four driven by overhead
constants (empirically informed estimates of assistant context
construction; the real logic is proprietary, so these are upper bounds).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from decimal import Decimal
from fnmatch import fnmatch
from pathlib import Path, PurePosixPath

from . import relevance
from .registry import ModelProfile, Registry, price_request
from .tokenizer import TokenCounter

LEVEL_LOW = "low"
LEVEL_MEDIUM = "medium"
LEVEL_HIGH = "high"


@dataclass(frozen=True)
class OverheadConstants:
    sys_tokens: int = 2000
    instr_tokens_per_file: int = 500
    conv_tokens_per_turn: int = 800
    out_reserve: int = 4000

    def __post_init__(self):
        for name in ("sys_tokens", "instr_tokens_per_file", "conv_tokens_per_turn", "out_reserve"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class TabUsage:
    path: str
    tokens: int
    relevance: float | None  # None when no active tab was given


@dataclass(frozen=True)
class ContextSnapshot:
    per_tab: tuple[TabUsage, ...]
    t_files: int
    t_sys: int
    t_instr: int
    t_conv: int
    t_out: int
    t_total: int
    turn: int
    profile_id: str
    context_window: int
    level: str
    warnings: tuple[str, ...]

    @property
    def usage_pct(self) -> float:
        return 100.0 * self.t_total / self.context_window


@dataclass(frozen=True)
class InstructionFile:
    path: str
    pattern: str
    tokens: int


@dataclass(frozen=True)
class PreviewResult:
    next_input_tokens: int
    next_cost: Decimal
    remaining_window: int
    turns_to_rot: int


def classify_level(t_total: int, context_window: int) -> str:
    """low below 60% usage, high above 85%, medium between (both
    boundaries inclusive). Integer cross-multiplication keeps the
    thresholds exact."""
    if context_window <= 0:
        raise ValueError("context_window must be > 0")
    scaled = 100 * t_total
    if scaled < 60 * context_window:
        return LEVEL_LOW
    if scaled > 85 * context_window:
        return LEVEL_HIGH
    return LEVEL_MEDIUM


def _tab_tokens(tab: relevance.TabRecord, profile: ModelProfile, counter: TokenCounter) -> int:
    if tab.tokens is not None:
        return tab.tokens
    if tab.content is not None:
        return counter.count(tab.content, profile)
    return 0


def estimate_budget(
    tabs,
    profile: ModelProfile,
    turn: int = 0,
    n_instr: int = 0,
    constants: OverheadConstants = OverheadConstants(),
    counter: TokenCounter | None = None,
    measured_instr_tokens: int | None = None,
) -> ContextSnapshot:
    """Build a snapshot from open tabs plus the four overhead terms.

    ``measured_instr_tokens`` substitutes scanner-measured totals for the
    flat per-file instruction constant when given.
    """
    if turn < 0:
        raise ValueError("turn must be >= 0")
    if n_instr < 0:
        raise ValueError("n_instr must be >= 0")
    counter = counter or TokenCounter()
    tabs = list(tabs)
    active = relevance.find_active(tabs)
    breakdowns = relevance.score_tabs(tabs, active) if active else {}
    per_tab = tuple(
        TabUsage(
            path=t.path,
            tokens=_tab_tokens(t, profile, counter),
            relevance=breakdowns[t.path].score if active else None,
        )
        for t in tabs
    )
    t_files = sum(u.tokens for u in per_tab)
    t_sys = constants.sys_tokens
    if measured_instr_tokens is not None:
        t_instr = measured_instr_tokens
    else:
        t_instr = constants.instr_tokens_per_file * n_instr
    t_conv = constants.conv_tokens_per_turn * turn
    t_out = constants.out_reserve
    t_total = t_files + t_sys + t_instr + t_conv + t_out
    warnings = []
    if turn >= profile.rot_threshold:
        warnings.append(
            f"context rot risk: turn {turn} at or past rot threshold {profile.rot_threshold}"
        )
    if t_total > profile.context_window:
        warnings.append(
            f"over context window: {t_total} tokens exceed {profile.context_window}"
        )
    return ContextSnapshot(
        per_tab=per_tab,
        t_files=t_files,
        t_sys=t_sys,
        t_instr=t_instr,
        t_conv=t_conv,
        t_out=t_out,
        t_total=t_total,
        turn=turn,
        profile_id=profile.id,
        context_window=profile.context_window,
        level=classify_level(t_total, profile.context_window),
        warnings=tuple(warnings),
    )


# The nine instruction-file patterns, in fixed precedence order. A file
# matching several patterns is reported once, under the earliest.
INSTRUCTION_PATTERNS = (
    ".github/copilot-instructions.md",
    "CLAUDE.md",
    "AGENTS.md",
    ".cursorrules",
    "*.instructions.md",
    ".github/instructions/*",
    ".claude/*.md",
    ".copilot/skills/*",
    ".github/skills/*",
)


def _match_instruction(rel: PurePosixPath) -> str | None:
    rel_str = str(rel)
    parent = str(rel.parent)
    name = rel.name
    for pattern in INSTRUCTION_PATTERNS:
        if pattern == "*.instructions.md":
            # filename glob, any depth
            matched = fnmatch(name, pattern)
        elif pattern == ".claude/*.md":
            matched = parent == ".claude" and name.endswith(".md")
        elif pattern.endswith("/*"):
            # direct children of the named directory only
            matched = parent == pattern[:-2]
        else:
            matched = rel_str == pattern
        if matched:
            return pattern
    return None


def scan_instructions(
    workspace_root: str | Path,
    profile: ModelProfile | None = None,
    counter: TokenCounter | None = None,
) -> list[InstructionFile]:
    """Find instruction files under the nine known patterns and tokenize
    each with the active profile's encoder (heuristic 4 chars/token when no
    profile is given). Results are sorted by path, deduplicated, and
    independent of traversal order."""
    root = Path(workspace_root)
    if not root.is_dir():
        raise NotADirectoryError(f"workspace root {root} is not a readable directory")
    counter = counter or TokenCounter()
    found: dict[str, InstructionFile] = {}
    for path in root.rglob("*"):
        if not path.is_file():
            continue
        rel = PurePosixPath(path.relative_to(root).as_posix())
        pattern = _match_instruction(rel)
        if pattern is None or str(rel) in found:
            continue
        text = path.read_text(encoding="utf-8", errors="replace")
        if profile is not None:
            tokens = counter.count(text, profile)
        else:
            from .tokenizer import heuristic_count

            tokens = heuristic_count(text)
        found[str(rel)] = InstructionFile(path=str(rel), pattern=pattern, tokens=tokens)
    return sorted(found.values(), key=lambda f: f.path)


def preview_turn(
    snapshot: ContextSnapshot,
    next_user_tokens: int,
    profile: ModelProfile,
) -> PreviewResult:
    """Project the next turn: input resends everything but the output
    reserve, plus the new user message."""
    if next_user_tokens < 0:
        raise ValueError("next_user_tokens must be >= 0")
    next_input = snapshot.t_total - snapshot.t_out + next_user_tokens
    cost = price_request(next_input, 0, 0, 0, profile.pricing)
    return PreviewResult(
        next_input_tokens=next_input,
        next_cost=cost,
        remaining_window=profile.context_window - next_input,
        turns_to_rot=max(0, profile.rot_threshold - snapshot.turn),
    )


def _fmt_k(tokens: int) -> str:
    """85,200 -> "85.2K"; 262,000 -> "262K"; 0 -> "0K".

    One decimal below 100K (dropped when it is .0), nearest whole K above.
    """
    if tokens < 100_000:
        value = round(tokens / 1000, 1)
        if value == int(value):
            return f"{int(value)}K"
        return f"{value}K"
    return f"{round(tokens / 1000)}K"


def format_status(snapshot: ContextSnapshot, profile: ModelProfile) -> str:
    pct = 100.0 * snapshot.t_total / profile.context_window
    return (
        f"{_fmt_k(snapshot.t_total)} / {_fmt_k(profile.context_window)} "
        f"({pct:.1f}%) -- {profile.label}"
    )


class Session:
    """Mutable per-session state: active profile, turn counter, pin set.

    Single writer, many readers; all mutation happens under one lock.
    T_conv does not reset on model switch unless asked.
    """

    def __init__(
        self,
        registry: Registry,
        profile_id: str,
        constants: OverheadConstants = OverheadConstants(),
        counter: TokenCounter | None = None,
    ):
        self._lock = threading.RLock()
        self._registry = registry
        self._profile = registry.get(profile_id)
        self._constants = constants
        self._counter = counter or TokenCounter()
        self._turn = 0
        self._pins: set[str] = set()
        self._snapshot: ContextSnapshot | None = None

    @property
    def profile(self) -> ModelProfile:
        with self._lock:
            return self._profile

    @property
    def turn(self) -> int:
        with self._lock:
            return self._turn

    @property
    def current_snapshot(self) -> ContextSnapshot | None:
        with self._lock:
            return self._snapshot

    def record_turn(self) -> int:
        with self._lock:
            self._turn += 1
            return self._turn

    def reset(self) -> None:
        with self._lock:
            self._turn = 0
            self._snapshot = None

    def switch_model(self, query: str, reset_conversation: bool = False) -> ModelProfile:
        with self._lock:
            self._profile = self._registry.find_model(query)
            if reset_conversation:
                self._turn = 0
            return self._profile

    def pin(self, path: str) -> None:
        with self._lock:
            self._pins.add(path)

    def unpin(self, path: str) -> None:
        with self._lock:
            self._pins.discard(path)

    @property
    def pins(self) -> frozenset[str]:
        with self._lock:
            return frozenset(self._pins)

    def snapshot(self, tabs, n_instr: int = 0, measured_instr_tokens: int | None = None) -> ContextSnapshot:
        with self._lock:
            tabs = [
                replace(t, pinned=True) if t.path in self._pins and not t.pinned else t
                for t in tabs
            ]
            snap = estimate_budget(
                tabs,
                self._profile,
                turn=self._turn,
                n_instr=n_instr,
                constants=self._constants,
                counter=self._counter,
                measured_instr_tokens=measured_instr_tokens,
            )
            self._snapshot = snap
            return snap
