"""Five-signal tab relevance scoring and distractor optimization.

Each open tab gets a score in [0, 1]: weighted sum of language match (0.25),
import relationship (0.30), path similarity (0.20), edit recency (0.15), and
diagnostics presence (0.10). Pinned and active tabs are overridden to 1.0.
Tabs scoring below the threshold (default 0.3) and not pinned/active are
distractors; closing them frees their token cost.

All functions are pure over immutable inputs.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path, PurePosixPath

WEIGHT_LANGUAGE = 0.25
WEIGHT_IMPORT = 0.30
WEIGHT_PATH = 0.20
WEIGHT_RECENCY = 0.15
WEIGHT_DIAGNOSTICS = 0.10

DEFAULT_THRESHOLD = 0.3

# Recency boundaries are half-open: [0, 120s) full credit, [120s, 600s)
# partial, stale or never-edited gets zero. 0.53 is the partial credit 0.08
# expressed as a fraction of the 0.15 recency weight.
RECENCY_FULL_SECONDS = 120.0
RECENCY_PARTIAL_SECONDS = 600.0
RECENCY_PARTIAL = 0.53


@dataclass(frozen=True)
class TabRecord:
    """Editor-agnostic description of one open file."""

    path: str
    language: str = ""
    content: str | None = None
    tokens: int | None = None
    last_edit_age: float | None = None  # seconds; None = never edited
    diagnostics_count: int = 0
    pinned: bool = False
    is_active: bool = False

    def __post_init__(self):
        if self.tokens is not None and self.tokens < 0:
            raise ValueError(f"{self.path}: token count must be >= 0")
        if self.diagnostics_count < 0:
            raise ValueError(f"{self.path}: diagnostics_count must be >= 0")


@dataclass(frozen=True)
class ScoreBreakdown:
    s_lang: float
    s_import: float
    s_path: float
    s_recency: float
    s_diag: float
    score: float
    pinned_or_active: bool
    distractor: bool


@dataclass(frozen=True)
class OptimizationReport:
    kept: tuple[TabRecord, ...]
    distractors: tuple[TabRecord, ...]
    breakdowns: dict[str, ScoreBreakdown]  # keyed by tab path
    freed_tokens: int


_TS_LANGS = {"typescript", "javascript", "typescriptreact", "javascriptreact", "ts", "tsx", "js", "jsx"}
_PY_LANGS = {"python", "py"}
_GO_LANGS = {"go", "golang"}
_JAVA_LANGS = {"java"}

_TS_IMPORT = re.compile(r"""import\s+(?:[^'"\n]*?\bfrom\s+)?['"]([^'"\n]+)['"]""")
_TS_REQUIRE = re.compile(r"""\brequire\(\s*['"]([^'"\n]+)['"]\s*\)""")
_PY_FROM = re.compile(r"^\s*from\s+([\w.]+)\s+import\b", re.MULTILINE)
_PY_IMPORT = re.compile(r"^\s*import\s+([\w.]+(?:\s*,\s*[\w.]+)*)", re.MULTILINE)
_GO_LINE = re.compile(r'^\s*import\s+(?:\w+\s+)?"([^"\n]+)"', re.MULTILINE)
_GO_BLOCK = re.compile(r"import\s*\(([^)]*)\)", re.DOTALL)
_GO_QUOTED = re.compile(r'"([^"\n]+)"')
_JAVA_IMPORT = re.compile(r"^\s*import\s+(?:static\s+)?([\w.]+?)\s*;", re.MULTILINE)
_GENERIC = re.compile(r"""\b(?:import|include)\b[^'"\n]*['"]([^'"\n]+)['"]""", re.IGNORECASE)

_CODE_SUFFIXES = (
    ".ts", ".tsx", ".js", ".jsx", ".mjs", ".cjs", ".py", ".go", ".java",
    ".json", ".css", ".vue", ".svelte",
)


def _normalize(name: str, dotted: bool = False) -> str:
    """Unify separators and strip extensions so detected names compare
    against extension-stripped tab paths."""
    name = name.strip()
    if dotted:
        name = name.split(" as ")[0].strip()
        return name.replace(".", "/")
    name = name.replace("\\", "/")
    while name.startswith("./") or name.startswith("../"):
        name = name[name.index("/") + 1 :]
    for suffix in _CODE_SUFFIXES:
        if name.endswith(suffix):
            name = name[: -len(suffix)]
            break
    return name.strip("/")


def detect_imports(active_content: str | None, language: str = "") -> frozenset[str]:
    """Referenced module names/paths in ``active_content``, normalized.

    Pattern families per language; unknown languages use the generic
    fallback (quoted path after the word import/include).
    """
    if not active_content:
        return frozenset()
    lang = language.lower()
    names: set[str] = set()
    if lang in _TS_LANGS:
        for m in _TS_IMPORT.finditer(active_content):
            names.add(_normalize(m.group(1)))
        for m in _TS_REQUIRE.finditer(active_content):
            names.add(_normalize(m.group(1)))
    elif lang in _PY_LANGS:
        for m in _PY_FROM.finditer(active_content):
            names.add(_normalize(m.group(1), dotted=True))
        for m in _PY_IMPORT.finditer(active_content):
            for mod in m.group(1).split(","):
                names.add(_normalize(mod, dotted=True))
    elif lang in _GO_LANGS:
        for m in _GO_LINE.finditer(active_content):
            names.add(_normalize(m.group(1)))
        for block in _GO_BLOCK.finditer(active_content):
            for m in _GO_QUOTED.finditer(block.group(1)):
                names.add(_normalize(m.group(1)))
    elif lang in _JAVA_LANGS:
        for m in _JAVA_IMPORT.finditer(active_content):
            names.add(_normalize(m.group(1), dotted=True))
    else:
        for m in _GENERIC.finditer(active_content):
            names.add(_normalize(m.group(1)))
    names.discard("")
    return frozenset(names)


def _stripped_path(path: str) -> str:
    path = path.replace("\\", "/")
    while path.startswith("./"):
        path = path[2:]
    for suffix in _CODE_SUFFIXES:
        if path.endswith(suffix):
            return path[: -len(suffix)]
    stem = PurePosixPath(path)
    return str(stem.with_suffix("")) if stem.suffix else path


def is_imported(tab_path: str, imports: frozenset[str]) -> bool:
    """Suffix match: a detected name matches a tab whose extension-stripped
    path ends with that name at a segment boundary. Checking the tab's d+1
    suffixes against the import set keeps the scoring pass O(n*d + I)."""
    stripped = _stripped_path(tab_path)
    parts = stripped.split("/")
    for i in range(len(parts)):
        if "/".join(parts[i:]) in imports:
            return True
    return False


def _dir_parts(path: str) -> tuple[str, ...]:
    return PurePosixPath(path.replace("\\", "/")).parts[:-1]


def path_similarity(tab_path: str, active_path: str) -> float:
    """Shared leading directory segments over the tab's directory depth.

    The filename does not count toward depth. Identical directories score
    1.0; a root-level tab against a nested active file scores 0.0.
    """
    tab_dirs = _dir_parts(tab_path)
    active_dirs = _dir_parts(active_path)
    if tab_dirs == active_dirs:
        return 1.0
    if not tab_dirs:
        return 0.0
    shared = 0
    for a, b in zip(tab_dirs, active_dirs):
        if a != b:
            break
        shared += 1
    return shared / len(tab_dirs)


def recency_signal(last_edit_age: float | None) -> float:
    if last_edit_age is None or last_edit_age < 0:
        return 0.0
    if last_edit_age < RECENCY_FULL_SECONDS:
        return 1.0
    if last_edit_age < RECENCY_PARTIAL_SECONDS:
        return RECENCY_PARTIAL
    return 0.0


def score_tab(
    tab: TabRecord,
    active: TabRecord | None,
    imports: frozenset[str] | None = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> ScoreBreakdown:
    """Score one tab against the active file.

    ``imports`` should be detect_imports(active.content, active.language),
    computed once per scoring pass; passing None recomputes it here.
    """
    if imports is None:
        imports = detect_imports(active.content, active.language) if active else frozenset()
    s_lang = 1.0 if active and tab.language and tab.language == active.language else 0.0
    s_import = 1.0 if active and is_imported(tab.path, imports) else 0.0
    s_path = path_similarity(tab.path, active.path) if active else 0.0
    s_recency = recency_signal(tab.last_edit_age)
    s_diag = 1.0 if tab.diagnostics_count > 0 else 0.0
    override = tab.pinned or tab.is_active
    if override:
        score = 1.0
    else:
        score = (
            WEIGHT_LANGUAGE * s_lang
            + WEIGHT_IMPORT * s_import
            + WEIGHT_PATH * s_path
            + WEIGHT_RECENCY * s_recency
            + WEIGHT_DIAGNOSTICS * s_diag
        )
    return ScoreBreakdown(
        s_lang=s_lang,
        s_import=s_import,
        s_path=s_path,
        s_recency=s_recency,
        s_diag=s_diag,
        score=score,
        pinned_or_active=override,
        distractor=not override and score < threshold,
    )


def _default_token_count(tab: TabRecord) -> int:
    if tab.tokens is not None:
        return tab.tokens
    if tab.content:
        return math.ceil(len(tab.content) / 4.0)
    return 0


def find_active(tabs) -> TabRecord | None:
    active = [t for t in tabs if t.is_active]
    if len(active) > 1:
        raise ValueError("at most one tab may be active per scoring call")
    return active[0] if active else None


def score_tabs(
    tabs,
    active: TabRecord | None = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> dict[str, ScoreBreakdown]:
    """Score every tab; imports are detected once from the active file."""
    tabs = list(tabs)
    if active is None:
        active = find_active(tabs)
    imports = detect_imports(active.content, active.language) if active else frozenset()
    return {t.path: score_tab(t, active, imports, threshold) for t in tabs}


def optimize(
    tabs,
    active: TabRecord | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    token_count=_default_token_count,
) -> OptimizationReport:
    """Partition tabs into kept set and distractor set; sum freed tokens.

    Tabs with neither content nor a token count score normally but
    contribute zero freed tokens.
    """
    tabs = list(tabs)
    breakdowns = score_tabs(tabs, active, threshold)
    kept, distractors = [], []
    for t in tabs:
        (distractors if breakdowns[t.path].distractor else kept).append(t)
    freed = sum(token_count(t) for t in distractors)
    return OptimizationReport(
        kept=tuple(kept),
        distractors=tuple(distractors),
        breakdowns=breakdowns,
        freed_tokens=freed,
    )


def load_tab_manifest(path: str | Path) -> list[TabRecord]:
    """Load the documented tab-manifest file (see docs/formats.md).

    Each entry: path (required), language, tokens, content or content_path,
    last_edit_age, diagnostics, pinned, active.
    """
    base = Path(path).parent
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    entries = raw["tabs"] if isinstance(raw, dict) else raw
    tabs = []
    for entry in entries:
        content = entry.get("content")
        if content is None and entry.get("content_path"):
            content = (base / entry["content_path"]).read_text(encoding="utf-8")
        tabs.append(
            TabRecord(
                path=entry["path"],
                language=entry.get("language", ""),
                content=content,
                tokens=entry.get("tokens"),
                last_edit_age=entry.get("last_edit_age"),
                diagnostics_count=entry.get("diagnostics", 0),
                pinned=bool(entry.get("pinned", False)),
                is_active=bool(entry.get("active", False)),
            )
        )
    return tabs
