"""ctxbudget: editor-agnostic context-budget engine.

Token accounting, five-part budget decomposition, tab relevance scoring,
and closed-form cost economics (caching break-even, conversation strategy
simulation, Cobb-Douglas quality optimization) for AI-assisted coding
sessions.
"""

from .budget import (
    ContextSnapshot,
    OverheadConstants,
    PreviewResult,
    Session,
    classify_level,
    estimate_budget,
    format_status,
    preview_turn,
    scan_instructions,
)
from .caching import CacheScenario, RoiReport, break_even, caching_roi
from .conversation import (
    ConversationParams,
    FullHistory,
    SlidingWindow,
    StrategyProjection,
    Summarize,
    cumulative_full_closed_form,
    simulate,
    turns_for_budget,
)
from .quality import (
    Allocation,
    QualityParams,
    min_cost_no_cache,
    min_cost_with_cache,
    quality,
    sensitivity_grid,
)
from .registry import (
    ModelNotFoundError,
    ModelProfile,
    PricingRule,
    Provider,
    Registry,
    RegistryError,
    load_registry,
    price_request,
)
from .relevance import (
    OptimizationReport,
    ScoreBreakdown,
    TabRecord,
    detect_imports,
    optimize,
    path_similarity,
    score_tab,
)
from .tokenizer import TokenCounter, count_tokens, heuristic_error_report
from .usage import UsageRecord, UsageStore, aggregate, ingest_csv, project

__version__ = "0.1.0"
