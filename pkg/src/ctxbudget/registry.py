"""Model registry: bundled model profiles, pricing rules, and fuzzy lookup.

The bundled data file ships 17 profiles (6 Anthropic, 7 OpenAI, 4 Google).
Prices are volatile placeholders -- edit ``data/models.json`` (or point
``CTXBUDGET_MODELS_FILE`` / ``--models-file`` at your own copy) after any
provider pricing update.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from importlib import resources
from pathlib import Path

from .money import dec, tokens_cost

MODELS_FILE_ENV = "CTXBUDGET_MODELS_FILE"
DEFAULT_ROT_THRESHOLD = 20


class Provider(Enum):
    ANTHROPIC = "Anthropic"
    OPENAI = "OpenAI"
    GOOGLE = "Google"


# Sort order for list_models: providers in declaration order, then id.
_PROVIDER_ORDER = {p: i for i, p in enumerate(Provider)}


class RegistryError(ValueError):
    """A model data file failed to parse or validate."""


class ModelNotFoundError(LookupError):
    """find_model had no match for the query."""


@dataclass(frozen=True)
class TokenizerKind:
    """Tagged union: kind 'bpe' carries an encoding name, 'heuristic' a
    chars-per-token divisor."""

    kind: str
    encoding: str | None = None
    chars_per_token: float | None = None

    def __post_init__(self):
        if self.kind == "bpe":
            if not self.encoding or self.chars_per_token is not None:
                raise RegistryError("bpe tokenizer kind requires exactly an encoding name")
        elif self.kind == "heuristic":
            if self.encoding is not None:
                raise RegistryError("heuristic tokenizer kind takes no encoding name")
            if self.chars_per_token is None:
                object.__setattr__(self, "chars_per_token", 4.0)
            if self.chars_per_token <= 0:
                raise RegistryError("chars_per_token must be positive")
        else:
            raise RegistryError(f"unknown tokenizer kind {self.kind!r}")


@dataclass(frozen=True)
class PricingRule:
    input_per_mtok: Decimal
    output_per_mtok: Decimal
    cache_write_per_mtok: Decimal
    cache_read_per_mtok: Decimal
    tier_threshold: int | None = None
    tier_multiplier: Decimal | None = None

    def __post_init__(self):
        for name in ("input_per_mtok", "output_per_mtok", "cache_write_per_mtok", "cache_read_per_mtok"):
            object.__setattr__(self, name, dec(getattr(self, name)))
            if getattr(self, name) < 0:
                raise RegistryError(f"{name} must be >= 0")
        if (self.tier_threshold is None) != (self.tier_multiplier is None):
            raise RegistryError("tier_threshold and tier_multiplier must be set together")
        if self.tier_multiplier is not None:
            object.__setattr__(self, "tier_multiplier", dec(self.tier_multiplier))
            if self.tier_multiplier <= 1:
                raise RegistryError("tier_multiplier must be > 1")
            if self.tier_threshold <= 0:
                raise RegistryError("tier_threshold must be > 0")


@dataclass(frozen=True)
class ModelProfile:
    id: str
    label: str
    provider: Provider
    context_window: int
    max_output: int
    rot_threshold: int
    tokenizer_kind: TokenizerKind
    pricing: PricingRule
    # Placeholder scalar applied to Cobb-Douglas quality params; see quality.py.
    quality_multiplier: float = 1.0

    def __post_init__(self):
        if not self.id:
            raise RegistryError("model id must be non-empty")
        if self.context_window <= 0:
            raise RegistryError(f"{self.id}: context_window must be > 0")
        if not 0 < self.max_output <= self.context_window:
            raise RegistryError(f"{self.id}: max_output must be in (0, context_window]")
        if self.rot_threshold <= 0:
            raise RegistryError(f"{self.id}: rot_threshold must be > 0")
        if self.quality_multiplier <= 0:
            raise RegistryError(f"{self.id}: quality_multiplier must be > 0")


class Registry:
    """Immutable collection of model profiles; safe for concurrent reads."""

    def __init__(self, profiles):
        profiles = tuple(profiles)
        seen = {}
        for p in profiles:
            if p.id in seen:
                raise RegistryError(f"duplicate model id {p.id!r}")
            seen[p.id] = p
        self._profiles = profiles
        self._by_id = seen

    def __len__(self):
        return len(self._profiles)

    def __iter__(self):
        return iter(self._profiles)

    def get(self, model_id: str) -> ModelProfile:
        try:
            return self._by_id[model_id]
        except KeyError:
            raise ModelNotFoundError(f"no model with id {model_id!r}") from None

    def list_models(self) -> list[ModelProfile]:
        """Profiles in deterministic order: provider, then id."""
        return sorted(self._profiles, key=lambda p: (_PROVIDER_ORDER[p.provider], p.id))

    def find_model(self, query: str) -> ModelProfile:
        """Exact id match wins; otherwise case-insensitive substring match on
        id and label. Ties break on longest common prefix with the query,
        then lexicographic id, so the result is always unique."""
        if query in self._by_id:
            return self._by_id[query]
        q = query.lower()
        hits = [p for p in self._profiles if q in p.id.lower() or q in p.label.lower()]
        if not hits:
            raise ModelNotFoundError(f"no model matching {query!r}")

        def prefix_len(text: str) -> int:
            n = 0
            for a, b in zip(q, text.lower()):
                if a != b:
                    break
                n += 1
            return n

        hits.sort(key=lambda p: (-max(prefix_len(p.id), prefix_len(p.label)), p.id))
        return hits[0]


def bundled_models_path() -> Path:
    return Path(resources.files("ctxbudget").joinpath("data/models.json"))


def models_schema_path() -> Path:
    return Path(resources.files("ctxbudget").joinpath("data/models.schema.json"))


_TOKENIZER_KEYS = {"kind", "encoding", "chars_per_token"}
_PRICING_KEYS = {
    "input_per_mtok",
    "output_per_mtok",
    "cache_write_per_mtok",
    "cache_read_per_mtok",
    "tier_threshold",
    "tier_multiplier",
}
_PROFILE_KEYS = {
    "id",
    "label",
    "provider",
    "context_window",
    "max_output",
    "rot_threshold",
    "tokenizer_kind",
    "pricing",
    "quality_multiplier",
}


def _parse_profile(entry: dict) -> ModelProfile:
    if not isinstance(entry, dict):
        raise RegistryError(f"model entry must be an object, got {type(entry).__name__}")
    ident = entry.get("id", "<missing id>")
    unknown = set(entry) - _PROFILE_KEYS
    if unknown:
        raise RegistryError(f"{ident}: unknown fields {sorted(unknown)}")
    missing = _PROFILE_KEYS - {"quality_multiplier"} - set(entry)
    if missing:
        raise RegistryError(f"{ident}: missing fields {sorted(missing)}")
    try:
        provider = Provider(entry["provider"])
    except ValueError:
        raise RegistryError(f"{ident}: unknown provider {entry['provider']!r}") from None
    tk = entry["tokenizer_kind"]
    if not isinstance(tk, dict) or set(tk) - _TOKENIZER_KEYS:
        raise RegistryError(f"{ident}: malformed tokenizer_kind")
    pr = entry["pricing"]
    if not isinstance(pr, dict) or set(pr) - _PRICING_KEYS:
        raise RegistryError(f"{ident}: malformed pricing")
    try:
        pricing = PricingRule(
            input_per_mtok=dec(str(pr["input_per_mtok"])),
            output_per_mtok=dec(str(pr["output_per_mtok"])),
            cache_write_per_mtok=dec(str(pr["cache_write_per_mtok"])),
            cache_read_per_mtok=dec(str(pr["cache_read_per_mtok"])),
            tier_threshold=pr.get("tier_threshold"),
            tier_multiplier=None if pr.get("tier_multiplier") is None else dec(str(pr["tier_multiplier"])),
        )
        return ModelProfile(
            id=entry["id"],
            label=entry["label"],
            provider=provider,
            context_window=int(entry["context_window"]),
            max_output=int(entry["max_output"]),
            rot_threshold=int(entry["rot_threshold"]),
            tokenizer_kind=TokenizerKind(**tk),
            pricing=pricing,
            quality_multiplier=float(entry.get("quality_multiplier", 1.0)),
        )
    except RegistryError as exc:
        raise RegistryError(f"{ident}: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise RegistryError(f"{ident}: {exc}") from None


def load_registry(source: str | Path | None = None) -> Registry:
    """Load and validate a registry. ``source`` defaults to the
    CTXBUDGET_MODELS_FILE environment variable, then the bundled file."""
    if source is None:
        source = os.environ.get(MODELS_FILE_ENV)
    path = Path(source) if source is not None else bundled_models_path()
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise RegistryError(f"cannot read model data file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise RegistryError(f"model data file {path} is not valid JSON: {exc}") from exc
    return parse_registry(raw)


def parse_registry(raw) -> Registry:
    if not isinstance(raw, dict) or "models" not in raw:
        raise RegistryError('model data must be an object with a "models" list')
    unknown = set(raw) - {"models", "notice"}
    if unknown:
        raise RegistryError(f"unknown top-level fields {sorted(unknown)}")
    models = raw["models"]
    if not isinstance(models, list):
        raise RegistryError('"models" must be a list')
    return Registry(_parse_profile(e) for e in models)


def _num(d: Decimal):
    """Emit a Decimal as int when integral, else float (data-file friendly)."""
    if d == d.to_integral_value():
        return int(d)
    return float(d)


def profile_to_entry(p: ModelProfile) -> dict:
    tk = {"kind": p.tokenizer_kind.kind}
    if p.tokenizer_kind.kind == "bpe":
        tk["encoding"] = p.tokenizer_kind.encoding
    else:
        tk["chars_per_token"] = p.tokenizer_kind.chars_per_token
    pricing = {
        "input_per_mtok": _num(p.pricing.input_per_mtok),
        "output_per_mtok": _num(p.pricing.output_per_mtok),
        "cache_write_per_mtok": _num(p.pricing.cache_write_per_mtok),
        "cache_read_per_mtok": _num(p.pricing.cache_read_per_mtok),
    }
    if p.pricing.tier_threshold is not None:
        pricing["tier_threshold"] = p.pricing.tier_threshold
        pricing["tier_multiplier"] = _num(p.pricing.tier_multiplier)
    return {
        "id": p.id,
        "label": p.label,
        "provider": p.provider.value,
        "context_window": p.context_window,
        "max_output": p.max_output,
        "rot_threshold": p.rot_threshold,
        "tokenizer_kind": tk,
        "pricing": pricing,
        "quality_multiplier": p.quality_multiplier,
    }


def serialize_registry(registry: Registry, notice: str | None = None) -> str:
    doc = {}
    if notice:
        doc["notice"] = notice
    doc["models"] = [profile_to_entry(p) for p in registry]
    return json.dumps(doc, indent=2) + "\n"


def price_request(
    input_tokens,
    output_tokens,
    cache_write_tokens,
    cache_read_tokens,
    rule: PricingRule,
) -> Decimal:
    """Exact dollar cost of one request.

    When a tier is configured and the total prompt (input + both cache
    components) exceeds the threshold, ALL input tokens are billed at
    input rate x multiplier, not only the excess.
    """
    counts = (input_tokens, output_tokens, cache_write_tokens, cache_read_tokens)
    if any(dec(c) < 0 for c in counts):
        raise ValueError("token counts must be >= 0")
    in_rate = rule.input_per_mtok
    prompt_tokens = dec(input_tokens) + dec(cache_write_tokens) + dec(cache_read_tokens)
    if rule.tier_threshold is not None and prompt_tokens > rule.tier_threshold:
        in_rate = in_rate * rule.tier_multiplier
    return (
        tokens_cost(input_tokens, in_rate)
        + tokens_cost(output_tokens, rule.output_per_mtok)
        + tokens_cost(cache_write_tokens, rule.cache_write_per_mtok)
        + tokens_cost(cache_read_tokens, rule.cache_read_per_mtok)
    )
