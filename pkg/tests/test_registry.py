import json
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctxbudget.registry import (
    ModelNotFoundError,
    PricingRule,
    Provider,
    Registry,
    RegistryError,
    bundled_models_path,
    load_registry,
    parse_registry,
    price_request,
    serialize_registry,
)


def entry(model_id="m-1", provider="Anthropic", **overrides):
    base = {
        "id": model_id,
        "label": model_id.upper(),
        "provider": provider,
        "context_window": 200_000,
        "max_output": 32_000,
        "rot_threshold": 20,
        "tokenizer_kind": {"kind": "heuristic", "chars_per_token": 4.0},
        "pricing": {
            "input_per_mtok": 3.0,
            "output_per_mtok": 15.0,
            "cache_write_per_mtok": 3.75,
            "cache_read_per_mtok": 0.3,
        },
    }
    base.update(overrides)
    return base


class TestLoad:
    def test_bundled_has_17_profiles_split_6_7_4(self, registry):
        assert len(registry) == 17
        by_provider = {p: 0 for p in Provider}
        for profile in registry:
            by_provider[profile.provider] += 1
        assert by_provider[Provider.ANTHROPIC] == 6
        assert by_provider[Provider.OPENAI] == 7
        assert by_provider[Provider.GOOGLE] == 4

    def test_empty_list_is_a_valid_registry(self):
        reg = parse_registry({"models": []})
        assert len(reg) == 0
        assert reg.list_models() == []

    def test_duplicate_id_rejected(self):
        with pytest.raises(RegistryError, match="duplicate model id 'm-1'"):
            parse_registry({"models": [entry(), entry()]})

    def test_invariant_violation_names_the_entry(self):
        bad = entry(model_id="weird", max_output=999_999_999)
        with pytest.raises(RegistryError, match="weird"):
            parse_registry({"models": [bad]})

    def test_unknown_field_rejected(self):
        bad = entry()
        bad["surprise"] = 1
        with pytest.raises(RegistryError, match="surprise"):
            parse_registry({"models": [bad]})

    def test_parse_failure_reports_file(self, tmp_path):
        path = tmp_path / "models.json"
        path.write_text("{not json")
        with pytest.raises(RegistryError, match="not valid JSON"):
            load_registry(path)

    def test_roundtrip_is_idempotent(self, tmp_path, registry):
        once = serialize_registry(registry)
        path = tmp_path / "models.json"
        path.write_text(once)
        again = serialize_registry(load_registry(path))
        assert once == again

    def test_bundled_file_matches_schema(self):
        import jsonschema

        from ctxbudget.registry import models_schema_path

        raw = json.loads(bundled_models_path().read_text())
        schema = json.loads(models_schema_path().read_text())
        jsonschema.validate(raw, schema)

    def test_tier_fields_must_come_together(self):
        bad = entry()
        bad["pricing"]["tier_threshold"] = 200_000
        with pytest.raises(RegistryError, match="together"):
            parse_registry({"models": [bad]})


class TestFindModel:
    def test_exact_id_wins(self, registry):
        opus = registry.get("claude-opus-4-6")
        assert registry.find_model("claude-opus-4-6") is opus

    def test_case_insensitive_substring_on_label(self, registry):
        # oracle: enumerate all 17 labels, the query must hit exactly one
        hits = [
            p for p in registry
            if "sonnet 4.5" in p.id.lower() or "sonnet 4.5" in p.label.lower()
        ]
        assert len(hits) == 1
        assert registry.find_model("Sonnet 4.5") is hits[0]

    def test_not_found(self, registry):
        with pytest.raises(ModelNotFoundError):
            registry.find_model("zzz-nonexistent")

    def test_round_trip_for_every_profile(self, registry):
        for profile in registry:
            assert registry.find_model(profile.id) is profile

    def test_tie_break_prefers_longest_prefix_then_lexicographic(self):
        reg = parse_registry({"models": [entry("abc-beta"), entry("abc-alpha"), entry("abx")]})
        # "abc" is a substring of all three; prefix length 3 beats 2,
        # then abc-alpha < abc-beta
        assert reg.find_model("abc").id == "abc-alpha"


class TestListModels:
    def test_bundled_order_is_provider_then_id(self, registry):
        models = registry.list_models()
        assert len(models) == 17
        keys = [({"Anthropic": 0, "OpenAI": 1, "Google": 2}[p.provider.value], p.id) for p in models]
        assert keys == sorted(keys)

    def test_stable_across_calls(self, registry):
        assert [p.id for p in registry.list_models()] == [p.id for p in registry.list_models()]

    def test_empty_registry(self):
        assert Registry([]).list_models() == []


def rule(c_in="5", tier=None, mult=None):
    return PricingRule(
        input_per_mtok=Decimal(c_in),
        output_per_mtok=Decimal("25"),
        cache_write_per_mtok=Decimal("6.25"),
        cache_read_per_mtok=Decimal("0.5"),
        tier_threshold=tier,
        tier_multiplier=None if mult is None else Decimal(mult),
    )


def loop_price_oracle(input_tokens, rule):
    """Independent per-token pricing: walk every input token and charge it
    at the (possibly tier-doubled) input rate."""
    crossed = rule.tier_threshold is not None and input_tokens > rule.tier_threshold
    per_token = rule.input_per_mtok / 1_000_000
    if crossed:
        per_token *= rule.tier_multiplier
    total = Decimal(0)
    for _ in range(input_tokens):
        total += per_token
    return total


class TestPriceRequest:
    def test_200k_input_at_5_per_mtok_is_one_dollar(self):
        assert price_request(200_000, 0, 0, 0, rule()) == Decimal("1")

    def test_zero_everywhere_is_zero(self):
        assert price_request(0, 0, 0, 0, rule()) == 0

    def test_tier_crossing_bills_every_token_at_doubled_rate(self):
        r = rule(tier=200_000, mult="2.0")
        got = price_request(250_000, 0, 0, 0, r)
        assert got == Decimal("2.50")
        assert got == loop_price_oracle(250_000, r)

    def test_just_below_threshold_uses_base_rate(self):
        r = rule(tier=200_000, mult="2.0")
        assert price_request(200_000, 0, 0, 0, r) == Decimal("1.00")

    def test_cache_components_count_toward_threshold(self):
        r = rule(tier=200_000, mult="2.0")
        # 150K input + 60K cache read crosses; input doubles, read rate unchanged
        got = price_request(150_000, 0, 0, 60_000, r)
        assert got == Decimal("150000") * 10 / 1_000_000 + Decimal("60000") / 2 / 1_000_000

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            price_request(-1, 0, 0, 0, rule())

    @given(tokens=st.integers(min_value=0, max_value=199_000), delta=st.integers(min_value=1, max_value=500))
    def test_linear_below_threshold(self, tokens, delta):
        r = rule(tier=200_000, mult="2.0")
        a = price_request(tokens, 0, 0, 0, r)
        b = price_request(tokens + delta, 0, 0, 0, r)
        assert b - a == Decimal(delta) * r.input_per_mtok / 1_000_000

    def test_single_discontinuity_at_threshold(self):
        r = rule(tier=200_000, mult="2.0")
        below = price_request(200_000, 0, 0, 0, r)
        above = price_request(200_001, 0, 0, 0, r)
        # for inputs epsilon above the threshold the whole prompt reprices
        epsilon_rate = Decimal(1) * r.input_per_mtok * r.tier_multiplier / 1_000_000
        assert above >= r.tier_multiplier * below - epsilon_rate

    @given(st.integers(min_value=200_001, max_value=400_000))
    @settings(max_examples=25)
    def test_above_threshold_matches_closed_form(self, tokens):
        r = rule(tier=200_000, mult="2.0")
        assert price_request(tokens, 0, 0, 0, r) == Decimal(tokens) * 10 / 1_000_000


class TestEnvOverride:
    def test_models_file_env_var_overrides_bundled(self, tmp_path, monkeypatch):
        path = tmp_path / "models.json"
        path.write_text('{"models": []}')
        monkeypatch.setenv("CTXBUDGET_MODELS_FILE", str(path))
        assert len(load_registry()) == 0

    def test_explicit_source_beats_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CTXBUDGET_MODELS_FILE", "/nonexistent.json")
        assert len(load_registry(bundled_models_path())) == 17
