import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctxbudget.relevance import (
    DEFAULT_THRESHOLD,
    RECENCY_PARTIAL,
    TabRecord,
    WEIGHT_DIAGNOSTICS,
    WEIGHT_IMPORT,
    WEIGHT_LANGUAGE,
    WEIGHT_PATH,
    WEIGHT_RECENCY,
    detect_imports,
    load_tab_manifest,
    optimize,
    path_similarity,
    recency_signal,
    score_tab,
    score_tabs,
)

ACTIVE = TabRecord(
    path="src/app/main.ts",
    language="typescript",
    content="import {x} from './lib/scoring'\nimport util from '../util/paths'\n",
    is_active=True,
)


class TestDetectImports:
    def test_empty_content(self):
        assert detect_imports("", "python") == frozenset()
        assert detect_imports(None, "python") == frozenset()

    def test_python_from_import(self):
        assert detect_imports("from utils.math import add", "python") == {"utils/math"}

    def test_python_plain_and_comma_imports(self):
        got = detect_imports("import os, json\nimport numpy as np", "python")
        assert got == {"os", "json", "numpy"}

    def test_ts_import_from(self):
        assert detect_imports("import {x} from './lib/scoring'", "typescript") == {"lib/scoring"}

    def test_ts_require(self):
        assert detect_imports("const fs = require('node:fs')", "javascript") == {"node:fs"}

    def test_go_import_block(self):
        content = 'import (\n\t"fmt"\n\t"example.com/pkg/store"\n)\n'
        assert detect_imports(content, "go") == {"fmt", "example.com/pkg/store"}

    def test_go_single_import(self):
        assert detect_imports('import "strings"', "go") == {"strings"}

    def test_java_import(self):
        got = detect_imports("import com.example.app.Config;", "java")
        assert got == {"com/example/app/Config"}

    def test_generic_fallback_for_unknown_language(self):
        got = detect_imports('#include "lib/vector.h"', "cpp")
        assert got == {"lib/vector.h"}

    def test_extension_stripped_and_separators_unified(self):
        assert detect_imports("import x from './a/b.ts'", "typescript") == {"a/b"}


class TestPathSimilarity:
    def test_same_directory_is_one(self):
        assert path_similarity("src/a/x.ts", "src/a/y.ts") == 1.0

    def test_disjoint_is_zero(self):
        assert path_similarity("docs/readme.md", "src/a/y.ts") == 0.0

    def test_partial_overlap(self):
        assert path_similarity("src/a/b/x.ts", "src/a/c/y.ts") == pytest.approx(2 / 3)

    def test_both_at_root(self):
        assert path_similarity("x.ts", "y.ts") == 1.0

    def test_root_tab_against_nested_active(self):
        assert path_similarity("x.ts", "src/a/y.ts") == 0.0


class TestRecency:
    def test_boundaries_are_half_open(self):
        assert recency_signal(0) == 1.0
        assert recency_signal(119.9) == 1.0
        assert recency_signal(120) == RECENCY_PARTIAL
        assert recency_signal(599.9) == RECENCY_PARTIAL
        assert recency_signal(600) == 0.0

    def test_never_edited_is_zero(self):
        assert recency_signal(None) == 0.0


def straight_line_score(s_lang, s_import, s_path, s_recency, s_diag):
    """Independent evaluation of the weighted sum, written longhand."""
    total = 0.0
    total = total + 0.25 * s_lang
    total = total + 0.30 * s_import
    total = total + 0.20 * s_path
    total = total + 0.15 * s_recency
    total = total + 0.10 * s_diag
    return total


class TestScoreTab:
    def test_pinned_tab_with_zero_signals_scores_one(self):
        tab = TabRecord(path="notes/todo.txt", language="plaintext", pinned=True)
        b = score_tab(tab, ACTIVE)
        assert b.score == 1.0
        assert b.pinned_or_active
        assert not b.distractor

    def test_all_signals_max_sums_to_exactly_one(self):
        tab = TabRecord(
            path="src/app/lib/scoring.ts",
            language="typescript",
            last_edit_age=60,
            diagnostics_count=2,
        )
        active = TabRecord(
            path="src/app/lib/main.ts",
            language="typescript",
            content="import {x} from './lib/scoring'",
            is_active=True,
        )
        b = score_tab(tab, active)
        assert (b.s_lang, b.s_import, b.s_path, b.s_recency, b.s_diag) == (1, 1, 1, 1, 1)
        assert b.score == 0.25 + 0.30 + 0.20 + 0.15 + 0.10 == 1.0

    def test_all_signals_zero_is_distractor(self):
        tab = TabRecord(path="config/settings.yml", language="yaml")
        b = score_tab(tab, ACTIVE)
        assert b.score == 0.0
        assert b.distractor

    def test_language_only_scores_exactly_quarter_and_flags(self):
        tab = TabRecord(path="vendor/other.ts", language="typescript")
        b = score_tab(tab, ACTIVE)
        assert b.score == 0.25
        assert b.distractor  # 0.25 < 0.3

    def test_weights_sum_to_one(self):
        assert WEIGHT_LANGUAGE + WEIGHT_IMPORT + WEIGHT_PATH + WEIGHT_RECENCY + WEIGHT_DIAGNOSTICS == 1.0

    def test_matches_straight_line_oracle_for_all_32_combinations(self):
        for s_lang, s_imp, s_path, s_rec, s_diag in itertools.product((0, 1), repeat=5):
            tab_path = "src/app/lib/scoring.ts" if s_path else "elsewhere/deep/file.ts"
            tab = TabRecord(
                path=tab_path,
                language="typescript" if s_lang else "json",
                last_edit_age=30 if s_rec else None,
                diagnostics_count=1 if s_diag else 0,
            )
            active = TabRecord(
                path="src/app/lib/main.ts",
                language="typescript",
                content=f"import {{x}} from './{tab_path[:-3]}'" if s_imp else "",
                is_active=True,
            )
            b = score_tab(tab, active)
            want = straight_line_score(s_lang, s_imp, s_path, s_rec, s_diag)
            assert b.score == pytest.approx(want, abs=1e-12)
            assert b.distractor == (want < DEFAULT_THRESHOLD)

    @given(
        s_path=st.floats(min_value=0, max_value=1),
        recency=st.sampled_from([None, 30.0, 300.0, 3000.0]),
        lang=st.booleans(),
        imp=st.booleans(),
        diag=st.booleans(),
    )
    def test_score_always_in_unit_interval(self, s_path, recency, lang, imp, diag):
        score = (
            WEIGHT_LANGUAGE * lang
            + WEIGHT_IMPORT * imp
            + WEIGHT_PATH * s_path
            + WEIGHT_RECENCY * recency_signal(recency)
            + WEIGHT_DIAGNOSTICS * diag
        )
        assert 0.0 <= score <= 1.0

    def test_raising_one_signal_never_lowers_score(self):
        base = TabRecord(path="other/file.ts", language="json")
        better_lang = TabRecord(path="other/file.ts", language="typescript")
        better_rec = TabRecord(path="other/file.ts", language="json", last_edit_age=10)
        better_diag = TabRecord(path="other/file.ts", language="json", diagnostics_count=3)
        b0 = score_tab(base, ACTIVE).score
        assert score_tab(better_lang, ACTIVE).score >= b0
        assert score_tab(better_rec, ACTIVE).score >= b0
        assert score_tab(better_diag, ACTIVE).score >= b0


def example_workspace():
    """23 tabs: the worked optimization example. 12 config tabs with all
    five signals zero total 18,000 tokens; the active tab plus 10 related
    source tabs total 67,200."""
    active = TabRecord(
        path="src/app/main.tsx",
        language="typescriptreact",
        content="\n".join(f"import c{i} from './components/c{i}'" for i in range(10)),
        tokens=6_200,
        is_active=True,
    )
    related = [
        TabRecord(
            path=f"src/app/components/c{i}.tsx",
            language="typescriptreact",
            tokens=6_100,
        )
        for i in range(10)
    ]
    configs = [
        TabRecord(path=f"config/settings{i}.json", language="json", tokens=1_500)
        for i in range(12)
    ]
    return [active] + related + configs


class TestOptimize:
    def test_all_pinned_frees_nothing(self):
        tabs = [TabRecord(path=f"t{i}.yml", language="yaml", tokens=100, pinned=True) for i in range(4)]
        report = optimize(tabs)
        assert report.distractors == ()
        assert report.freed_tokens == 0

    def test_example_workspace_frees_18k_of_85k(self):
        tabs = example_workspace()
        assert sum(t.tokens for t in tabs) == 85_200
        report = optimize(tabs)
        assert report.freed_tokens == 18_000
        assert len(report.distractors) == 12
        assert len(report.kept) == 11
        reduction = 100 * report.freed_tokens / 85_200
        assert 21.1 <= reduction <= 21.3

    def test_language_only_tab_is_closed(self):
        tabs = [
            ACTIVE,
            TabRecord(path="vendor/other.ts", language="typescript", tokens=10),
        ]
        report = optimize(tabs)
        assert [t.path for t in report.distractors] == ["vendor/other.ts"]

    def test_no_tab_at_or_above_threshold_is_closed(self):
        tabs = example_workspace()
        report = optimize(tabs)
        for t in report.distractors:
            b = report.breakdowns[t.path]
            assert b.score < DEFAULT_THRESHOLD and not t.pinned and not t.is_active

    def test_pinned_distractor_candidates_survive(self):
        tabs = example_workspace()
        pinned = [
            TabRecord(path=t.path, language=t.language, tokens=t.tokens, pinned=True)
            if t.path.startswith("config/")
            else t
            for t in tabs
        ]
        assert optimize(pinned).freed_tokens == 0

    def test_idempotent(self):
        report = optimize(example_workspace())
        assert optimize(list(report.kept)).distractors == ()

    def test_partition_is_exact(self):
        tabs = example_workspace()
        report = optimize(tabs)
        assert sorted(t.path for t in report.kept) + sorted(t.path for t in report.distractors) == sorted(
            t.path for t in tabs
        ) or set(t.path for t in report.kept) | set(t.path for t in report.distractors) == set(
            t.path for t in tabs
        )
        assert not set(t.path for t in report.kept) & set(t.path for t in report.distractors)

    def test_tab_without_tokens_or_content_frees_nothing(self):
        tabs = [ACTIVE, TabRecord(path="mystery.yml", language="yaml")]
        report = optimize(tabs)
        assert [t.path for t in report.distractors] == ["mystery.yml"]
        assert report.freed_tokens == 0

    def test_two_active_tabs_rejected(self):
        tabs = [
            TabRecord(path="a.ts", is_active=True),
            TabRecord(path="b.ts", is_active=True),
        ]
        with pytest.raises(ValueError, match="one tab"):
            optimize(tabs)


@st.composite
def small_tab_sets(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    tabs = []
    for i in range(n):
        tabs.append(
            TabRecord(
                path=draw(st.sampled_from(["src/a", "src/b/c", "docs/x", "cfg"])) + f"/f{i}.ts",
                language=draw(st.sampled_from(["typescript", "json", "python"])),
                tokens=draw(st.integers(min_value=0, max_value=500)),
                last_edit_age=draw(st.sampled_from([None, 10.0, 200.0, 10_000.0])),
                diagnostics_count=draw(st.integers(min_value=0, max_value=2)),
                pinned=draw(st.booleans()),
            )
        )
    return tabs


class TestBruteForceEquivalence:
    @given(small_tab_sets())
    def test_distractor_set_matches_exhaustive_evaluation(self, tabs):
        active = TabRecord(
            path="src/a/main.ts",
            language="typescript",
            content="import {q} from './b/c/f1'",
            is_active=True,
        )
        report = optimize(tabs + [active])
        imports = detect_imports(active.content, active.language)
        expected = set()
        for t in tabs:
            if t.pinned:
                continue
            from ctxbudget.relevance import is_imported

            r = straight_line_score(
                1.0 if t.language == active.language else 0.0,
                1.0 if is_imported(t.path, imports) else 0.0,
                path_similarity(t.path, active.path),
                recency_signal(t.last_edit_age),
                1.0 if t.diagnostics_count > 0 else 0.0,
            )
            if r < DEFAULT_THRESHOLD:
                expected.add(t.path)
        assert {t.path for t in report.distractors} == expected


class TestManifest:
    def test_loads_documented_fields(self, tmp_path):
        manifest = tmp_path / "tabs.json"
        (tmp_path / "body.ts").write_text("import {a} from './x'")
        manifest.write_text(
            """
            {"tabs": [
              {"path": "src/main.ts", "language": "typescript", "content_path": "body.ts",
               "last_edit_age": 30, "diagnostics": 1, "active": true},
              {"path": "config.json", "language": "json", "tokens": 420, "pinned": true}
            ]}
            """
        )
        tabs = load_tab_manifest(manifest)
        assert tabs[0].content == "import {a} from './x'"
        assert tabs[0].is_active
        assert tabs[1].tokens == 420 and tabs[1].pinned

    def test_scoring_from_manifest(self, tmp_path):
        manifest = tmp_path / "tabs.json"
        manifest.write_text(
            '{"tabs": [{"path": "a.ts", "language": "typescript", "active": true},'
            ' {"path": "b.yml", "language": "yaml"}]}'
        )
        breakdowns = score_tabs(load_tab_manifest(manifest))
        assert breakdowns["a.ts"].score == 1.0
        assert breakdowns["b.yml"].distractor
