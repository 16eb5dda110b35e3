#!/usr/bin/env python3
"""Scorer latency benchmark: median / p95 wall-clock for a full scoring
pass over synthetic 30-tab workspaces of parametrizable size.

    python3 scripts/benchmark_scoring.py --tabs 30 --runs 500
"""

import argparse
import statistics
import time

from ctxbudget.relevance import TabRecord, score_tabs


def make_workspace(n_tabs: int, lines_per_tab: int):
    active = TabRecord(
        path="src/mod1/main.ts",
        language="typescript",
        content="\n".join(f"import {{x{i}}} from './mod{i % 7}/file{i}'" for i in range(60)),
        is_active=True,
    )
    tabs = [
        TabRecord(
            path=f"src/mod{i % 7}/sub{i % 3}/file{i}.ts",
            language="typescript" if i % 3 else "json",
            content="const filler = 1;\n" * lines_per_tab,
            last_edit_age=float(i * 37 % 1200),
            diagnostics_count=i % 4,
        )
        for i in range(n_tabs)
    ]
    return tabs + [active]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--tabs", type=int, default=30)
    parser.add_argument("--lines", type=int, default=2000)
    parser.add_argument("--runs", type=int, default=100)
    args = parser.parse_args()

    workspace = make_workspace(args.tabs, args.lines)
    score_tabs(workspace)  # warm-up

    durations = []
    for _ in range(args.runs):
        start = time.perf_counter()
        score_tabs(workspace)
        durations.append((time.perf_counter() - start) * 1000)

    durations.sort()
    median = statistics.median(durations)
    p95 = durations[int(len(durations) * 0.95) - 1]
    print(f"{args.tabs} tabs x {args.lines} lines, {args.runs} runs")
    print(f"median {median:.3f} ms | p95 {p95:.3f} ms | max {durations[-1]:.3f} ms")
    print(f"target: < 5 ms median (soft CI gate 25 ms) -> {'ok' if median < 5 else 'MISS'}")


if __name__ == "__main__":
    main()
