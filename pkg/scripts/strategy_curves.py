#!/usr/bin/env python3
"""Emit per-turn cost trajectories for the three conversation strategies
as a CSV ready for plotting, and print the affordable-turn counts for a
daily budget.

    python3 scripts/strategy_curves.py --model claude-sonnet-4-5 --turns 100 --out curves.csv
"""

import argparse
import csv
import sys

from ctxbudget.conversation import (
    ConversationParams,
    FullHistory,
    SlidingWindow,
    Summarize,
    simulate,
    turns_for_budget,
)
from ctxbudget.registry import load_registry


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", default="claude-sonnet-4-5")
    parser.add_argument("--system", type=int, default=2000)
    parser.add_argument("--user", type=int, default=500)
    parser.add_argument("--assistant", type=int, default=1500)
    parser.add_argument("--turns", type=int, default=100)
    parser.add_argument("--window", type=int, default=5)
    parser.add_argument("--ratio", type=float, default=0.2)
    parser.add_argument("--keep-last", type=int, default=1)
    parser.add_argument("--budget", default="5.00")
    parser.add_argument("--out", default="-")
    args = parser.parse_args()

    rule = load_registry().find_model(args.model).pricing
    strategies = {
        "full": FullHistory(),
        "window": SlidingWindow(args.window),
        "summarize": Summarize(args.ratio, args.keep_last),
    }
    projections = {
        name: simulate(
            ConversationParams(args.system, args.user, args.assistant, strategy, args.turns, rule)
        )
        for name, strategy in strategies.items()
    }

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(out)
    writer.writerow(
        ["turn"]
        + [f"{name}_cost" for name in strategies]
        + [f"{name}_cumulative" for name in strategies]
    )
    for t in range(args.turns):
        writer.writerow(
            [t + 1]
            + [projections[name].per_turn_cost[t] for name in strategies]
            + [projections[name].cumulative_cost[t] for name in strategies]
        )
    if out is not sys.stdout:
        out.close()
        print(f"wrote {args.out}", file=sys.stderr)

    for name, strategy in strategies.items():
        affordable = turns_for_budget(
            args.system, args.user, args.assistant, strategy, rule, args.budget
        )
        print(f"{name:>9}: {affordable} affordable turns within ${args.budget}", file=sys.stderr)


if __name__ == "__main__":
    main()
