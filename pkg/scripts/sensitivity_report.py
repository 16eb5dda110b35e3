#!/usr/bin/env python3
"""Print the full 27-cell +/-30% sensitivity grid for the strategy
ranking, one row per cell, per scenario.

    python3 scripts/sensitivity_report.py --model claude-sonnet-4-5
"""

import argparse

from ctxbudget.quality import QualityParams, high_reuse_scenarios, sensitivity_grid
from ctxbudget.registry import load_registry


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--model", default="claude-sonnet-4-5")
    parser.add_argument("--alpha", type=float, default=QualityParams().alpha)
    parser.add_argument("--beta", type=float, default=QualityParams().beta)
    parser.add_argument("--gamma", type=float, default=QualityParams().gamma)
    args = parser.parse_args()

    rule = load_registry().find_model(args.model).pricing
    base = QualityParams(alpha=args.alpha, beta=args.beta, gamma=args.gamma)
    report = sensitivity_grid(base, high_reuse_scenarios(rule))

    for result in report.results:
        print(f"\n== {result.scenario.label} ==")
        for cell in result.cells:
            factors = "/".join(f"{f:+.0%}".replace("+0%", "0") for f in (x - 1 for x in cell.factors))
            if not cell.valid:
                print(f"  {factors:<18} excluded: {cell.reason}")
                continue
            costs = ", ".join(f"{k} ${v:.2f}" for k, v in cell.daily_costs.items())
            print(f"  {factors:<18} {' > '.join(cell.ranking)}   ({costs})")
        verdict = " > ".join(result.ranking) if result.invariant else "NOT INVARIANT"
        print(f"  ranking across {result.valid_cells} valid cells: {verdict}")
    print(f"\nall scenarios invariant: {report.all_invariant}")
    print(f"note: exponents are {report.disclaimer}")


if __name__ == "__main__":
    main()
