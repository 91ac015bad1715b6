#!/usr/bin/env python3
"""Reproduce the three comparison suites as CSV files.

Writes one CSV (plus a replayable .config sidecar) per run:

    fig1: vrgt (p=0.1) vs dgd2p vs gt2d, 50 agents, dimension 64
    fig2: vrgt at refresh probabilities 0.2 / 0.5 / 0.8 / 1.0
    fig3: vrgt at dimensions 30 / 100 / 200 / 300, p = min(0.1, 8/d)

Budgets are per-agent query counts; the CSV m column is network-wide, so
plot against m / n_agents for a per-agent axis.

    python3 scripts/reproduce_figs.py --out results --budget 50000
"""

import argparse
import time

from dzo.harness import run_comparison


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", default="results")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--budget", type=int, default=50_000,
                        help="per-agent query budget for fig1/fig2")
    parser.add_argument("--budget-dim-sweep", type=int, default=100_000,
                        help="per-agent query budget for fig3")
    parser.add_argument("--suites", default="fig1,fig2,fig3")
    args = parser.parse_args()

    for suite in args.suites.split(","):
        budget = args.budget_dim_sweep if suite == "fig3" else args.budget
        start = time.perf_counter()
        paths = run_comparison(suite, seed=args.seed, budget=budget, out_dir=args.out)
        took = time.perf_counter() - start
        print(f"{suite}: {len(paths)} runs in {took:.1f}s")
        for p in paths:
            print(f"  {p}")


if __name__ == "__main__":
    main()
