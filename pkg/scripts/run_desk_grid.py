#!/usr/bin/env python3
"""Run the full oracle-comparison grid and print a pass/fail matrix.

Solves, verifies, and cross-checks every desk-scale instance (seeds 1..10
crossed with delay in {1, 2}); equivalent to ``delshare oracle-compare``
plus a person-by-person solve and verification per instance.
"""

import argparse
import json
import sys
import time

from delshare import pbp_solve, problem_hash, random_problem, verify_pbp
from delshare.cli import _compare_instance


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, nargs="*", default=list(range(1, 11)))
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    cells = []
    start = time.perf_counter()
    for seed in args.seeds:
        for delay in (1, 2):
            spec = random_problem(
                seed, horizon=3, num_controllers=2, delay=delay,
                state_size=2, obs_sizes=(2, 2), action_sizes=(2, 2),
            )
            cell = _compare_instance(spec, seed, budget=10**7)
            result = pbp_solve(spec)
            check = verify_pbp(spec, result.strategies)
            cell.update(
                seed=seed,
                delay=delay,
                instance_hash=problem_hash(spec),
                payoff=result.payoff,
                converged=result.converged,
                pbp_verified=check.holds,
                worst_gap=check.worst_gap,
            )
            cell["pass"] = bool(cell["pass"] and check.holds)
            cells.append(cell)
            status = "pass" if cell["pass"] else "FAIL"
            print(
                f"seed={seed:2d} delay={delay}  payoff={result.payoff:.6f}  "
                f"filters={'ok' if cell['filters_pass'] else 'FAIL'}  "
                f"dp_vs_enum={'ok' if cell['dp_pass'] else 'FAIL'}  "
                f"verify={'ok' if check.holds else 'FAIL'}  [{status}]"
            )
    elapsed = time.perf_counter() - start
    all_pass = all(c["pass"] for c in cells)
    print(f"{len(cells)} instances in {elapsed:.1f}s: {'all pass' if all_pass else 'FAILURES'}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"cells": cells, "all_pass": all_pass}, fh, sort_keys=True)
            fh.write("\n")
    return 0 if all_pass else 2


if __name__ == "__main__":
    sys.exit(main())
