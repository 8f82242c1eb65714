"""Compare solver optima with exhaustive enumeration on tiny random networks.

    python3 scripts/oracle_check.py --count 100 --max-n 4
"""
import argparse
import sys
from pathlib import Path

import numpy as np

from sysrisk.model import build_problem, network_point, presolve
from sysrisk.oracle import brute_force_oracle
from sysrisk.solver import SolveOptions, solve

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from conftest import random_system  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--max-n", type=int, default=4)
    ap.add_argument("--engine", choices=("auto", "bnb", "highs"), default="auto")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for i in range(args.count):
        s = random_system(rng, int(rng.integers(2, args.max_n + 1)), rng.uniform(0.3, 1.0), bool(i % 2))
        sense = ("eq", "geq")[i // 2 % 2]
        orc = brute_force_oracle(s, sense)
        for direction, target in (("min", orc.minimum), ("max", orc.maximum)):
            p = presolve(build_problem(s, direction, sense))
            sol = solve(p, SolveOptions(engine=args.engine), warm_start=network_point(s, p))
            err = abs(sol.objective - target) / max(1.0, abs(target))
            worst = max(worst, err)
            if err > 1e-6:
                print(f"instance {i} {direction}/{sense}: solver {sol.objective} oracle {target}")
    print(f"{args.count} instances, worst relative difference {worst:.2e}")


if __name__ == "__main__":
    main()
