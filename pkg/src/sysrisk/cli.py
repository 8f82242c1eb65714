"""Command line entry point: ``sysrisk <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import io as sio
from .contagion import DR2_EPSILON, debtrank2_all, debtrank_all, direct_impact
from .metrics import threshold_network, topology_report
from .model import build_problem, network_point, presolve
from .network import validate
from .pipeline import PipelineError, PipelineOptions, dumps, long_records, run_pipeline
from .solver import GAP_REACHED, OPTIMAL, SolveOptions, solve
from .synth import SynthParams, generate

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3

log = logging.getLogger("sysrisk")


class InvalidInput(Exception):
    pass


def _load(args):
    try:
        system = sio.parse_network(args.banks, args.exposures)
    except (OSError, sio.FormatError, ValueError) as exc:
        raise InvalidInput(str(exc)) from None
    problems = validate(system)
    if problems:
        raise InvalidInput("; ".join(problems))
    return system


def _emit(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _solve_options(args) -> SolveOptions:
    return SolveOptions(gap_tolerance=args.gap, time_limit_seconds=args.time_limit,
                        node_limit=args.node_limit, engine=args.engine)


def cmd_validate(args) -> int:
    try:
        system = sio.parse_network(args.banks, args.exposures)
    except (OSError, sio.FormatError, ValueError) as exc:
        print(f"invalid: {exc}")
        return EXIT_INVALID
    problems = validate(system)
    for p in problems:
        print(p)
    if problems:
        return EXIT_INVALID
    print(f"ok: {system.n} banks, {int((system.liabilities > 0).sum())} exposures")
    return EXIT_OK


def cmd_debtrank(args) -> int:
    system = _load(args)
    if args.variant == "dr":
        values = debtrank_all(system)
    else:
        values = debtrank2_all(system, args.epsilon)
    I, _ = direct_impact(system)
    lines = ["bank_id,debtrank,direct_impact"]
    lines += [f"{b},{v!r},{i!r}" for b, v, i in zip(system.bank_ids, values.tolist(), I.tolist())]
    lines.append(f"TOTAL,{float(values.sum())!r},{float(I.sum())!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    system = _load(args)
    problem = presolve(build_problem(system, args.direction, args.risk_sense))
    sol = solve(problem, _solve_options(args), warm_start=network_point(system, problem))
    log.info("status=%s objective=%s gap=%s nodes=%d time=%.2fs",
             sol.status, sol.objective, sol.gap, sol.node_count, sol.wall_time)
    if sol.L_star is None or sol.status not in (OPTIMAL, GAP_REACHED):
        print(f"solver failed: {sol.status}", file=sys.stderr)
        if sol.L_star is None:
            return EXIT_SOLVER
    out = system.with_liabilities(sol.L_star)
    sio.write_network(out, args.banks_out, args.exposures_out)
    summary = {"status": sol.status, "objective": sol.objective, "bound": sol.bound,
               "gap": sol.gap, "nodes": sol.node_count}
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if sol.status in (OPTIMAL, GAP_REACHED) else EXIT_SOLVER


def cmd_metrics(args) -> int:
    system = _load(args)
    L = system.liabilities
    out = {}
    for name, M in (("empirical", L), ("thresholded", threshold_network(L, args.threshold_coverage))):
        t = topology_report(M, args.convention)
        out[name] = {
            "link_density": t.link_density,
            "assortativity": t.assortativity,
            "assortativity_convention": t.assortativity_convention,
            "mean_clustering": t.mean_clustering,
            "mean_knn_w": t.mean_knn_w,
            "k_in": t.k_in.tolist(),
            "k_out": t.k_out.tolist(),
        }
    _emit(json.dumps(out, sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_export_mps(args) -> int:
    system = _load(args)
    problem = build_problem(system, args.direction, args.risk_sense)
    if not args.no_presolve:
        problem = presolve(problem)
    _emit(sio.export_mps(problem), args.out)
    return EXIT_OK


def cmd_gen_synth(args) -> int:
    params = SynthParams(n=args.n, density=args.density, weights=args.weights,
                         phi=args.phi, kappa_rule=args.kappa_rule, seed=args.seed)
    sio.write_network(generate(params), args.banks_out, args.exposures_out)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    system = _load(args)
    opts = PipelineOptions(solve=_solve_options(args), risk_sense=args.risk_sense,
                           threshold_coverage=args.threshold_coverage, run=args.run,
                           assortativity_convention=args.convention)
    try:
        report = run_pipeline(system, opts)
    except PipelineError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID if exc.stage == "validate" else EXIT_SOLVER
    _emit(dumps(report), args.out)
    if args.csv:
        sio.write_long_csv(long_records(report), args.csv)
    failed = [k for k, d in report["solver"].items() if d.get("status") not in (OPTIMAL, GAP_REACHED, "Skipped")]
    return EXIT_SOLVER if failed else EXIT_OK


def _network_args(p):
    p.add_argument("--banks", required=True, help="bank table CSV")
    p.add_argument("--exposures", required=True, help="exposure list CSV")


def _solver_args(p):
    p.add_argument("--gap", type=float, default=1e-6, help="relative optimality gap")
    p.add_argument("--time-limit", type=float, default=None, help="seconds per solve")
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("--engine", choices=("auto", "bnb", "highs"), default="auto")
    p.add_argument("--risk-sense", choices=("eq", "geq"), default="eq")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sysrisk", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a network for consistency")
    _network_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("debtrank", help="per-bank DebtRank and direct impact")
    _network_args(p)
    p.add_argument("--variant", choices=("dr", "dr2"), default="dr")
    p.add_argument("--epsilon", type=float, default=DR2_EPSILON)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_debtrank)

    p = sub.add_parser("optimize", help="rewire to minimal or maximal direct impact")
    _network_args(p)
    _solver_args(p)
    p.add_argument("--direction", choices=("min", "max"), default="min")
    p.add_argument("--banks-out", required=True)
    p.add_argument("--exposures-out", required=True)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("metrics", help="topology measures of the empirical and thresholded network")
    _network_args(p)
    p.add_argument("--threshold-coverage", type=float, default=0.9)
    p.add_argument("--convention", default="out-in", choices=("out-in", "in-out", "in-in", "out-out", "total"))
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("export-mps", help="write the MILP in free MPS format")
    _network_args(p)
    p.add_argument("--direction", choices=("min", "max"), default="min")
    p.add_argument("--risk-sense", choices=("eq", "geq"), default="eq")
    p.add_argument("--no-presolve", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export_mps)

    p = sub.add_parser("gen-synth", help="generate a random network")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--weights", choices=("lognormal", "uniform"), default="lognormal")
    p.add_argument("--phi", type=float, default=0.25)
    p.add_argument("--kappa-rule", choices=("constant", "leverage"), default="constant")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--banks-out", required=True)
    p.add_argument("--exposures-out", required=True)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("pipeline", help="full empirical/min/max/thresholded report")
    _network_args(p)
    _solver_args(p)
    p.add_argument("--threshold-coverage", type=float, default=0.9)
    p.add_argument("--convention", default="out-in", choices=("out-in", "in-out", "in-in", "out-out", "total"))
    p.add_argument("--run", default="run")
    p.add_argument("--out", default=None, help="report JSON (stdout if omitted)")
    p.add_argument("--csv", default=None, help="long-format CSV of headline metrics")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
