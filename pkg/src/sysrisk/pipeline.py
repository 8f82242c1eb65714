"""Empirical vs. minimized vs. maximized vs. thresholded comparison of one
network, assembled into a versioned JSON report."""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .contagion import DR2_EPSILON, pearson, risk_report
from .metrics import threshold_network, topology_report
from .model import MAXIMIZE, MINIMIZE, RISK_EQ, build_problem, network_point, objective_value, presolve
from .network import BankingSystem, aggregates, validate
from .solver import GAP_REACHED, OPTIMAL, SolveOptions, solve

log = logging.getLogger(__name__)

SCHEMA_VERSION = "sysrisk-report/1"
NETWORK_TYPES = ("empirical", "minimized", "maximized", "thresholded")


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


@dataclass
class PipelineOptions:
    solve: SolveOptions = field(default_factory=SolveOptions)
    risk_sense: str = RISK_EQ
    threshold_coverage: float = 0.9
    dr2_epsilon: float = DR2_EPSILON
    assortativity_convention: str = "out-in"
    run: str = "run"


def input_digest(system: BankingSystem) -> str:
    h = hashlib.sha256()
    h.update("\x1f".join(system.bank_ids).encode())
    for arr in (system.equity, system.liabilities, system.kappa):
        h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return "sha256:" + h.hexdigest()


def _clean(x):
    """JSON-safe copy: arrays to lists, NaN/inf to None."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def _network_section(system: BankingSystem, L: np.ndarray, opts: PipelineOptions) -> dict:
    net = system.with_liabilities(L)
    rr = risk_report(net, opts.dr2_epsilon)
    topo = topology_report(L, opts.assortativity_convention)
    total = aggregates(system).total_volume
    obj = objective_value(system, L)
    return {
        "risk": {
            "R": rr.R, "R_total": rr.R_total,
            "R2": rr.R2, "R2_total": float(rr.R2.sum()),
            "I": rr.I, "I_total": rr.I_total,
            "pearson_R_I": rr.pearson_R_I,
        },
        "topology": {
            "link_density": topo.link_density,
            "n_links": int((topo.k_out).sum()),
            "k_in": topo.k_in, "k_out": topo.k_out,
            "assortativity": topo.assortativity,
            "assortativity_convention": topo.assortativity_convention,
            "mean_clustering": topo.mean_clustering,
            "local_clustering": topo.local_clustering,
            "knn_w": topo.knn_w, "mean_knn_w": topo.mean_knn_w,
        },
        "objective": obj,
        "normalized_impact": obj / total if total > 0 else 0.0,
        "liabilities": L,
    }


def _optimize(system: BankingSystem, direction: str, opts: PipelineOptions):
    problem = presolve(build_problem(system, direction, opts.risk_sense))
    sol = solve(problem, opts.solve, warm_start=network_point(system, problem))
    if sol.status not in (OPTIMAL, GAP_REACHED) and sol.L_star is None:
        raise PipelineError(f"optimize-{direction}", f"solver status {sol.status}")
    diag = {"status": sol.status, "objective": sol.objective, "bound": sol.bound,
            "gap": sol.gap, "nodes": sol.node_count,
            "engine": sol.diagnostics.get("engine", sol.diagnostics.get("method", "bnb")),
            "binaries": int(problem.integrality.sum()),
            "fixed_binaries": problem.n_fixed_binaries}
    return sol.L_star, diag, sol.wall_time


def run_pipeline(system: BankingSystem, options: PipelineOptions | None = None,
                 include_timings: bool = False) -> dict:
    opts = options or PipelineOptions()
    problems = validate(system)
    if problems:
        raise PipelineError("validate", "; ".join(problems))
    agg = aggregates(system)
    L_emp = system.liabilities
    solver_diag: dict = {}
    timings: dict = {}
    if agg.total_volume > 0:
        L_min, solver_diag["minimize"], timings["minimize"] = _optimize(system, MINIMIZE, opts)
        L_max, solver_diag["maximize"], timings["maximize"] = _optimize(system, MAXIMIZE, opts)
    else:
        L_min = L_max = np.zeros_like(L_emp)
        solver_diag = {"minimize": {"status": "Skipped"}, "maximize": {"status": "Skipped"}}
    L_thr = threshold_network(L_emp, opts.threshold_coverage)

    nets = {
        "empirical": _network_section(system, L_emp, opts),
        "minimized": _network_section(system, L_min, opts),
        "maximized": _network_section(system, L_max, opts),
        "thresholded": _network_section(system, L_thr, opts),
    }
    R_emp = nets["empirical"]["risk"]["R_total"]
    R_min = nets["minimized"]["risk"]["R_total"]
    I_emp = nets["empirical"]["risk"]["I_total"]
    I_min = nets["minimized"]["risk"]["I_total"]
    objs = {k: nets[k]["objective"] for k in ("minimized", "empirical", "maximized")}
    tol = 1e-9 * max(1.0, abs(objs["maximized"]))
    report = {
        "schema": SCHEMA_VERSION,
        "run": opts.run,
        "input_digest": input_digest(system),
        "n_banks": system.n,
        "bank_ids": list(system.bank_ids),
        "total_volume": agg.total_volume,
        "options": {
            "risk_sense": opts.risk_sense,
            "threshold_coverage": opts.threshold_coverage,
            "dr2_epsilon": opts.dr2_epsilon,
            "assortativity_convention": opts.assortativity_convention,
            "gap_tolerance": opts.solve.gap_tolerance,
            "engine": opts.solve.engine,
        },
        "networks": nets,
        "impact_reduction_factor": I_emp / I_min if I_min > 0 else None,
        "sandwich": {
            "min_objective": objs["minimized"],
            "empirical_objective": objs["empirical"],
            "max_objective": objs["maximized"],
            "holds": bool(objs["minimized"] <= objs["empirical"] + tol and objs["empirical"] <= objs["maximized"] + tol),
        },
        "correlations": {
            "system_R_vs_I": pearson([nets[k]["risk"]["R_total"] for k in NETWORK_TYPES],
                                     [nets[k]["risk"]["I_total"] for k in NETWORK_TYPES]),
            "bank_R_vs_I": {k: nets[k]["risk"]["pearson_R_I"] for k in NETWORK_TYPES},
        },
        "solver": solver_diag,
    }
    if R_min > 0:
        report["reduction_factor"] = R_emp / R_min
    if include_timings:
        report["timings"] = timings
    return _clean(report)


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def long_records(report: dict):
    """(run, network_type, metric, value) rows for plotting."""
    run = report["run"]
    for kind in NETWORK_TYPES:
        net = report["networks"][kind]
        values = {
            "R_total": net["risk"]["R_total"],
            "R2_total": net["risk"]["R2_total"],
            "I_total": net["risk"]["I_total"],
            "objective": net["objective"],
            "link_density": net["topology"]["link_density"],
            "assortativity": net["topology"]["assortativity"],
            "mean_clustering": net["topology"]["mean_clustering"],
            "mean_knn_w": net["topology"]["mean_knn_w"],
        }
        for metric, value in values.items():
            yield (run, kind, metric, "" if value is None else repr(float(value)))


_num = {"type": "number"}
_num_or_null = {"type": ["number", "null"]}
_num_list = {"type": "array", "items": _num}
_num_or_null_list = {"type": "array", "items": _num_or_null}

_network_schema = {
    "type": "object",
    "required": ["risk", "topology", "objective", "normalized_impact", "liabilities"],
    "properties": {
        "risk": {
            "type": "object",
            "required": ["R", "R_total", "R2", "R2_total", "I", "I_total", "pearson_R_I"],
            "properties": {
                "R": _num_list, "R_total": _num, "R2": _num_list, "R2_total": _num,
                "I": _num_list, "I_total": _num, "pearson_R_I": _num_or_null,
            },
        },
        "topology": {
            "type": "object",
            "required": ["link_density", "n_links", "k_in", "k_out", "assortativity",
                         "assortativity_convention", "mean_clustering", "local_clustering",
                         "knn_w", "mean_knn_w"],
            "properties": {
                "link_density": {"type": "number", "minimum": 0, "maximum": 1},
                "n_links": {"type": "integer", "minimum": 0},
                "k_in": {"type": "array", "items": {"type": "integer"}},
                "k_out": {"type": "array", "items": {"type": "integer"}},
                "assortativity": {"type": ["number", "null"], "minimum": -1, "maximum": 1},
                "assortativity_convention": {"type": "string"},
                "mean_clustering": {"type": "number", "minimum": 0, "maximum": 1},
                "local_clustering": _num_list,
                "knn_w": _num_or_null_list,
                "mean_knn_w": _num_or_null,
            },
        },
        "objective": _num,
        "normalized_impact": _num,
        "liabilities": {"type": "array", "items": _num_list},
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": SCHEMA_VERSION,
    "type": "object",
    "required": ["schema", "run", "input_digest", "n_banks", "bank_ids", "total_volume",
                 "options", "networks", "impact_reduction_factor", "sandwich",
                 "correlations", "solver"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "run": {"type": "string"},
        "input_digest": {"type": "string", "pattern": "^sha256:[0-9a-f]{64}$"},
        "n_banks": {"type": "integer", "minimum": 1},
        "bank_ids": {"type": "array", "items": {"type": "string"}},
        "total_volume": {"type": "number", "minimum": 0},
        "options": {"type": "object"},
        "networks": {
            "type": "object",
            "required": list(NETWORK_TYPES),
            "properties": {k: _network_schema for k in NETWORK_TYPES},
        },
        "reduction_factor": {"type": "number", "exclusiveMinimum": 0},
        "impact_reduction_factor": _num_or_null,
        "sandwich": {
            "type": "object",
            "required": ["min_objective", "empirical_objective", "max_objective", "holds"],
            "properties": {"holds": {"type": "boolean"}},
        },
        "correlations": {"type": "object", "required": ["system_R_vs_I", "bank_R_vs_I"]},
        "solver": {"type": "object"},
        "timings": {"type": "object"},
    },
}
