"""Branch-and-bound for the impact MILP over warm-started LP relaxations."""
from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass, field

import highspy
import numpy as np
import scipy.sparse as sp

from .model import MAXIMIZE, RISK_GEQ, MilpProblem, devectorize

log = logging.getLogger(__name__)

OPTIMAL, GAP_REACHED, INFEASIBLE, LIMIT_HIT = "Optimal", "GapReached", "Infeasible", "LimitHit"


@dataclass
class SolveOptions:
    gap_tolerance: float = 1e-6
    integrality_tolerance: float = 1e-7
    feasibility_tolerance: float = 1e-8
    node_limit: int | None = None
    time_limit_seconds: float | None = None
    deterministic_tie_breaking: bool = True
    # maximizing a concave objective needs no binaries; solve the relaxation only
    maximize_via_lp: bool = True
    local_search: bool = True
    # "bnb": in-repo branch-and-bound; "highs": HiGHS branch-and-cut;
    # "auto": bnb up to ``auto_bnb_max_binaries`` free binaries, highs beyond
    engine: str = "auto"
    auto_bnb_max_binaries: int = 30

    def __post_init__(self):
        for name in ("gap_tolerance", "integrality_tolerance", "feasibility_tolerance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.engine not in ("auto", "bnb", "highs"):
            raise ValueError(f"unknown engine {self.engine!r}")


@dataclass
class LpSolution:
    status: str
    z: np.ndarray | None
    objective: float | None
    message: str = ""


@dataclass
class MilpSolution:
    status: str
    z: np.ndarray | None
    objective: float | None
    gap: float
    L_star: np.ndarray | None
    bound: float | None = None
    node_count: int = 0
    wall_time: float = 0.0
    diagnostics: dict = field(default_factory=dict)


class LpEngine:
    """One HiGHS instance holding the relaxation; only column bounds change
    between solves, so each re-solve starts from the previous basis."""

    def __init__(self, problem: MilpProblem, feasibility_tolerance: float = 1e-9, cuts=None):
        self.problem = problem
        A_ub, b_ub = problem.inequality_system()
        if cuts is not None:
            A_ub = sp.vstack([A_ub, cuts[0]], format="csr")
            b_ub = np.concatenate([b_ub, cuts[1]])
        A_eq, b_eq = problem.equality_system()
        A = sp.vstack([A_ub, A_eq], format="csc")
        A.sort_indices()
        inf = highspy.kHighsInf
        row_lo = np.concatenate([np.full(len(b_ub), -inf), b_eq])
        row_hi = np.concatenate([b_ub, b_eq])

        lp = highspy.HighsLp()
        lp.num_col_ = A.shape[1]
        lp.num_row_ = A.shape[0]
        lp.col_cost_ = np.asarray(problem.c, dtype=float)
        lp.col_lower_ = np.asarray(problem.lb, dtype=float)
        lp.col_upper_ = np.asarray(problem.ub, dtype=float)
        lp.row_lower_ = row_lo
        lp.row_upper_ = row_hi
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = A.indptr.astype(np.int32)
        lp.a_matrix_.index_ = A.indices.astype(np.int32)
        lp.a_matrix_.value_ = A.data.astype(float)
        if problem.direction == MAXIMIZE:
            lp.sense_ = highspy.ObjSense.kMaximize

        h = highspy.Highs()
        h.silent()
        h.setOptionValue("presolve", "off")
        h.setOptionValue("threads", 1)
        h.setOptionValue("primal_feasibility_tolerance", feasibility_tolerance)
        h.setOptionValue("dual_feasibility_tolerance", feasibility_tolerance)
        h.passModel(lp)
        self.lp = lp
        self.h = h
        self.n = A.shape[1]
        self._all = np.arange(self.n, dtype=np.int32)

    def solve(self, lb=None, ub=None) -> LpSolution:
        h = self.h
        if lb is not None:
            h.changeColsBounds(self.n, self._all, np.asarray(lb, float), np.asarray(ub, float))
        h.run()
        status = h.getModelStatus()
        if status == highspy.HighsModelStatus.kOptimal:
            z = np.array(h.getSolution().col_value)
            return LpSolution("Optimal", z, float(self.problem.c @ z))
        if status == highspy.HighsModelStatus.kInfeasible:
            return LpSolution(INFEASIBLE, None, None)
        # numerical trouble: retry once from scratch before giving up
        h.clearSolver()
        h.run()
        status = h.getModelStatus()
        if status == highspy.HighsModelStatus.kOptimal:
            z = np.array(h.getSolution().col_value)
            return LpSolution("Optimal", z, float(self.problem.c @ z))
        if status == highspy.HighsModelStatus.kInfeasible:
            return LpSolution(INFEASIBLE, None, None)
        return LpSolution("Error", None, None, h.modelStatusToString(status))


def solve_lp(problem: MilpProblem, feasibility_tolerance: float = 1e-9) -> LpSolution:
    """Optimal basic solution of the relaxation (binaries in [0, 1])."""
    return LpEngine(problem, feasibility_tolerance).solve()


def entry_equity(problem: MilpProblem) -> np.ndarray:
    """Creditor equity per entry, read back from the first row of each A1 group."""
    K = problem.n_entries
    A1 = problem.A1.tocsr()
    k = np.arange(K)
    sub = A1[4 * k][:, 2 * K + 2 * k]
    return -np.asarray(sub.diagonal()).ravel()


def true_objective(problem: MilpProblem, x, e_bar) -> float:
    """Objective of a network given as vectorized entries: slope * min(x, e)."""
    slopes = problem.c[0 : 2 * problem.n_entries : 2]
    return float(slopes @ np.minimum(np.maximum(x, 0.0), e_bar))


class _Polytope:
    """The network polytope in entry space: sums and risk rows on x."""

    def __init__(self, problem: MilpProblem, feasibility_tolerance: float):
        K = problem.n_entries
        lo = slice(0, 2 * K, 2)
        self.A_eq = sp.vstack([problem.A2[:, lo], problem.A3[:, lo]], format="csc")
        self.b_eq = np.concatenate([problem.b2, problem.b3])
        self.ub = problem.ub[0 : 2 * K : 2] + problem.ub[1 : 2 * K : 2]
        self.geq = None
        if problem.risk_sense == RISK_GEQ:
            self.geq = (problem.A4[:, lo].tocsc(), problem.b4)
        else:
            self.A_eq = sp.vstack([self.A_eq, problem.A4[:, lo]], format="csc")
            self.b_eq = np.concatenate([self.b_eq, problem.b4])
        self.tol = feasibility_tolerance
        self._engine = None

    def minimize(self, g) -> np.ndarray | None:
        if self._engine is None:
            self._engine = self._build(g)
        else:
            self._engine.changeColsCost(len(g), np.arange(len(g), dtype=np.int32), np.asarray(g, float))
        self._engine.run()
        if self._engine.getModelStatus() != highspy.HighsModelStatus.kOptimal:
            return None
        return np.array(self._engine.getSolution().col_value)

    def _build(self, g):
        inf = highspy.kHighsInf
        A, lo, hi = self.A_eq, self.b_eq, self.b_eq
        if self.geq is not None:
            A = sp.vstack([A, self.geq[0]], format="csc")
            lo = np.concatenate([lo, self.geq[1]])
            hi = np.concatenate([hi, np.full(len(self.geq[1]), inf)])
        A = A.tocsc()
        A.sort_indices()
        lp = highspy.HighsLp()
        lp.num_col_, lp.num_row_ = A.shape[1], A.shape[0]
        lp.col_cost_ = np.asarray(g, float)
        lp.col_lower_ = np.zeros(A.shape[1])
        lp.col_upper_ = self.ub
        lp.row_lower_, lp.row_upper_ = lo, hi
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = A.indptr.astype(np.int32)
        lp.a_matrix_.index_ = A.indices.astype(np.int32)
        lp.a_matrix_.value_ = A.data.astype(float)
        h = highspy.Highs()
        h.silent()
        h.setOptionValue("threads", 1)
        h.setOptionValue("primal_feasibility_tolerance", self.tol)
        h.passModel(lp)
        return h


def local_descent(problem: MilpProblem, poly: _Polytope, x, e_bar, max_rounds: int = 50):
    """Successive linearization of the concave objective from ``x``.

    Each round minimizes the supergradient at the current point over the
    polytope; by concavity the true objective never increases.
    """
    slopes = problem.c[0 : 2 * problem.n_entries : 2]
    best = true_objective(problem, x, e_bar)
    for _ in range(max_rounds):
        g = np.where(x < e_bar * (1 - 1e-12), slopes, 0.0)
        x_new = poly.minimize(g)
        if x_new is None:
            break
        val = true_objective(problem, x_new, e_bar)
        if val >= best - 1e-12 * max(1.0, abs(best)):
            break
        x, best = np.maximum(x_new, 0.0), val
    return x, best


def _canonical_z(problem: MilpProblem, x, e_bar) -> np.ndarray:
    K = problem.n_entries
    x = np.maximum(np.asarray(x, float), 0.0)
    below = np.minimum(x, e_bar)
    above = np.maximum(0.0, x - e_bar)
    z = np.zeros(4 * K)
    z[0 : 2 * K : 2] = below
    z[1 : 2 * K : 2] = above
    z[2 * K :: 2] = below > 0
    z[2 * K + 1 :: 2] = above > 0
    return z


def solve(problem: MilpProblem, options: SolveOptions | None = None, warm_start=None) -> MilpSolution:
    """Globally optimize the MILP.

    Minimization runs best-bound branch-and-bound on the binaries, branching
    on the most fractional one (lowest index on ties). Maximization, by
    default, solves the LP relaxation, which is exact for a concave objective.
    ``warm_start`` is an optional feasible point (e.g. the empirical network).
    """
    options = options or SolveOptions()
    t0 = time.perf_counter()
    K = problem.n_entries
    n = problem.n_banks
    sense = -1.0 if problem.direction == MAXIMIZE else 1.0
    e_bar = entry_equity(problem)
    lp_tol = min(1e-9, options.feasibility_tolerance)
    engine = LpEngine(problem, lp_tol, cuts=column_cuts(problem) if sense > 0 else None)

    def finish(status, z, bound, nodes, **diag):
        wall = time.perf_counter() - t0
        if z is None:
            return MilpSolution(status, None, None, np.inf, None, bound, nodes, wall, diag)
        obj = problem.objective(z)
        gap = _rel_gap(sense * obj, sense * bound) if bound is not None else np.inf
        L = extract_network(z, n)
        return MilpSolution(status, z, obj, gap, L, bound, nodes, wall, diag)

    root = engine.solve()
    if root.status == INFEASIBLE:
        return finish(INFEASIBLE, None, None, 1)
    if root.z is None:
        return finish(LIMIT_HIT, None, None, 1, lp_error=root.message)

    if problem.direction == MAXIMIZE and options.maximize_via_lp:
        z = _polish(problem, engine, _canonical_z(problem, problem.y_sums(root.z), e_bar), sense)
        return finish(OPTIMAL, z, root.objective, 1, method="lp-relaxation")

    int_idx = np.flatnonzero(problem.integrality)
    n_free = int(np.sum(problem.ub[int_idx] > problem.lb[int_idx]))
    use_highs = options.engine == "highs" or (
        options.engine == "auto" and n_free > options.auto_bnb_max_binaries)
    if use_highs:
        warm = warm_start
        if warm is None:
            warm = _canonical_z(problem, problem.y_sums(root.z), e_bar)
        status, z, bound, nodes = _solve_highs(problem, options, warm, t0)
        if z is None:
            return finish(status, None, None, nodes, engine="highs")
        z = _polish(problem, engine, z, sense)
        return finish(status, z, bound, nodes, engine="highs")

    # internal problem: minimize sense * c @ z
    inc_z, inc_val = None, np.inf
    poly = _Polytope(problem, lp_tol) if options.local_search else None

    def offer(x, source):
        nonlocal inc_z, inc_val
        if poly is not None and sense > 0:
            x, _ = local_descent(problem, poly, x, e_bar)
        z = _canonical_z(problem, x, e_bar)
        val = sense * problem.objective(z)
        if inc_z is None or val < inc_val - 1e-12 * max(1.0, abs(inc_val)):
            inc_z, inc_val = z, val
            log.debug("incumbent %.10g from %s", sense * val, source)

    if warm_start is not None:
        offer(problem.y_sums(warm_start), "warm start")
    offer(problem.y_sums(root.z), "root relaxation")

    counter = itertools.count()
    heap = [(sense * root.objective, next(counter), problem.lb[int_idx].copy(), problem.ub[int_idx].copy(), root)]
    nodes = 0
    stop = None
    lb_full, ub_full = problem.lb.copy(), problem.ub.copy()
    while heap:
        if inc_z is not None and _rel_gap(inc_val, heap[0][0]) <= options.gap_tolerance:
            stop = GAP_REACHED
            break
        if options.node_limit is not None and nodes >= options.node_limit:
            stop = LIMIT_HIT
            break
        if options.time_limit_seconds is not None and time.perf_counter() - t0 > options.time_limit_seconds:
            stop = LIMIT_HIT
            break
        bound, _, nlb, nub, sol = heapq.heappop(heap)
        if bound >= inc_val:
            continue
        nodes += 1
        if sol is None:
            lb_full[int_idx], ub_full[int_idx] = nlb, nub
            sol = engine.solve(lb_full, ub_full)
            if sol.z is None or sense * sol.objective >= inc_val:
                continue
            offer(problem.y_sums(sol.z), f"node {nodes}")
        zi = sol.z[int_idx]
        frac = np.minimum(zi - np.floor(zi), np.ceil(zi) - zi)
        pick = int(np.argmax(frac))
        if frac[pick] <= options.integrality_tolerance:
            # integral relaxation: the LP point itself is MILP feasible
            z = sol.z.copy()
            z[int_idx] = np.round(zi)
            val = sense * problem.objective(z)
            if val < inc_val:
                inc_z, inc_val = z, val
            continue
        node_bound = sense * sol.objective
        for value in (0.0, 1.0):
            clb, cub = nlb.copy(), nub.copy()
            clb[pick] = cub[pick] = value
            heapq.heappush(heap, (node_bound, next(counter), clb, cub, None))

    if inc_z is None:
        return finish(INFEASIBLE if stop is None else LIMIT_HIT, None, None, nodes)
    best_bound = min(heap[0][0], inc_val) if heap else inc_val
    z = _polish(problem, engine, inc_z, sense)
    if stop is None or _rel_gap(sense * problem.objective(z), best_bound) == 0.0:
        stop = OPTIMAL
    return finish(stop, z, sense * best_bound, nodes)


def _solve_highs(problem: MilpProblem, options: SolveOptions, warm_start, t0: float):
    """HiGHS branch-and-cut on the full MILP, seeded with ``warm_start``."""
    lp = LpEngine(problem, min(1e-9, options.feasibility_tolerance)).lp
    lp.integrality_ = [highspy.HighsVarType.kInteger if f else highspy.HighsVarType.kContinuous
                       for f in problem.integrality]
    h = highspy.Highs()
    h.silent()
    h.setOptionValue("threads", 1)
    h.setOptionValue("random_seed", 0)
    h.setOptionValue("mip_rel_gap", options.gap_tolerance)
    h.setOptionValue("mip_abs_gap", 1e-9)
    h.setOptionValue("mip_feasibility_tolerance", min(1e-9, options.feasibility_tolerance))
    h.setOptionValue("primal_feasibility_tolerance", min(1e-9, options.feasibility_tolerance))
    if options.node_limit is not None:
        h.setOptionValue("mip_max_nodes", int(options.node_limit))
    if options.time_limit_seconds is not None:
        remaining = max(0.0, options.time_limit_seconds - (time.perf_counter() - t0))
        h.setOptionValue("time_limit", float(remaining))
    h.passModel(lp)
    if warm_start is not None:
        sol = highspy.HighsSolution()
        sol.col_value = list(np.asarray(warm_start, dtype=float))
        sol.value_valid = True
        h.setSolution(sol)
    h.run()
    status = h.getModelStatus()
    info = h.getInfo()
    nodes = int(info.mip_node_count)
    bound = float(info.mip_dual_bound)
    if status == highspy.HighsModelStatus.kInfeasible:
        return INFEASIBLE, None, None, nodes
    if info.primal_solution_status != 2:  # no feasible point
        return LIMIT_HIT, None, None, nodes
    z = np.array(h.getSolution().col_value)
    z[problem.integrality] = np.round(z[problem.integrality])
    if status == highspy.HighsModelStatus.kOptimal:
        return OPTIMAL, z, bound, nodes
    return LIMIT_HIT, z, bound, nodes


def column_cuts(problem: MilpProblem):
    """Valid cuts on the below-equity parts of each column, in <= form.

    In any integer-feasible point the below-equity part of entry (i, j) is
    exactly min(L_ij, e_j), and min(., e_j) is subadditive, so carrying the
    column sum a_j through entries of capacity min(l_i, a_j) costs at least
    the greedy fill using the largest capacities first.
    """
    n, K = problem.n_banks, problem.n_entries
    e_bar = entry_equity(problem)
    a, l = problem.b2, problem.b3
    rows, cols, vals, rhs = [], [], [], []
    for j in range(n):
        need = a[j]
        if need <= 0:
            continue
        ej = e_bar[j * n]
        caps = np.sort([min(l[i], need) for i in range(n) if i != j])[::-1]
        cost, rem = 0.0, need
        for cap in caps:
            if rem <= 0:
                break
            take = min(cap, rem)
            cost += min(take, ej)
            rem -= take
        if rem > 1e-9 * need:
            continue  # column cannot be filled; leave infeasibility to the LP
        members = [2 * (j * n + i) for i in range(n) if i != j]
        rows += [len(rhs)] * len(members)
        cols += members
        vals += [-1.0] * len(members)
        rhs.append(-cost * (1 - 1e-12))
    A = sp.csr_array((vals, (rows, cols)), shape=(len(rhs), 4 * K))
    return A, np.array(rhs)


def _rel_gap(incumbent: float, bound: float) -> float:
    if not np.isfinite(incumbent):
        return np.inf
    diff = max(0.0, incumbent - bound)
    if diff <= 1e-9:
        return 0.0
    return diff / max(abs(incumbent), 1e-9)


def _polish(problem: MilpProblem, engine: LpEngine, z, sense: float):
    """Re-solve with binaries fixed at ``z``'s pattern to land on an exact
    vertex; keep ``z`` if that is not at least as good."""
    int_idx = np.flatnonzero(problem.integrality)
    lb, ub = problem.lb.copy(), problem.ub.copy()
    fixed = np.round(z[int_idx])
    lb[int_idx] = ub[int_idx] = fixed
    sol = engine.solve(lb, ub)
    if sol.z is None:
        return z
    z_new = sol.z.copy()
    z_new[int_idx] = fixed
    if sense * problem.objective(z_new) <= sense * problem.objective(z) + 1e-9 * max(1.0, abs(problem.objective(z))):
        return z_new
    return z


def extract_network(z, n: int) -> np.ndarray:
    """L*[i, j] = lower + upper part of entry (i, j); diagonal and negatives set to zero."""
    K = n * n
    y = np.asarray(z, dtype=float)[: 2 * K]
    L = devectorize(y[0::2] + y[1::2], n).copy()
    np.fill_diagonal(L, 0.0)
    # LP round-off can leave -0.0 or tiny negatives on empty entries
    return np.where(L > 0, L, 0.0)
