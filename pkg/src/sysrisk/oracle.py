"""Exhaustive optimum of the impact objective for tiny networks.

The objective sum_ij min(L_ij / e_j, 1) a_j is linear on every cell cut out
of the feasible polytope by the hyperplanes L_ij = e_j, so both its minimum
and its maximum are attained at a vertex of that refined cell complex. A
vertex is a point where the sum constraints plus enough hyperplanes from
{L_ij = 0, L_ij = e_j, active risk row} pin down a unique solution; all of
them are enumerated here.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import RISK_EQ, RISK_GEQ, objective_value
from .network import BankingSystem, aggregates, risk_exposure

MAX_BANKS = 4


@dataclass
class OracleResult:
    minimum: float
    maximum: float
    argmin: np.ndarray
    argmax: np.ndarray
    n_candidates: int
    n_feasible: int


def _independent_rows(A: np.ndarray, b: np.ndarray, tol: float = 1e-10):
    keep = []
    for r in range(A.shape[0]):
        trial = A[keep + [r]]
        if np.linalg.matrix_rank(trial, tol=tol * max(1.0, np.abs(A).max())) == len(keep) + 1:
            keep.append(r)
    return A[keep], b[keep]


def brute_force_oracle(system: BankingSystem, risk_sense: str = RISK_EQ,
                       max_banks: int = MAX_BANKS, tol: float = 1e-9) -> OracleResult:
    n = system.n
    if n > max_banks:
        raise ValueError(f"brute force limited to {max_banks} banks, got {n}")
    agg = aggregates(system)
    pairs = [(i, j) for j in range(n) for i in range(n) if i != j]
    m = len(pairs)
    R = np.zeros((n, m))
    C = np.zeros((n, m))
    G = np.zeros((n, m))
    for k, (i, j) in enumerate(pairs):
        R[i, k] = 1.0
        C[j, k] = 1.0
        G[j, k] = system.kappa[i]
    r = risk_exposure(system)
    if risk_sense == RISK_EQ:
        E, b = np.vstack([R, C, G]), np.concatenate([agg.l, agg.a, r])
        ineq, h = np.zeros((0, m)), np.zeros(0)
    elif risk_sense == RISK_GEQ:
        E, b = np.vstack([R, C]), np.concatenate([agg.l, agg.a])
        ineq, h = G, r
    else:
        raise ValueError(f"unknown risk sense {risk_sense!r}")
    E_full, b_full = E, b
    E, b = _independent_rows(E, b)
    breakpoints = np.array([system.equity[j] for (_, j) in pairs])
    scale = max(1.0, float(np.abs(b_full).max(initial=0.0)))

    best_min, best_max = np.inf, -np.inf
    arg_min = arg_max = None
    n_cand = n_feas = 0
    free = m - E.shape[0]
    for n_rows in range(min(free, ineq.shape[0]) + 1):
        for T in itertools.combinations(range(ineq.shape[0]), n_rows):
            for S in itertools.combinations(range(m), free - n_rows):
                M = np.zeros((m, m))
                M[: E.shape[0]] = E
                M[E.shape[0] : E.shape[0] + n_rows] = ineq[list(T)]
                for t, k in enumerate(S):
                    M[E.shape[0] + n_rows + t, k] = 1.0
                sv = np.linalg.svd(M, compute_uv=False)
                if sv[-1] <= 1e-10 * sv[0]:
                    continue
                # every variable in S sits at 0 or at its breakpoint
                choices = np.array(list(itertools.product((0, 1), repeat=len(S))), dtype=float)
                rhs = np.zeros((m, len(choices)))
                rhs[: E.shape[0]] = b[:, None]
                rhs[E.shape[0] : E.shape[0] + n_rows] = h[list(T)][:, None]
                if S:
                    rhs[E.shape[0] + n_rows :] = (choices * breakpoints[list(S)]).T
                X = np.linalg.solve(M, rhs)
                n_cand += X.shape[1]
                ok = np.all(X >= -tol * scale, axis=0)
                ok &= np.all(np.abs(E_full @ X - b_full[:, None]) <= tol * scale, axis=0)
                if ineq.shape[0]:
                    ok &= np.all(ineq @ X >= h[:, None] - tol * scale, axis=0)
                for x in X[:, ok].T:
                    n_feas += 1
                    L = np.zeros((n, n))
                    for k, (i, j) in enumerate(pairs):
                        L[i, j] = max(x[k], 0.0)
                    val = objective_value(system, L)
                    if val < best_min:
                        best_min, arg_min = val, L
                    if val > best_max:
                        best_max, arg_max = val, L
    if arg_min is None:
        raise ValueError("no feasible network found")
    return OracleResult(best_min, best_max, arg_min, arg_max, n_cand, n_feas)
