"""DebtRank, DebtRank2 and direct impact."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .network import BankingSystem, aggregates, impact_matrix

UNDISTRESSED, DISTRESSED, INACTIVE = 0, 1, 2

DR2_EPSILON = 1e-6
DR2_MAX_ITER = 10_000


class ConvergenceWarning(UserWarning):
    pass


@dataclass
class RiskReport:
    R: np.ndarray
    R_total: float
    R2: np.ndarray
    I: np.ndarray
    I_total: float
    pearson_R_I: float | None


def debtrank_single(W: np.ndarray, v: np.ndarray, seed: int) -> float:
    """DebtRank of ``seed``: single-transmission distress propagation.

    All distress levels are updated from the previous step, then the states.
    A node transmits only in the step right after it became distressed.
    """
    n = len(v)
    h = np.zeros(n)
    h[seed] = 1.0
    state = np.full(n, UNDISTRESSED)
    state[seed] = DISTRESSED
    # each node is distressed at most once, so n + 1 steps always suffice
    for _ in range(n + 1):
        active = state == DISTRESSED
        if not active.any():
            break
        h_new = np.minimum(1.0, h + W[active].T @ h[active])
        new_state = state.copy()
        new_state[active] = INACTIVE
        new_state[(state == UNDISTRESSED) & (h_new > 0)] = DISTRESSED
        h, state = h_new, new_state
    mask = np.ones(n, dtype=bool)
    mask[seed] = False
    return float(h[mask] @ v[mask])


def debtrank_all(system: BankingSystem) -> np.ndarray:
    W = impact_matrix(system)
    v = aggregates(system).v
    if not v.any():
        return np.zeros(system.n)
    return np.array([debtrank_single(W, v, i) for i in range(system.n)])


def debtrank2_single(W: np.ndarray, v: np.ndarray, seed: int,
                     epsilon: float = DR2_EPSILON, max_iter: int = DR2_MAX_ITER) -> tuple[float, bool]:
    """DebtRank2 of ``seed``: every distress increment is passed on again.

    Returns ``(value, converged)``; non-convergence within ``max_iter`` steps
    also raises a ``ConvergenceWarning``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    n = len(v)
    h_prev = np.zeros(n)
    h = np.zeros(n)
    h[seed] = 1.0
    converged = False
    for _ in range(max_iter):
        h_next = np.minimum(1.0, h + W.T @ (h - h_prev))
        step = np.max(h_next - h)
        h_prev, h = h, h_next
        if step < epsilon:
            converged = True
            break
    if not converged:
        warnings.warn(f"DebtRank2 for seed {seed} did not converge in {max_iter} iterations",
                      ConvergenceWarning, stacklevel=2)
    mask = np.ones(n, dtype=bool)
    mask[seed] = False
    return float(h[mask] @ v[mask]), converged


def debtrank2_all(system: BankingSystem, epsilon: float = DR2_EPSILON,
                  max_iter: int = DR2_MAX_ITER) -> np.ndarray:
    W = impact_matrix(system)
    v = aggregates(system).v
    if not v.any():
        return np.zeros(system.n)
    return np.array([debtrank2_single(W, v, i, epsilon, max_iter)[0] for i in range(system.n)])


def direct_impact(system: BankingSystem) -> tuple[np.ndarray, float]:
    """I_i = sum_j W_ij v_j, the one-hop truncation of DebtRank."""
    v = aggregates(system).v
    I = impact_matrix(system) @ v
    return I, float(I.sum())


def pearson(x, y) -> float | None:
    """Pearson correlation, or None when either side has zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        return None
    dx, dy = x - x.mean(), y - y.mean()
    denom = np.sqrt((dx @ dx) * (dy @ dy))
    if denom == 0:
        return None
    return float(np.clip((dx @ dy) / denom, -1.0, 1.0))


def risk_report(system: BankingSystem, epsilon: float = DR2_EPSILON) -> RiskReport:
    R = debtrank_all(system)
    R2 = debtrank2_all(system, epsilon)
    I, I_total = direct_impact(system)
    return RiskReport(R=R, R_total=float(R.sum()), R2=R2, I=I, I_total=I_total,
                      pearson_R_I=pearson(R, I))
