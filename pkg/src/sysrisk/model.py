"""Mixed-integer linear program whose optimum is the network with minimal (or
maximal) total direct impact under fixed row sums, column sums and
risk-weighted exposures.

Variable layout, for N banks and K = N*N matrix entries:

* entry ``k = j*N + i`` is ``L[i, j]`` (column-major stacking);
* ``z[2k]`` is the part of ``L[i, j]`` below creditor equity ``e_j`` and
  ``z[2k+1]`` the part above it;
* ``z[2K + 2k]`` and ``z[2K + 2k + 1]`` are the binaries flagging whether the
  respective part is positive.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .network import BankingSystem, aggregates, risk_exposure

MINIMIZE, MAXIMIZE = "min", "max"
RISK_EQ, RISK_GEQ = "eq", "geq"


def vectorize(L) -> np.ndarray:
    return np.asarray(L, dtype=float).reshape(-1, order="F")


def devectorize(x, n: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if n is None:
        n = int(round(np.sqrt(x.size)))
    return x.reshape((n, n), order="F")


@dataclass(frozen=True)
class ExpandedVectors:
    e_bar: np.ndarray
    a_bar: np.ndarray
    l_bar: np.ndarray


def expand_vectors(system: BankingSystem) -> ExpandedVectors:
    """Per-entry equity, assets and liabilities aligned with ``vectorize``.

    Entry (i, j) gets the creditor's equity e_j and assets a_j, and the
    debtor's row sum l_i.
    """
    n = system.n
    agg = aggregates(system)
    return ExpandedVectors(
        e_bar=np.repeat(system.equity, n),
        a_bar=np.repeat(agg.a, n),
        l_bar=np.tile(agg.l, n),
    )


@dataclass
class MilpProblem:
    n_banks: int
    c: np.ndarray
    A1: sp.csr_array
    A2: sp.csr_array
    A3: sp.csr_array
    A4: sp.csr_array
    b2: np.ndarray
    b3: np.ndarray
    b4: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integrality: np.ndarray
    direction: str = MINIMIZE
    risk_sense: str = RISK_EQ
    n_fixed_binaries: int = 0
    name: str = "sysrisk"

    @property
    def n_entries(self) -> int:
        return self.n_banks * self.n_banks

    @property
    def n_vars(self) -> int:
        return 4 * self.n_entries

    @property
    def b1(self) -> np.ndarray:
        return np.zeros(self.A1.shape[0])

    def y_sums(self, z) -> np.ndarray:
        """Matrix entries x = lower + upper part, in vectorized order."""
        K = self.n_entries
        y = np.asarray(z, dtype=float)[: 2 * K]
        return y[0::2] + y[1::2]

    def objective(self, z) -> float:
        return float(self.c @ np.asarray(z, dtype=float))

    def inequality_system(self):
        """(A_ub, b_ub) in <= form: A1 plus A4 when the risk rows are >=."""
        if self.risk_sense == RISK_GEQ:
            return sp.vstack([self.A1, -self.A4], format="csr"), np.concatenate([self.b1, -self.b4])
        return self.A1, self.b1

    def equality_system(self):
        blocks, rhs = [self.A2, self.A3], [self.b2, self.b3]
        if self.risk_sense == RISK_EQ:
            blocks.append(self.A4)
            rhs.append(self.b4)
        return sp.vstack(blocks, format="csr"), np.concatenate(rhs)


def _slopes(ev: ExpandedVectors) -> np.ndarray:
    return ev.a_bar / ev.e_bar


def upper_part_bound(ev: ExpandedVectors) -> np.ndarray:
    """u_k = max(0, min(a_bar, l_bar) - e_bar): largest possible above-equity part."""
    return np.maximum(0.0, np.minimum(ev.a_bar, ev.l_bar) - ev.e_bar)


def build_problem(system: BankingSystem, direction: str = MINIMIZE,
                  risk_sense: str = RISK_EQ) -> MilpProblem:
    if direction not in (MINIMIZE, MAXIMIZE):
        raise ValueError(f"unknown direction {direction!r}")
    if risk_sense not in (RISK_EQ, RISK_GEQ):
        raise ValueError(f"unknown risk sense {risk_sense!r}")
    n = system.n
    K = n * n
    ev = expand_vectors(system)
    u = upper_part_bound(ev)
    agg = aggregates(system)

    c = np.zeros(4 * K)
    c[0 : 2 * K : 2] = _slopes(ev)

    k = np.arange(K)
    lo, hi = 2 * k, 2 * k + 1  # below/above-equity y columns
    d_lo, d_hi = 2 * K + lo, 2 * K + hi
    # four rows per entry, all in <= 0 form:
    #   y_lo - e d_lo <= 0;  -y_lo + e d_hi <= 0;  y_hi - u d_hi <= 0;  -d_lo + d_hi <= 0
    rows = np.concatenate([4 * k, 4 * k, 4 * k + 1, 4 * k + 1, 4 * k + 2, 4 * k + 2, 4 * k + 3, 4 * k + 3])
    cols = np.concatenate([lo, d_lo, lo, d_hi, hi, d_hi, d_lo, d_hi])
    vals = np.concatenate([np.ones(K), -ev.e_bar, -np.ones(K), ev.e_bar,
                           np.ones(K), -u, -np.ones(K), np.ones(K)])
    A1 = _csr(rows, cols, vals, (4 * K, 4 * K))

    debtor = k % n  # row index i of entry k
    creditor = k // n  # column index j
    off = debtor != creditor
    ko = k[off]
    # each off-diagonal entry contributes both y parts to its sums
    y_cols = np.concatenate([2 * ko, 2 * ko + 1])
    A2 = _csr(np.tile(creditor[off], 2), y_cols, np.ones(2 * ko.size), (n, 4 * K))
    A3 = _csr(np.tile(debtor[off], 2), y_cols, np.ones(2 * ko.size), (n, 4 * K))
    A4 = _csr(np.tile(creditor[off], 2), y_cols, np.tile(system.kappa[debtor[off]], 2), (n, 4 * K))

    lb = np.zeros(4 * K)
    ub = np.concatenate([np.column_stack([ev.e_bar, u]).ravel(), np.ones(2 * K)])
    diag = k[~off]
    for offset in (0, 1):
        ub[2 * diag + offset] = 0.0
        ub[2 * K + 2 * diag + offset] = 0.0
    integrality = np.zeros(4 * K, dtype=bool)
    integrality[2 * K :] = True

    return MilpProblem(
        n_banks=n, c=c, A1=A1, A2=A2, A3=A3, A4=A4,
        b2=agg.a.copy(), b3=agg.l.copy(), b4=risk_exposure(system),
        lb=lb, ub=ub, integrality=integrality,
        direction=direction, risk_sense=risk_sense,
    )


def _csr(rows, cols, vals, shape) -> sp.csr_array:
    m = sp.coo_array((vals, (rows, cols)), shape=shape).tocsr()
    m.eliminate_zeros()
    m.sort_indices()
    return m


def presolve(problem: MilpProblem) -> MilpProblem:
    """Fix variables that cannot be positive; feasible set is unchanged.

    Upper parts with ``u_k = 0`` and whole entries with ``min(a, l) = 0`` are
    pinned to zero together with their binaries. Binaries whose upper bound
    is zero, and all below-equity binaries, are dropped from the integer set.
    """
    K = problem.n_entries
    lb, ub = problem.lb.copy(), problem.ub.copy()
    integrality = problem.integrality.copy()
    k = np.arange(K)
    lo, hi = 2 * k, 2 * k + 1
    d_lo, d_hi = 2 * K + lo, 2 * K + hi

    # u_k sits in A1 row 4k+2 as the coefficient of d_hi; an absent entry means 0
    u = -_row_coef(problem.A1, 4 * k + 2, d_hi)
    upper_dead = (u <= 0) | (ub[hi] <= 0)
    ub[hi[upper_dead]] = 0.0
    ub[d_hi[upper_dead]] = 0.0

    # entry capacity min(a_bar, l_bar) is zero when its column/row sum is zero
    row_sum = problem.b3[k % problem.n_banks] if problem.n_banks else np.zeros(0)
    col_sum = problem.b2[k // problem.n_banks] if problem.n_banks else np.zeros(0)
    entry_dead = (np.minimum(col_sum, row_sum) <= 0) | (ub[lo] <= 0)
    for idx in (lo, hi, d_lo, d_hi):
        ub[idx[entry_dead]] = 0.0

    # d_lo = 1 admits every y_lo in [0, e], so its integrality never cuts off a y;
    # only d_hi carries the fill order
    fixed_binary = integrality & (ub <= 0)
    fixed_binary[d_lo] |= integrality[d_lo]
    integrality[fixed_binary] = False
    return replace(problem, lb=lb, ub=ub, integrality=integrality,
                   n_fixed_binaries=problem.n_fixed_binaries + int(fixed_binary.sum()))


def _row_coef(A: sp.csr_array, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    out = np.zeros(len(rows))
    indptr, indices, data = A.indptr, A.indices, A.data
    for t, (r, c) in enumerate(zip(rows, cols)):
        seg = slice(indptr[r], indptr[r + 1])
        hit = np.flatnonzero(indices[seg] == c)
        if hit.size:
            out[t] = data[seg][hit[0]]
    return out


def split_entries(x, e_bar) -> tuple[np.ndarray, np.ndarray]:
    """Canonical (below-equity, above-equity) split of matrix entries."""
    x = np.asarray(x, dtype=float)
    below = np.minimum(x, e_bar)
    return below, np.maximum(0.0, x - e_bar)


def feasible_point(problem: MilpProblem, x, e_bar) -> np.ndarray:
    """A MILP variable vector representing the network ``x = vec(L)``.

    Binaries follow positivity of each part.
    """
    K = problem.n_entries
    below, above = split_entries(x, e_bar)
    z = np.zeros(4 * K)
    z[0 : 2 * K : 2] = below
    z[1 : 2 * K : 2] = above
    z[2 * K :: 2] = below > 0
    z[2 * K + 1 :: 2] = above > 0
    return z


def network_point(system: BankingSystem, problem: MilpProblem, L=None) -> np.ndarray:
    """Feasible MILP point of a network (the system's own by default)."""
    L = system.liabilities if L is None else L
    return feasible_point(problem, vectorize(L), expand_vectors(system).e_bar)


def objective_value(system: BankingSystem, L) -> float:
    """sum_ij min(L_ij / e_j, 1) a_j with a taken from ``system`` (held fixed)."""
    a = aggregates(system).a
    L = np.asarray(L, dtype=float)
    return float((np.minimum(L / system.equity[None, :], 1.0) @ a).sum())
