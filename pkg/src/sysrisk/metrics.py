"""Topology measures for comparing empirical, optimized and thresholded networks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# (source degree, target degree) used per link in the assortativity formula
ASSORTATIVITY_CONVENTIONS = {
    "out-in": ("out", "in"),
    "in-out": ("in", "out"),
    "in-in": ("in", "in"),
    "out-out": ("out", "out"),
    "total": ("total", "total"),
}


@dataclass
class TopologyReport:
    link_density: float
    k_in: np.ndarray
    k_out: np.ndarray
    assortativity: float | None
    assortativity_convention: str
    mean_clustering: float
    local_clustering: np.ndarray
    knn_w: np.ndarray  # NaN for isolated nodes
    mean_knn_w: float | None


def adjacency(L) -> np.ndarray:
    A = np.asarray(L, dtype=float) > 0
    np.fill_diagonal(A, False)
    return A


def link_density(L) -> float:
    A = adjacency(L)
    n = A.shape[0]
    if n < 2:
        return 0.0
    return float(A.sum() / (n * (n - 1)))


def _degrees(A: np.ndarray, kind: str) -> np.ndarray:
    if kind == "out":
        return A.sum(axis=1)
    if kind == "in":
        return A.sum(axis=0)
    return A.sum(axis=0) + A.sum(axis=1)


def degree_assortativity(L, convention: str = "out-in") -> float | None:
    """Pearson correlation of excess degrees at the two ends of every link.

    ``convention`` names the degree taken at the source and at the target
    (default: out-degree of the source, in-degree of the target). Returns
    None when either side has no variance or there are fewer than two links.
    """
    src_kind, dst_kind = ASSORTATIVITY_CONVENTIONS[convention]
    A = adjacency(L)
    src, dst = np.nonzero(A)
    m = len(src)
    if m < 2:
        return None
    j = _degrees(A, src_kind)[src] - 1.0
    k = _degrees(A, dst_kind)[dst] - 1.0
    num = j @ k - j.sum() * k.sum() / m
    var_j = j @ j - j.sum() ** 2 / m
    var_k = k @ k - k.sum() ** 2 / m
    if var_j <= 1e-12 * max(1.0, j @ j) or var_k <= 1e-12 * max(1.0, k @ k):
        return None
    return float(np.clip(num / np.sqrt(var_j * var_k), -1.0, 1.0))


def clustering(L) -> tuple[float, np.ndarray]:
    """Local clustering on the symmetrized unweighted graph, and its mean."""
    A = adjacency(L)
    U = (A | A.T).astype(float)
    deg = U.sum(axis=1)
    triangles = np.einsum("ij,jk,ki->i", U, U, U) / 2.0
    pairs = deg * (deg - 1) / 2.0
    C = np.divide(triangles, pairs, out=np.zeros_like(triangles), where=pairs > 0)
    return float(C.mean()) if len(C) else 0.0, C


def weighted_nn_degree(L) -> tuple[np.ndarray, float | None]:
    """k^w_nn,i = (a_i + l_i)^-1 sum_j (L_ij + L_ji) k_j with k the total degree.

    Isolated nodes get NaN and are left out of the mean.
    """
    L = np.asarray(L, dtype=float).copy()
    np.fill_diagonal(L, 0.0)
    k = _degrees(adjacency(L), "total").astype(float)
    S = L + L.T
    strength = S.sum(axis=1)
    knn = np.full(len(k), np.nan)
    ok = strength > 0
    knn[ok] = (S[ok] @ k) / strength[ok]
    mean = float(knn[ok].mean()) if ok.any() else None
    return knn, mean


def threshold_network(L, coverage: float = 0.9) -> np.ndarray:
    """Keep the largest links until they carry ``coverage`` of total volume.

    Links are ranked by weight, descending; equal weights keep (row, col)
    order.
    """
    if not 0 < coverage <= 1:
        raise ValueError("coverage must lie in (0, 1]")
    L = np.asarray(L, dtype=float)
    out = np.zeros_like(L)
    rows, cols = np.nonzero(adjacency(L))
    if coverage == 1:
        out[rows, cols] = L[rows, cols]
        return out
    if len(rows) == 0:
        return out
    w = L[rows, cols]
    order = np.lexsort((cols, rows, -w))
    total = w.sum()
    target = coverage * total
    cum = 0.0
    for idx in order:
        if cum >= target:
            break
        out[rows[idx], cols[idx]] = w[idx]
        cum += w[idx]
    return out


def topology_report(L, convention: str = "out-in") -> TopologyReport:
    A = adjacency(L)
    c_mean, C = clustering(L)
    knn, knn_mean = weighted_nn_degree(L)
    return TopologyReport(
        link_density=link_density(L),
        k_in=A.sum(axis=0),
        k_out=A.sum(axis=1),
        assortativity=degree_assortativity(L, convention),
        assortativity_convention=convention,
        mean_clustering=c_mean,
        local_clustering=C,
        knn_w=knn,
        mean_knn_w=knn_mean,
    )
