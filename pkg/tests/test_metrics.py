import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sysrisk.metrics import (clustering, degree_assortativity, link_density, threshold_network,
                             topology_report, weighted_nn_degree)

from conftest import systems


def to_digraph(L):
    G = nx.DiGraph()
    G.add_nodes_from(range(len(L)))
    G.add_edges_from((i, j) for i, j in zip(*np.nonzero(L)) if i != j)
    return G


def test_density_examples():
    full = np.ones((4, 4)) - np.eye(4)
    assert link_density(full) == 1.0
    assert link_density(np.zeros((3, 3))) == 0.0
    three = np.array([[0, 0, 6], [6, 0, 0], [0, 6, 0.0]])
    assert link_density(three) == 0.5


def test_clustering_examples():
    tri = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0.0]])
    c, C = clustering(tri)
    assert c == 1.0 and (C == 1).all()
    path = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0.0]])
    assert clustering(path)[1][1] == 0.0
    # triangle 0-1-2 plus pendant 3 on node 2
    L = np.zeros((4, 4))
    L[0, 1] = L[1, 2] = L[2, 0] = L[2, 3] = 1.0
    c, C = clustering(L)
    assert np.allclose(C, [1, 1, 1 / 3, 0])
    assert c == pytest.approx((1 + 1 + 1 / 3) / 4)


def test_assortativity_degenerate_cases():
    ring = np.roll(np.eye(4), 1, axis=1)
    assert degree_assortativity(ring) is None
    path = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0.0]])
    # out-in excess degrees per link: (0, 0) and (0, -1); no source variance
    assert degree_assortativity(path) is None
    assert degree_assortativity(np.zeros((3, 3))) is None


def test_assortativity_hand_computed():
    # links 0->1, 0->2, 1->2, 3->0
    L = np.zeros((4, 4))
    L[0, 1] = L[0, 2] = L[1, 2] = L[3, 0] = 1.0
    j = np.array([1, 1, 0, 0.0])   # excess out-degree of sources 0, 0, 1, 3
    k = np.array([0, 1, 1, 0.0])   # excess in-degree of targets 1, 2, 2, 0
    assert degree_assortativity(L) == pytest.approx(np.corrcoef(j, k)[0, 1])


def test_knn_examples():
    pair = np.array([[0, 5], [0, 0.0]])
    knn, mean = weighted_nn_degree(pair)
    assert knn[0] == 1.0 and mean == 1.0
    ring = np.array([[0, 6, 0], [0, 0, 6], [6, 0, 0.0]])
    knn, _ = weighted_nn_degree(ring)
    assert np.allclose(knn, 2.0)
    L = np.zeros((3, 3))
    L[0, 1] = 2.0
    knn, mean = weighted_nn_degree(L)
    assert np.isnan(knn[2]) and mean == 1.0


def test_threshold_examples():
    L = np.zeros((3, 3))
    L[0, 1], L[1, 2], L[2, 0], L[0, 2] = 10, 5, 3, 2
    T = threshold_network(L, 0.9)
    assert sorted(T[T > 0].tolist()) == [3, 5, 10]
    assert np.array_equal(threshold_network(L, 1.0), L)
    one = np.zeros((2, 2))
    one[0, 1] = 7.0
    assert np.array_equal(threshold_network(one, 0.01), one)
    with pytest.raises(ValueError):
        threshold_network(L, 0.0)


def test_threshold_tie_break_by_index():
    L = np.zeros((3, 3))
    L[0, 1] = L[1, 0] = L[2, 0] = 1.0
    T = threshold_network(L, 0.5)
    assert T[0, 1] == 1 and T[1, 0] == 1 and T[2, 0] == 0


@settings(max_examples=50, deadline=None)
@given(systems(min_n=3, max_n=9))
def test_against_networkx(s):
    L = s.liabilities
    G = to_digraph(L)
    ours = degree_assortativity(L, "out-in")
    if ours is not None:
        ref = nx.degree_pearson_correlation_coefficient(G, x="out", y="in")
        assert ours == pytest.approx(ref, abs=1e-9)
    c, C = clustering(L)
    ref_c = nx.clustering(G.to_undirected())
    assert np.allclose(C, [ref_c[i] for i in range(s.n)])
    assert c == pytest.approx(nx.average_clustering(G.to_undirected()))


@settings(max_examples=50, deadline=None)
@given(systems(min_n=2, max_n=9), st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_threshold_properties(s, c1, c2):
    L = s.liabilities
    lo, hi = sorted((c1, c2))
    T = threshold_network(L, hi)
    kept = T > 0
    assert np.array_equal(T[kept], L[kept])
    total = L.sum()
    if total > 0:
        assert T.sum() >= hi * total * (1 - 1e-12)
        smallest = T[kept].min()
        assert T.sum() - smallest < hi * total
    assert link_density(threshold_network(L, lo)) <= link_density(T)


@settings(max_examples=40, deadline=None)
@given(systems(min_n=2, max_n=8))
def test_scale_invariance(s):
    L = s.liabilities
    a, b = topology_report(L), topology_report(2 * L)
    assert a.link_density == b.link_density
    assert a.assortativity == b.assortativity
    assert a.mean_clustering == b.mean_clustering
    assert (a.mean_knn_w is None and b.mean_knn_w is None) or a.mean_knn_w == pytest.approx(b.mean_knn_w)
    assert 0 <= a.link_density <= 1
    assert (a.local_clustering >= 0).all() and (a.local_clustering <= 1).all()
    assert a.assortativity is None or -1 <= a.assortativity <= 1
