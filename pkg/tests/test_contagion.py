import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sysrisk.contagion import (ConvergenceWarning, debtrank2_all, debtrank2_single, debtrank_all,
                               direct_impact, pearson, risk_report)
from sysrisk.network import BankingSystem, aggregates, impact_matrix

from conftest import systems

CHAIN = BankingSystem.from_arrays([[0, 5, 0], [0, 0, 5], [0, 0, 0.0]], [10, 10, 10])
PAIR = BankingSystem.from_arrays([[0, 5], [0, 0.0]], [10, 10])
RING = BankingSystem.from_arrays([[0, 6, 0], [0, 0, 6], [6, 0, 0.0]], [4, 4, 4])


def reference_debtrank(W, v, seed):
    """Plain-loop transcription of the recursion, one scalar at a time."""
    n = len(v)
    h = [0.0] * n
    s = ["U"] * n
    h[seed], s[seed] = 1.0, "D"
    while "D" in s:
        h_new = list(h)
        for j in range(n):
            total = h[j]
            for i in range(n):
                if s[i] == "D":
                    total += W[i][j] * h[i]
            h_new[j] = min(1.0, total)
        s_new = list(s)
        for j in range(n):
            if s[j] == "D":
                s_new[j] = "I"
            elif s[j] == "U" and h_new[j] > 0:
                s_new[j] = "D"
        h, s = h_new, s_new
    return sum(h[j] * v[j] for j in range(n) if j != seed)


def test_pair():
    assert np.allclose(debtrank_all(PAIR), [0.5, 0.0])
    I, total = direct_impact(PAIR)
    assert np.allclose(I, [0.5, 0]) and total == pytest.approx(0.5)


def test_chain():
    R = debtrank_all(CHAIN)
    assert np.allclose(R, [0.375, 0.25, 0.0], atol=1e-15)
    assert R.sum() == pytest.approx(0.625)
    I, total = direct_impact(CHAIN)
    assert np.allclose(I, [0.25, 0.25, 0]) and total == pytest.approx(0.5)


def test_chain_dr2_equals_dr():
    assert np.allclose(debtrank2_all(CHAIN), debtrank_all(CHAIN), atol=1e-12)


def test_ring_direct_impact():
    I, total = direct_impact(RING)
    assert np.allclose(I, 1 / 3) and total == pytest.approx(1.0)


def test_zero_network():
    s = BankingSystem.from_arrays(np.zeros((3, 3)), np.ones(3))
    rep = risk_report(s)
    assert rep.R_total == 0 and rep.I_total == 0 and not rep.R2.any()
    assert rep.pearson_R_I is None


def test_dr2_strictly_exceeds_dr_on_cycle():
    # 0 -> 1 -> 2 -> 1: the 1-2 loop keeps passing increments around
    L = np.zeros((3, 3))
    L[0, 1] = L[1, 2] = L[2, 1] = 5.0
    s = BankingSystem.from_arrays(L, np.full(3, 10.0))
    R, R2 = debtrank_all(s), debtrank2_all(s, epsilon=1e-14)
    # v = (0, 2/3, 1/3); DR: h1 = 0.5 + 0.5 * 0.25, h2 = 0.25
    assert R[0] == pytest.approx(0.5)
    # DR2: h1 = 0.5 / (1 - 0.25), h2 = 0.5 * h1
    assert R2[0] == pytest.approx(5 / 9, abs=1e-12)
    assert R2[0] > R[0]


def test_dr2_two_cycle_seed_is_capped():
    # the echo comes back to the already defaulted seed, so nothing extra is gained
    s = BankingSystem.from_arrays([[0, 5], [5, 0.0]], [10, 10])
    assert debtrank2_all(s)[0] == pytest.approx(debtrank_all(s)[0])


def test_dr2_convergence_warning():
    L = np.zeros((3, 3))
    L[0, 1] = L[1, 2] = L[2, 1] = 5.0
    s = BankingSystem.from_arrays(L, np.full(3, 10.0))
    W, v = impact_matrix(s), aggregates(s).v
    with pytest.warns(ConvergenceWarning):
        _, ok = debtrank2_single(W, v, 0, epsilon=1e-12, max_iter=3)
    assert not ok


def test_pearson_degenerate():
    assert pearson([1, 1, 1], [1, 2, 3]) is None
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)


@settings(max_examples=60, deadline=None)
@given(systems(max_n=7))
def test_matches_reference(s):
    W, v = impact_matrix(s), aggregates(s).v
    R = debtrank_all(s)
    if not v.any():
        return
    ref = [reference_debtrank(W.tolist(), v.tolist(), i) for i in range(s.n)]
    assert np.allclose(R, ref, rtol=0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(systems(max_n=7))
def test_ordering_I_R_R2(s):
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConvergenceWarning)
        rep = risk_report(s)
    assert (rep.I <= rep.R + 1e-12).all()
    assert (rep.R <= rep.R2 + 1e-6).all()
    assert (rep.R2 <= 1 + 1e-12).all()


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_dr2_equals_dr_on_trees(n, seed):
    # random arborescence: every bank but the root owes exactly one parent
    rng = np.random.default_rng(seed)
    L = np.zeros((n, n))
    for child in range(1, n):
        L[child, rng.integers(0, child)] = rng.lognormal()
    s = BankingSystem.from_arrays(L, rng.uniform(0.1, 0.8, n) * (L.sum(axis=0) + 1.0))
    assert np.allclose(debtrank_all(s), debtrank2_all(s, epsilon=1e-15), rtol=0, atol=1e-12)


def test_dr_and_dr2_differ_on_reconvergent_dag():
    # 0 -> 1 -> 2 and 0 -> 2: bank 2 is hit twice, DebtRank passes only the first hit on to 3
    L = np.zeros((4, 4))
    L[0, 1] = L[0, 2] = L[1, 2] = L[2, 3] = 2.0
    s = BankingSystem.from_arrays(L, np.full(4, 10.0))
    assert debtrank2_all(s)[0] > debtrank_all(s)[0] + 1e-3
