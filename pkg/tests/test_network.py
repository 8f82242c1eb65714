import numpy as np
import pytest
from hypothesis import given

from sysrisk.network import (BankingSystem, aggregates, impact_matrix, leverage_kappa,
                             risk_exposure, validate)

from conftest import systems


def test_aggregates_and_impact():
    L = np.array([[0, 5, 0], [0, 0, 5], [0, 0, 0.0]])
    s = BankingSystem.from_arrays(L, [10, 10, 10])
    agg = aggregates(s)
    assert agg.l.tolist() == [5, 5, 0]
    assert agg.a.tolist() == [0, 5, 5]
    assert agg.total_volume == 10
    assert np.allclose(agg.v, [0, 0.5, 0.5])
    W = impact_matrix(s)
    assert W[0, 1] == 0.5 and W[1, 2] == 0.5


def test_impact_matrix_caps_at_one():
    s = BankingSystem.from_arrays([[0, 30.0], [1.0, 0]], [10, 10])
    assert impact_matrix(s)[0, 1] == 1.0


def test_validate_messages():
    s = BankingSystem(("x", "y"), np.array([1.0, -1.0]), np.array([[2.0, -1.0], [0.0, 0.0]]))
    msgs = validate(s)
    assert any("diagonal" in m for m in msgs)
    assert any("equity" in m for m in msgs)
    assert any("negative" in m for m in msgs)


def test_validate_clean_system():
    s = BankingSystem.from_arrays([[0, 1.0], [2.0, 0]], [1, 1])
    assert validate(s) == []
    assert s.bank_ids == ("b0", "b1")


def test_leverage_kappa():
    assert np.allclose(leverage_kappa([100, 50], [90, 0]), [10, 1])
    with pytest.raises(ValueError, match="insolvent"):
        leverage_kappa([100], [100])


def test_risk_exposure_matches_column_sums_for_unit_kappa():
    L = np.array([[0, 1, 2], [3, 0, 4], [5, 6, 0.0]])
    s = BankingSystem.from_arrays(L, np.ones(3))
    assert np.array_equal(risk_exposure(s), L.sum(axis=0))


@given(systems())
def test_volume_identity(s):
    agg = aggregates(s)
    assert np.isclose(agg.l.sum(), agg.a.sum())
    if agg.total_volume > 0:
        assert np.isclose(agg.v.sum(), 1.0)
    W = impact_matrix(s)
    assert (W >= 0).all() and (W <= 1).all()
