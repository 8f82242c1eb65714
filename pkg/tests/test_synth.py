import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sysrisk.metrics import link_density
from sysrisk.network import validate
from sysrisk.synth import SynthParams, generate


def test_complete_digraph():
    s = generate(SynthParams(n=10, density=1.0, seed=4))
    assert np.count_nonzero(s.liabilities) == 90


def test_same_seed_same_system():
    p = SynthParams(n=8, density=0.4, kappa_rule="leverage", seed=99)
    a, b = generate(p), generate(p)
    assert np.array_equal(a.liabilities, b.liabilities)
    assert np.array_equal(a.equity, b.equity) and np.array_equal(a.kappa, b.kappa)


def test_density_concentration():
    d = [link_density(generate(SynthParams(n=20, density=0.5, seed=s)).liabilities) for s in range(1000)]
    assert abs(np.mean(d) - 0.5) <= 0.03


def test_default_equity_rule_exercises_the_cap():
    s = generate(SynthParams(n=12, density=0.5, seed=1))
    assert (s.liabilities > s.equity[None, :]).any()


def test_bad_params():
    with pytest.raises(ValueError):
        SynthParams(density=0.0)
    with pytest.raises(ValueError):
        SynthParams(weights="pareto")


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 15), st.floats(0.01, 1.0), st.sampled_from(["lognormal", "uniform"]),
       st.sampled_from(["fraction", "lognormal"]), st.sampled_from(["constant", "leverage"]),
       st.integers(0, 2**63 - 1))
def test_generated_systems_validate(n, density, weights, equity_rule, kappa_rule, seed):
    s = generate(SynthParams(n=n, density=density, weights=weights, equity_rule=equity_rule,
                             kappa_rule=kappa_rule, seed=seed))
    assert validate(s) == []
    assert (np.diag(s.liabilities) == 0).all()
    assert (s.kappa >= 1).all()
