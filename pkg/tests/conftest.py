import numpy as np
import pytest
from hypothesis import strategies as st

from sysrisk.network import BankingSystem


def family(t: float, equity: float = 4.0) -> BankingSystem:
    """Three banks, every row and column summing to 6; t moves weight around the cycle."""
    L = np.array([[0.0, t, 6 - t], [6 - t, 0.0, t], [t, 6 - t, 0.0]])
    return BankingSystem.from_arrays(L, np.full(3, equity))


def random_system(rng, n, density=0.6, hetero_kappa=False, phi=None) -> BankingSystem:
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    L = np.where(mask, rng.lognormal(0.0, 1.0, (n, n)), 0.0)
    a = L.sum(axis=0)
    # mix of banks that are easy and hard to wipe out
    frac = rng.uniform(0.1, 0.8, n) if phi is None else np.full(n, phi)
    equity = frac * (a + 1.0)
    kappa = rng.uniform(1.0, 20.0, n) if hetero_kappa else None
    return BankingSystem.from_arrays(L, equity, kappa)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def systems(draw, min_n=2, max_n=6, hetero_kappa=None):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(min_n, max_n))
    density = draw(st.floats(0.2, 1.0))
    het = draw(st.booleans()) if hetero_kappa is None else hetero_kappa
    return random_system(np.random.default_rng(seed), n, density, het)


# filled by test_acceptance.report; echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
