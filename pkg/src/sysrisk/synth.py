"""Random interbank networks for desk-scale experiments."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import BankingSystem, leverage_kappa


@dataclass
class SynthParams:
    n: int = 10
    density: float = 0.5
    weights: str = "lognormal"  # or "uniform"
    mu: float = 0.0
    sigma: float = 1.0
    low: float = 1.0
    high: float = 10.0
    equity_rule: str = "fraction"  # e_i = phi * (a_i + 1); or "lognormal"
    phi: float = 0.25
    equity_mu: float = 0.0
    equity_sigma: float = 1.0
    kappa_rule: str = "constant"  # or "leverage"
    leverage_range: tuple[float, float] = (5.0, 25.0)
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if self.weights not in ("lognormal", "uniform"):
            raise ValueError(f"unknown weight distribution {self.weights!r}")
        if self.equity_rule not in ("fraction", "lognormal"):
            raise ValueError(f"unknown equity rule {self.equity_rule!r}")
        if self.kappa_rule not in ("constant", "leverage"):
            raise ValueError(f"unknown kappa rule {self.kappa_rule!r}")


def generate(params: SynthParams) -> BankingSystem:
    """Directed Erdos-Renyi skeleton with random weights and balance sheets."""
    rng = np.random.default_rng(params.seed)
    n = params.n
    mask = rng.random((n, n)) < params.density
    np.fill_diagonal(mask, False)
    if params.weights == "lognormal":
        w = rng.lognormal(params.mu, params.sigma, (n, n))
    else:
        w = rng.uniform(params.low, params.high, (n, n))
    L = np.where(mask, w, 0.0)
    a = L.sum(axis=0)
    if params.equity_rule == "fraction":
        equity = params.phi * (a + 1.0)
    else:
        equity = rng.lognormal(params.equity_mu, params.equity_sigma, n)
    if params.kappa_rule == "leverage":
        # draw a leverage ratio, back out total assets/liabilities consistent with equity
        lev = rng.uniform(*params.leverage_range, n)
        total_assets = lev * equity
        kappa = leverage_kappa(total_assets, total_assets - equity)
    else:
        kappa = np.ones(n)
    return BankingSystem.from_arrays(L, equity, kappa)
