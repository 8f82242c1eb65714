"""Interbank exposure network: the liability matrix, balance-sheet vectors and
the quantities every other module derives from them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class BankingSystem:
    """N banks linked by a liability matrix.

    ``liabilities[i, j]`` is the amount bank i owes bank j, i.e. j's exposure
    to i. ``kappa`` is the per-bank credit-risk indicator used to weight
    exposures; it defaults to ones.
    """

    bank_ids: tuple[str, ...]
    equity: np.ndarray
    liabilities: np.ndarray
    kappa: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        equity = np.asarray(self.equity, dtype=float)
        L = np.asarray(self.liabilities, dtype=float)
        if L.ndim != 2 or L.shape[0] != L.shape[1]:
            raise ValueError(f"liability matrix must be square, got shape {L.shape}")
        n = L.shape[0]
        if equity.shape != (n,):
            raise ValueError(f"equity has shape {equity.shape}, expected ({n},)")
        if len(self.bank_ids) != n:
            raise ValueError(f"{len(self.bank_ids)} bank ids for {n} banks")
        if len(set(self.bank_ids)) != n:
            raise ValueError("bank ids must be unique")
        kappa = np.ones(n) if self.kappa is None else np.asarray(self.kappa, dtype=float)
        if kappa.shape != (n,):
            raise ValueError(f"kappa has shape {kappa.shape}, expected ({n},)")
        object.__setattr__(self, "bank_ids", tuple(str(b) for b in self.bank_ids))
        object.__setattr__(self, "equity", equity)
        object.__setattr__(self, "liabilities", L)
        object.__setattr__(self, "kappa", kappa)

    @classmethod
    def from_arrays(cls, liabilities, equity, kappa=None, bank_ids=None) -> "BankingSystem":
        L = np.asarray(liabilities, dtype=float)
        if bank_ids is None:
            bank_ids = tuple(f"b{i}" for i in range(L.shape[0]))
        return cls(tuple(bank_ids), np.asarray(equity, dtype=float), L, kappa)

    @property
    def n(self) -> int:
        return self.liabilities.shape[0]

    def with_liabilities(self, L: np.ndarray) -> "BankingSystem":
        """Same banks and balance sheets, different network."""
        return BankingSystem(self.bank_ids, self.equity, np.asarray(L, dtype=float), self.kappa)

    def with_equity(self, equity) -> "BankingSystem":
        return BankingSystem(self.bank_ids, np.asarray(equity, dtype=float), self.liabilities, self.kappa)


@dataclass(frozen=True)
class DerivedAggregates:
    l: np.ndarray  # row sums: interbank liabilities
    a: np.ndarray  # column sums: interbank assets
    total_volume: float
    v: np.ndarray  # relative weights a / total_volume


def validate(system: BankingSystem) -> list[str]:
    """Return a list of human-readable violations; empty iff well formed."""
    problems = []
    L, e, kappa = system.liabilities, system.equity, system.kappa
    if not np.all(np.isfinite(L)):
        for i, j in np.argwhere(~np.isfinite(L)):
            problems.append(f"non-finite liability at ({i}, {j})")
    if not np.all(np.isfinite(e)):
        for i in np.flatnonzero(~np.isfinite(e)):
            problems.append(f"non-finite equity at {i}")
    if not np.all(np.isfinite(kappa)):
        for i in np.flatnonzero(~np.isfinite(kappa)):
            problems.append(f"non-finite kappa at {i}")
    for i, j in np.argwhere(L < 0):
        problems.append(f"negative liability at ({i}, {j})")
    for i in np.flatnonzero(np.diag(L) != 0):
        problems.append(f"nonzero diagonal at {i}")
    for i in np.flatnonzero(~(e > 0)):
        if np.isfinite(e[i]):
            problems.append(f"non-positive equity at {i}")
    for i in np.flatnonzero(~(kappa > 0)):
        if np.isfinite(kappa[i]):
            problems.append(f"non-positive kappa at {i}")
    return problems


def aggregates(system: BankingSystem) -> DerivedAggregates:
    L = system.liabilities
    l = L.sum(axis=1)
    a = L.sum(axis=0)
    total = float(a.sum())
    v = a / total if total > 0 else np.zeros_like(a)
    return DerivedAggregates(l=l, a=a, total_volume=total, v=v)


def impact_matrix(system: BankingSystem) -> np.ndarray:
    """W[i, j] = min(L[i, j] / e[j], 1): share of j's equity lost if i defaults."""
    return np.minimum(system.liabilities / system.equity[None, :], 1.0)


def leverage_kappa(total_assets, total_liabilities) -> np.ndarray:
    """Leverage ratio TA / (TA - TL) as a credit-risk proxy."""
    ta = np.asarray(total_assets, dtype=float)
    tl = np.asarray(total_liabilities, dtype=float)
    equity = ta - tl
    bad = np.flatnonzero(~(equity > 0))
    if bad.size:
        raise ValueError(f"insolvent balance sheet at {int(bad[0])}")
    return ta / equity


def risk_exposure(system: BankingSystem) -> np.ndarray:
    """Risk-weighted interbank loan exposure r = L^T kappa."""
    return system.liabilities.T @ system.kappa
