"""Network-based systemic risk (DebtRank, direct impact) and exact MILP
rewiring of interbank exposure networks to their impact minimum or maximum."""
from .contagion import RiskReport, debtrank2_all, debtrank_all, direct_impact, risk_report
from .model import MilpProblem, build_problem, objective_value, presolve
from .network import BankingSystem, aggregates, impact_matrix, leverage_kappa, validate
from .solver import MilpSolution, SolveOptions, extract_network, solve

__all__ = [
    "BankingSystem", "MilpProblem", "MilpSolution", "RiskReport", "SolveOptions",
    "aggregates", "build_problem", "debtrank2_all", "debtrank_all", "direct_impact",
    "extract_network", "impact_matrix", "leverage_kappa", "objective_value", "presolve",
    "risk_report", "solve", "validate",
]
