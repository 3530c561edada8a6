"""Matchings on the line under the k-centrum objective, from ordinal preferences."""
from .core import (
    DomainError,
    InconsistentProfileError,
    Instance,
    InvariantViolation,
    Matching,
    OrdinalProfile,
    check_consistency,
    cost_profile,
    derive_profile,
    k_centrum_cost,
)
from .optimal import brute_force_optimal, greedy_matching, greedy_optimal
from .ordermatch import order_match, order_match_naive, recover_item_order, run_order_match
from .twosided import QueryOracle, TwoSidedInstance, two_sided_optimal

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "InconsistentProfileError",
    "Instance",
    "InvariantViolation",
    "Matching",
    "OrdinalProfile",
    "QueryOracle",
    "TwoSidedInstance",
    "brute_force_optimal",
    "check_consistency",
    "cost_profile",
    "derive_profile",
    "greedy_matching",
    "greedy_optimal",
    "k_centrum_cost",
    "order_match",
    "order_match_naive",
    "recover_item_order",
    "run_order_match",
    "two_sided_optimal",
]
