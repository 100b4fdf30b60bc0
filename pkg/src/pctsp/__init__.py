"""Polychromatic TSP: approximation, exact search and a hardness construction."""

from .instance import ClassOrder, Instance, Tour, check_metric, distance, verify_sigma_tour
from .matching import matching_cost_matrix, min_cost_matching
from .oracle import solve_exact
from .solver import choose_order, fixed_order_tour, solve

__all__ = [
    "ClassOrder",
    "Instance",
    "Tour",
    "check_metric",
    "choose_order",
    "distance",
    "fixed_order_tour",
    "matching_cost_matrix",
    "min_cost_matching",
    "solve",
    "solve_exact",
    "verify_sigma_tour",
]
