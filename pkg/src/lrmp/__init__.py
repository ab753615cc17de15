"""Exact, combinatorial and Monte Carlo tools for long-range misanthrope
processes on a ring, with checks for factorised stationary states."""

from .dynamics import RateSpec, build_generator, edge_current, edge_currents, enumerate_transitions
from .exact import product_form_oracle, solve, stationary
from .factorise import (
    check_hpalrmp, check_hpalrmp_alt, check_palrmp, check_slrmp,
    construct_rate_hpalrmp, construct_rate_palrmp, construct_rate_slrmp,
    factorised_distribution, one_point,
)
from .had import HadSystem, edge_current_formula, had_distribution, had_probability, had_weight
from .montecarlo import simulate, tv_distance
from .statespace import StateSpace, rank, unrank

__all__ = [
    "RateSpec", "build_generator", "edge_current", "edge_currents", "enumerate_transitions",
    "product_form_oracle", "solve", "stationary",
    "check_hpalrmp", "check_hpalrmp_alt", "check_palrmp", "check_slrmp",
    "construct_rate_hpalrmp", "construct_rate_palrmp", "construct_rate_slrmp",
    "factorised_distribution", "one_point",
    "HadSystem", "edge_current_formula", "had_distribution", "had_probability", "had_weight",
    "simulate", "tv_distance",
    "StateSpace", "rank", "unrank",
]
