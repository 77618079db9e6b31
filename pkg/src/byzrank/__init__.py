"""Byzantine-robust spectral ranking: Rank-Centrality, BSR and FBSR."""

from .byz_filter import FilterParams, bsr_rank, bound_sum_deviations, fbsr_rank
from .errors import (ConvergenceError, DegenerateFilterError, FeasibilityError, InvariantViolation,
                     ParameterError, ParseError, RankingError)
from .graph import ComparisonGraph, generate_er_graph, is_connected
from .metrics import kendall_tau, rel_l2
from .spectral import rank_centrality, stationary
from .voting import VoterPopulation, make_skewed_weights, make_strategy, sample_uniform_weights

__all__ = [
    "ComparisonGraph", "ConvergenceError", "DegenerateFilterError", "FeasibilityError", "FilterParams",
    "InvariantViolation", "ParameterError", "ParseError", "RankingError", "VoterPopulation",
    "bound_sum_deviations", "bsr_rank", "fbsr_rank", "generate_er_graph", "is_connected",
    "kendall_tau", "make_skewed_weights", "make_strategy", "rank_centrality", "rel_l2",
    "sample_uniform_weights", "stationary",
]
