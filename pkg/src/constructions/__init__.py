"""Constructions package initialization."""

from src.constructions.closed_forms import (
    approx_ldp_channel,
    approx_ldp_sample_complexity_law,
    binary_pair,
    binary_sample_complexity_law,
    minimax_channel,
    minimax_upper_bound_law,
    rr_binary_parameter,
    rr_tv_contraction,
    sdpi_binary,
    worst_case_pair,
    worst_case_sample_complexity_law,
)
from src.constructions.complexity import (
    SampleComplexityEstimate,
    baseline_sample_complexity,
    complexity_curve,
    curve_slope,
    estimate_sample_complexity,
    free_privacy_threshold,
    parse_eps_grid,
)
from src.constructions.reduction import (
    ComparableSplit,
    Reduction,
    comparable_split,
    free_privacy_channel,
    free_privacy_size,
    reduce_channel,
)

__all__ = [
    "ComparableSplit",
    "Reduction",
    "SampleComplexityEstimate",
    "approx_ldp_channel",
    "approx_ldp_sample_complexity_law",
    "baseline_sample_complexity",
    "binary_pair",
    "binary_sample_complexity_law",
    "comparable_split",
    "complexity_curve",
    "curve_slope",
    "estimate_sample_complexity",
    "free_privacy_channel",
    "free_privacy_size",
    "free_privacy_threshold",
    "minimax_channel",
    "minimax_upper_bound_law",
    "parse_eps_grid",
    "reduce_channel",
    "rr_binary_parameter",
    "rr_tv_contraction",
    "sdpi_binary",
    "worst_case_pair",
    "worst_case_sample_complexity_law",
]
