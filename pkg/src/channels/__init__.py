"""Channels package initialization."""

from src.channels.ldp import (
    EntryClass,
    EntryTag,
    ForbiddenPattern,
    LpFamily,
    approx_binary_family,
    classify_entries,
    find_forbidden,
    forbidden_witness,
    membership,
    mix_into_family,
    random_member,
    randomized_response,
    sldp_family,
)
from src.channels.polytope import (
    extreme_points,
    extreme_points_catalog,
    free_entries_per_column,
    unique_column_bound,
    unique_column_count,
    vertex_enumeration,
)
from src.channels.rdp import RdpBinaryFamily, rdp_binary_family, rr_feasibility_limit
from src.channels.threshold import (
    ExtremalityWitness,
    ThresholdPartition,
    count_threshold,
    enumerate_partitions,
    enumerate_threshold,
    is_threshold,
    non_extremality_witness,
    scheffe_channel,
)

__all__ = [
    "EntryClass",
    "EntryTag",
    "ExtremalityWitness",
    "ForbiddenPattern",
    "LpFamily",
    "RdpBinaryFamily",
    "ThresholdPartition",
    "approx_binary_family",
    "classify_entries",
    "count_threshold",
    "enumerate_partitions",
    "enumerate_threshold",
    "extreme_points",
    "extreme_points_catalog",
    "find_forbidden",
    "forbidden_witness",
    "free_entries_per_column",
    "is_threshold",
    "membership",
    "mix_into_family",
    "non_extremality_witness",
    "random_member",
    "randomized_response",
    "rdp_binary_family",
    "rr_feasibility_limit",
    "scheffe_channel",
    "sldp_family",
    "unique_column_bound",
    "unique_column_count",
    "vertex_enumeration",
]
