"""Optimization package initialization."""

from src.optimization.objectives import HELLINGER, OBJECTIVE_NAMES, Objective
from src.optimization.optimizer import (
    Certificate,
    OptResult,
    decomposition_size,
    maximize_comm,
    maximize_private,
    rdp_binary_optimize,
)
from src.optimization.oracle import (
    CommConstraint,
    oracle_deterministic,
    oracle_random_search,
    project_to_family,
)

__all__ = [
    "HELLINGER",
    "OBJECTIVE_NAMES",
    "Certificate",
    "CommConstraint",
    "Objective",
    "OptResult",
    "decomposition_size",
    "maximize_comm",
    "maximize_private",
    "oracle_deterministic",
    "oracle_random_search",
    "project_to_family",
    "rdp_binary_optimize",
]
