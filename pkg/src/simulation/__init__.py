"""Simulation package initialization."""

from src.simulation.protocol_simulator import (
    ErrorReport,
    ProtocolConfig,
    ProtocolSimulator,
    decide_p,
    exact_binary_error,
    find_sample_size,
    run_protocol,
    wilson_half_width,
)

__all__ = [
    "ErrorReport",
    "ProtocolConfig",
    "ProtocolSimulator",
    "decide_p",
    "exact_binary_error",
    "find_sample_size",
    "run_protocol",
    "wilson_half_width",
]
