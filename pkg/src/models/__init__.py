"""Models package initialization."""

from src.models.distributions import (
    Channel,
    Distribution,
    LikelihoodOrder,
    LikelihoodRatio,
    PairCanonicalization,
    apply,
    canonicalize,
    compose,
    likelihood_order,
)
from src.models.divergences import chernoff_info, hellinger_sq, kl, renyi, tv

__all__ = [
    "Channel",
    "Distribution",
    "LikelihoodOrder",
    "LikelihoodRatio",
    "PairCanonicalization",
    "apply",
    "canonicalize",
    "compose",
    "likelihood_order",
    "chernoff_info",
    "hellinger_sq",
    "kl",
    "renyi",
    "tv",
]
