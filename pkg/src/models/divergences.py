"""
Divergences between distributions on a common finite alphabet.

tv, hellinger_sq, kl and renyi accept Distributions or arrays; arrays may carry
leading batch dimensions, in which case the divergence is taken along the last
axis. Hellinger uses the convention without the 1/2 factor, so it ranges over
[0, 2].
"""

import math

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp, rel_entr

from src.models.distributions import DistributionLike, check_pair
from src.settings import GOLDEN_TOLERANCE


def tv(p: DistributionLike, q: DistributionLike):
    """Total variation distance 1/2 sum |p_i - q_i|."""
    a, b = check_pair(p, q)
    result = 0.5 * np.abs(a - b).sum(axis=-1)
    return float(result) if np.ndim(result) == 0 else result


def hellinger_sq(p: DistributionLike, q: DistributionLike):
    """
    Squared Hellinger divergence sum (sqrt(p_i) - sqrt(q_i))^2.

    Evaluated as sum ((p_i - q_i) / (sqrt(p_i) + sqrt(q_i)))^2, which keeps
    full relative precision when p and q are close.
    """
    a, b = check_pair(p, q)
    roots = np.sqrt(a) + np.sqrt(b)
    scaled = np.divide(a - b, roots, out=np.zeros_like(roots), where=roots > 0)
    result = np.square(scaled).sum(axis=-1)
    return float(result) if np.ndim(result) == 0 else result


def kl(p: DistributionLike, q: DistributionLike):
    """Kullback-Leibler divergence in nats; +inf unless p << q."""
    a, b = check_pair(p, q)
    result = rel_entr(a, b).sum(axis=-1)
    return float(result) if np.ndim(result) == 0 else result


def renyi(p: DistributionLike, q: DistributionLike, alpha: float):
    """
    Renyi divergence of order alpha in nats.

    alpha = 1 dispatches to kl and alpha = inf gives log max p_i / q_i.

    Raises:
        ValueError: If alpha <= 0
    """
    if alpha <= 0:
        raise ValueError(f"Renyi order must be positive, got {alpha}")
    if alpha == 1:
        return kl(p, q)
    a, b = check_pair(p, q)

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if math.isinf(alpha):
            ratios = np.where(a > 0, np.log(a) - np.log(b), -np.inf)
            result = np.max(ratios, axis=-1)
        else:
            terms = np.where(a > 0, np.power(a, alpha) * np.power(b, 1.0 - alpha), 0.0)
            total = terms.sum(axis=-1)
            result = np.log(total) / (alpha - 1.0)
            if alpha < 1:
                result = np.where(total > 0, result, np.inf)
    result = np.maximum(result, 0.0)
    return float(result) if np.ndim(result) == 0 else result


def chernoff_info(p: DistributionLike, q: DistributionLike) -> float:
    """
    Chernoff information -min over lambda in [0, 1] of log sum p^lambda q^(1-lambda).

    The lambda search is a bounded Brent search to GOLDEN_TOLERANCE, compared
    against both endpoints because the minimum can sit on the boundary.
    """
    a, b = check_pair(p, q)
    if a.ndim != 1:
        raise ValueError("chernoff_info works on a single pair, not a batch")
    common = (a > 0) & (b > 0)
    if not np.any(common):
        return float("inf")
    log_a, log_b = np.log(a[common]), np.log(b[common])

    def log_affinity(lam: float) -> float:
        return float(logsumexp(lam * log_a + (1.0 - lam) * log_b))

    search = minimize_scalar(
        log_affinity, bounds=(0.0, 1.0), method="bounded", options={"xatol": GOLDEN_TOLERANCE}
    )
    lowest = min(float(search.fun), log_affinity(0.0), log_affinity(1.0))
    return max(0.0, -lowest)
