"""
Closed-form channels and pairs.

Binary randomized response and its contraction identities, the worst-case
ternary pair and its binary counterpart with prescribed (Hellinger, TV), the
minimax binary-output channel, the approximate-LDP augmentation, and the
piecewise sample-complexity laws used as ratio-band oracles.
"""

import math
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from src.channels.ldp import LpFamily, randomized_response
from src.channels.threshold import scheffe_channel
from src.errors import AdmissibilityError, DimensionMismatchError
from src.log import get_logger
from src.models.distributions import Channel, Distribution, DistributionLike, apply, check_pair, compose
from src.models.divergences import hellinger_sq
from src.optimization.objectives import HELLINGER, Objective
from src.optimization.optimizer import maximize_comm, maximize_private
from src.settings import BISECTION_MAX_ITER, capped_exp

logger = get_logger("closed_forms")

_XTOL = 1e-16


def rr_binary_parameter(x: float, eps: float) -> float:
    """Parameter of RR(2, eps) applied to Ber(x): (x (e^eps - 1) + 1) / (1 + e^eps)."""
    weight = capped_exp(eps)
    return (x * (weight - 1.0) + 1.0) / (1.0 + weight)


def rr_tv_contraction(eps: float) -> float:
    """Factor (e^eps - 1) / (e^eps + 1) by which RR(2, eps) shrinks total variation."""
    return math.tanh(0.5 * min(eps, 700.0))


def sdpi_binary(p: DistributionLike, q: DistributionLike, eps: float) -> Tuple[Channel, float]:
    """
    Optimal eps-LDP channel for a binary pair.

    Binary randomized response maximizes the Hellinger divergence among all
    eps-LDP channels on binary inputs.

    Returns:
        (RR(2, eps), d_h^2(RR p, RR q))

    Raises:
        DimensionMismatchError: If the pair is not binary
    """
    a, b = check_pair(p, q)
    if a.size != 2:
        raise DimensionMismatchError(f"sdpi_binary needs a binary pair, got k = {a.size}")
    channel = randomized_response(2, eps)
    value = hellinger_sq(apply(channel, a), apply(channel, b))
    return channel, value


def _check_region(rho: float, nu: float) -> None:
    if not 0 < nu < 0.5:
        raise AdmissibilityError(f"nu must lie in (0, 0.5), got {nu}")
    if not 2 * nu * nu <= rho <= nu:
        raise AdmissibilityError(f"need 2 nu^2 <= rho <= nu, got rho = {rho}, nu = {nu}")


def _worst_case_arrays(y: float, nu: float) -> Tuple[np.ndarray, np.ndarray]:
    p = np.array([0.0, 0.5, 0.5])
    q = np.array([2.0 * y, 0.5 + nu - 2.0 * y, 0.5 - nu])
    return p, q


def worst_case_pair(rho: float, nu: float) -> Tuple[Distribution, Distribution]:
    """
    Ternary pair with d_h^2 = rho and d_TV = nu whose private sample complexity
    stagnates near 1/nu^2 over a wide range of eps.

    p = (0, 1/2, 1/2) and q = (2y, 1/2 + nu - 2y, 1/2 - nu), with y in
    [0, nu/2] found by bisection on the Hellinger divergence, which increases
    in y. At y = 0 it is at most 3 nu^2 / 2 < rho, at y = nu/2 it exceeds nu.

    Args:
        rho: Target Hellinger divergence
        nu: Target total variation distance

    Returns:
        (p, q)

    Raises:
        AdmissibilityError: Unless 0 < nu < 1/2 and 2 nu^2 <= rho <= nu
    """
    _check_region(rho, nu)

    def gap(y: float) -> float:
        return hellinger_sq(*_worst_case_arrays(y, nu)) - rho

    y = bisect(gap, 0.0, 0.5 * nu, xtol=_XTOL, maxiter=BISECTION_MAX_ITER)
    p, q = _worst_case_arrays(y, nu)
    logger.debug(f"worst-case pair for rho={rho:g}, nu={nu:g}: y={y:.6g}")
    return Distribution(p), Distribution(q)


def binary_pair(rho: float, nu: float) -> Tuple[Distribution, Distribution]:
    """
    Binary pair Ber(a), Ber(a + nu) with d_h^2 = rho.

    The divergence decreases in a on [0, (1 - nu)/2], so a is found by
    bisection on that interval.

    Raises:
        AdmissibilityError: If rho is not reachable for this nu
    """
    if not 0 < nu < 1:
        raise AdmissibilityError(f"nu must lie in (0, 1), got {nu}")

    def divergence(a: float) -> float:
        return hellinger_sq([1.0 - a, a], [1.0 - a - nu, a + nu])

    middle = 0.5 * (1.0 - nu)
    high, low = divergence(0.0), divergence(middle)
    if not low <= rho <= high:
        raise AdmissibilityError(f"rho = {rho} outside [{low:.6g}, {high:.6g}] for binary pairs with nu = {nu}")

    a = bisect(lambda x: divergence(x) - rho, 0.0, middle, xtol=_XTOL, maxiter=BISECTION_MAX_ITER)
    return Distribution.bernoulli(a), Distribution.bernoulli(a + nu)


def minimax_channel(p: DistributionLike, q: DistributionLike, eps: float) -> Channel:
    """
    Binary-output eps-LDP channel RR(2, eps) x T' with T' a binary threshold channel.

    Two choices of T' are compared after randomized response: the Scheffe
    channel, which keeps total variation, and the binary threshold channel
    with the largest Hellinger divergence. The better one is returned
    (Scheffe on ties).

    Raises:
        AdmissibilityError: If eps <= 0
    """
    if eps <= 0:
        raise AdmissibilityError(f"minimax channel needs eps > 0, got {eps}")
    a, b = check_pair(p, q)
    rr = randomized_response(2, eps)

    best_channel, best_value, best_name = None, -1.0, ""
    for name, inner in (("scheffe", scheffe_channel(a, b)), ("hellinger", maximize_comm(a, b, 2).channel)):
        channel = compose(rr, inner)
        value = hellinger_sq(apply(channel, a), apply(channel, b))
        if value > best_value:
            best_channel, best_value, best_name = channel, value, name
    logger.debug(f"minimax channel uses the {best_name} threshold: {best_value:.6g}")
    return best_channel


def approx_ldp_channel(
    p: DistributionLike,
    q: DistributionLike,
    eps: float,
    delta: float,
    objective: Objective = HELLINGER,
    base: Optional[Channel] = None
) -> Channel:
    """
    (eps, delta)-LDP channel from [k] to [max(2, k) + k].

    With probability 1 - delta the input goes through the best binary eps-LDP
    channel (padded with zero rows), otherwise it is released in a second
    block of k outputs. Hence
    d_h^2(T'p, T'q) = (1 - delta) d_h^2(Tp, Tq) + delta d_h^2(p, q).

    Args:
        p: First distribution
        q: Second distribution
        eps: Privacy parameter of the pure part
        delta: Leak probability in [0, 1]
        objective: Objective for the pure part
        base: Pure eps-LDP channel to use instead of searching for one

    Raises:
        AdmissibilityError: If delta is outside [0, 1]
    """
    if not 0.0 <= delta <= 1.0:
        raise AdmissibilityError(f"delta must lie in [0, 1], got {delta}")
    a, b = check_pair(p, q)
    k = a.size
    if base is None:
        base = maximize_private(a, b, LpFamily.pure(k, 2, eps), objective).channel

    rows = max(2, k)
    padded = np.zeros((rows, k))
    padded[:base.output_size, :] = base.matrix
    return Channel(np.vstack([(1.0 - delta) * padded, delta * np.eye(k)]))


def binary_sample_complexity_law(tv: float, h2: float, eps: float) -> float:
    """Piecewise sample complexity of binary pairs under eps-LDP, constants dropped."""
    if tv <= 0:
        return math.inf
    if eps <= 1:
        return 1.0 / (eps * eps * tv * tv) if eps > 0 else math.inf
    if capped_exp(eps) <= h2 / (tv * tv):
        return 1.0 / (capped_exp(eps) * tv * tv)
    return 1.0 / h2


def worst_case_sample_complexity_law(nu: float, rho: float, eps: float) -> float:
    """Piecewise sample complexity of the worst-case pair under eps-LDP, constants dropped."""
    if eps <= 0:
        return math.inf
    if eps <= 1:
        return 1.0 / (eps * eps * nu * nu)
    if capped_exp(eps) <= 1.0 / rho:
        return min(1.0 / (nu * nu), 1.0 / (capped_exp(eps) * rho * rho))
    return 1.0 / rho


def minimax_upper_bound_law(tv: float, h2: float, eps: float) -> float:
    """
    Sample complexity achieved by the minimax channel, constants dropped.

    Uses alpha = max(1, log(1/d_h^2)) for the logarithmic loss.
    """
    if eps <= 0 or tv <= 0:
        return math.inf
    if eps <= 1:
        return 1.0 / (eps * eps * tv * tv)
    alpha = max(1.0, math.log(1.0 / h2))
    if capped_exp(eps) <= alpha / h2:
        return min(1.0 / (tv * tv), alpha * alpha / (capped_exp(eps) * h2 * h2))
    return alpha / h2


def approx_ldp_sample_complexity_law(private: float, free: float, delta: float) -> float:
    """min(n*(eps) / (1 - delta), n* / delta): the approximate-LDP upper bound."""
    first = private / (1.0 - delta) if delta < 1 else math.inf
    second = free / delta if delta > 0 else math.inf
    return min(first, second)
