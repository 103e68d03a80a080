"""
Reduction to a small alphabet and the free-privacy channel.

When eps is large, an l-ary randomized response keeps the Hellinger
contribution of "comparable" elements (likelihood ratio in [1/2, 2]). The
reduction either keeps enough of that contribution in l - 1 buckets, or
falls back to the best binary threshold channel.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from src.channels.ldp import randomized_response
from src.errors import AdmissibilityError
from src.log import get_logger
from src.models.distributions import Channel, DistributionLike, check_pair, compose
from src.models.divergences import hellinger_sq
from src.optimization.optimizer import maximize_comm
from src.settings import capped_exp

logger = get_logger("reduction")


@dataclass(frozen=True)
class ComparableSplit:
    """
    Elements whose likelihood ratio p_i / q_i lies in [1/2, 1) (lower) or [1, 2] (upper).

    Attributes:
        lower: Indices with ratio in [1/2, 1)
        upper: Indices with ratio in [1, 2]
        tau: Hellinger contribution of lower and upper together
    """

    lower: Tuple[int, ...]
    upper: Tuple[int, ...]
    tau: float

    @property
    def members(self) -> Tuple[int, ...]:
        return tuple(sorted(self.lower + self.upper))


def comparable_split(p: DistributionLike, q: DistributionLike) -> ComparableSplit:
    a, b = check_pair(p, q)
    lower, upper = [], []
    for index, (p_i, q_i) in enumerate(zip(a, b)):
        if q_i <= 0:
            continue
        ratio = p_i / q_i
        if 0.5 <= ratio < 1.0:
            lower.append(index)
        elif 1.0 <= ratio <= 2.0:
            upper.append(index)
    members = lower + upper
    tau = float(np.sum((np.sqrt(a[members]) - np.sqrt(b[members])) ** 2)) if members else 0.0
    return ComparableSplit(tuple(lower), tuple(upper), tau)


@dataclass(frozen=True)
class Reduction:
    """
    Output of reduce_channel.

    Attributes:
        channel: Channel from [k] to [l] (or [2] on the binary branch)
        branch: "identity", "binary" or "buckets"
        tau: Comparable contribution of the input pair
    """

    channel: Channel
    branch: str
    tau: float


def _padded_identity(k: int, l: int) -> Channel:
    matrix = np.zeros((l, k))
    matrix[:k, :] = np.eye(k)
    return Channel(matrix)


def reduce_channel(p: DistributionLike, q: DistributionLike, l: int) -> Reduction:
    """
    Map [k] to [l] keeping either the comparable contribution or the Hellinger divergence.

    If comparable elements carry less than half of d_h^2, the best binary
    threshold channel is returned. Otherwise comparable elements are grouped
    by dyadic range of |delta_i| = |p_i - q_i| / q_i, separately for ratios
    below and above 1; the l - 1 groups with the largest sum of
    q_i delta_i^2 get their own outputs and everything else shares the last
    output.

    Args:
        p: First distribution
        q: Second distribution
        l: Output size (>= 2)

    Returns:
        Reduction with the branch that fired
    """
    if l < 2:
        raise AdmissibilityError(f"reduction needs l >= 2, got {l}")
    a, b = check_pair(p, q)
    k = a.size
    split = comparable_split(a, b)
    if k <= l:
        return Reduction(_padded_identity(k, l), "identity", split.tau)

    total = hellinger_sq(a, b)
    if split.tau < 0.5 * total:
        channel = maximize_comm(a, b, 2).channel
        logger.debug(f"binary branch: tau={split.tau:.3g} < d_h^2/2 = {0.5 * total:.3g}")
        return Reduction(channel, "binary", split.tau)

    buckets: Dict[Tuple[int, int], List[int]] = {}
    for side, indices in ((0, split.lower), (1, split.upper)):
        for index in indices:
            delta = (a[index] - b[index]) / b[index]
            if delta == 0:
                continue
            level = max(0, int(math.floor(-math.log2(abs(delta)))))
            buckets.setdefault((side, level), []).append(index)

    def weight(key: Tuple[int, int]) -> float:
        members = buckets[key]
        return float(np.sum((a[members] - b[members]) ** 2 / b[members]))

    ranked = sorted(buckets, key=lambda key: (-weight(key), key))
    labels = np.full(k, l - 1, dtype=int)
    for output, key in enumerate(ranked[:l - 1]):
        labels[buckets[key]] = output
    logger.debug(f"bucket branch: {len(buckets)} dyadic groups, {min(len(ranked), l - 1)} kept")
    return Reduction(Channel.deterministic(labels, l), "buckets", split.tau)


def free_privacy_size(h2: float, k: int, eps: float) -> int:
    """l = min(max(2, ceil(log2(1/d_h^2))), k, floor(e^eps))."""
    wanted = k if h2 <= 0 else max(2, math.ceil(math.log2(1.0 / h2)))
    return max(2, min(wanted, k, int(math.floor(capped_exp(eps)))))


def free_privacy_channel(p: DistributionLike, q: DistributionLike, eps: float) -> Channel:
    """
    eps-LDP channel RR(l, eps) x T1 that keeps a constant fraction of d_h^2
    once e^eps is of order (1/d_h^2) log(1/d_h^2).

    T1 comes from reduce_channel; on its binary branch RR(2, eps) is used.

    Raises:
        AdmissibilityError: If eps <= 1 or the alphabet has a single element
    """
    if eps <= 1:
        raise AdmissibilityError(f"free-privacy construction needs eps > 1, got {eps}")
    a, b = check_pair(p, q)
    if a.size < 2:
        raise AdmissibilityError("free-privacy construction needs at least two elements")

    l = free_privacy_size(hellinger_sq(a, b), a.size, eps)
    reduction = reduce_channel(a, b, l)
    outputs = reduction.channel.output_size
    logger.info(f"free-privacy channel: l={l}, branch={reduction.branch}")
    return compose(randomized_response(outputs, eps), reduction.channel)
