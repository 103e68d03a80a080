"""
Exact maximization of quasi-convex objectives over channel families.

Every optimizer searches a finite candidate set guaranteed to contain an
extreme point of the joint range {(Tp, Tq)}:

    maximize_comm         threshold channels into [l]
    maximize_private      T2 x T1 with T1 threshold into [min(k, 2 l^2)] and
                          T2 an extreme point of the family on that alphabet
    rdp_binary_optimize   RDP boundary channels after binary threshold channels

Candidates are scored in chunks on a thread pool. Each chunk is evaluated the
same way regardless of the worker count and the reduction keeps the first
maximum in candidate order, so results do not depend on --threads.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.channels.ldp import LpFamily
from src.channels.polytope import extreme_points
from src.channels.rdp import rdp_binary_family
from src.channels.threshold import ThresholdPartition, enumerate_partitions
from src.errors import DimensionMismatchError
from src.log import get_logger
from src.models.distributions import (
    Channel,
    DistributionLike,
    PairCanonicalization,
    apply,
    canonicalize,
    check_pair,
    compose,
)
from src.optimization.objectives import HELLINGER, Objective
from src.settings import RDP_GRID_STEP, SEARCH_CHUNK, resolve_threads

logger = get_logger("optimizer")


@dataclass(frozen=True)
class Certificate:
    """
    How an optimal channel was assembled.

    Attributes:
        kind: "threshold", "decomposition" or "rdp-decomposition"
        partition: Threshold partition of the canonical alphabet behind T1
        inner: T1 on the original alphabet (merge map folded in)
        outer: T2, or None for a bare threshold channel
        pattern_index: Position of T2 in the extreme-point list searched
    """

    kind: str
    partition: ThresholdPartition
    inner: Channel
    outer: Optional[Channel] = None
    pattern_index: Optional[int] = None

    def recompose(self) -> Channel:
        if self.outer is None:
            return self.inner
        return compose(self.outer, self.inner)

    def __str__(self) -> str:
        if self.outer is None:
            return f"{self.kind}({self.partition})"
        return f"{self.kind}({self.partition};pattern={self.pattern_index})"


@dataclass(frozen=True)
class OptResult:
    """Best channel found, its objective value, and the certificate that rebuilds it."""

    channel: Channel
    value: float
    certificate: Certificate
    objective: Objective = HELLINGER

    def __str__(self) -> str:
        return f"OptResult({self.objective}={self.value:.6g}, {self.certificate})"


def _inner_outputs(
    partitions: Sequence[ThresholdPartition],
    sorted_probs: np.ndarray,
    outputs: int
) -> np.ndarray:
    """(N, outputs) array of T1 p for every partition, p given in sorted order."""
    labels = np.array([partition.position_labels() for partition in partitions], dtype=int)
    result = np.zeros((len(partitions), outputs))
    rows = np.repeat(np.arange(len(partitions)), sorted_probs.size)
    np.add.at(result, (rows, labels.ravel()), np.tile(sorted_probs, len(partitions)))
    return result


def _first_max(values: np.ndarray) -> Tuple[int, float]:
    values = np.where(np.isnan(values), -np.inf, values)
    best = int(np.argmax(values))
    return best, float(values[best])


def _parallel_argmax(
    total: int,
    evaluate: Callable[[int, int], np.ndarray],
    threads: Optional[int]
) -> Tuple[int, float, int]:
    """
    First maximum of a chunked candidate stream.

    Args:
        total: Number of chunk units (inner candidates)
        evaluate: (start, stop) -> flat values for units start..stop-1, in order
        threads: Worker cap (None uses LDPOPT_THREADS)

    Returns:
        (chunk start, best value, offset of the best value inside the chunk)
    """
    starts = list(range(0, total, SEARCH_CHUNK))

    def task(start: int) -> Tuple[int, float, int]:
        values = evaluate(start, min(start + SEARCH_CHUNK, total))
        offset, value = _first_max(values)
        return start, value, offset

    workers = min(resolve_threads(threads), len(starts))
    if workers <= 1:
        results = [task(start) for start in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, starts))

    best = results[0]
    for result in results[1:]:
        if result[1] > best[1]:
            best = result
    return best[0], best[1], best[2]


def _decomposition_search(
    canon: PairCanonicalization,
    partitions: List[ThresholdPartition],
    inner_outputs: int,
    outer: np.ndarray,
    objective: Objective,
    threads: Optional[int]
) -> Tuple[int, int, float]:
    """
    Best (partition, outer) pair under the objective.

    Candidate order is partition-major, so ties go to the smallest cut
    vector and then the smallest outer index.

    Returns:
        (partition index, outer index, value on the canonical pair)
    """
    order = canon.order
    sorted_p = canon.p.probs[list(order.permutation)]
    sorted_q = canon.q.probs[list(order.permutation)]
    inner_p = _inner_outputs(partitions, sorted_p, inner_outputs)
    inner_q = _inner_outputs(partitions, sorted_q, inner_outputs)
    count = outer.shape[0]

    def evaluate(start: int, stop: int) -> np.ndarray:
        tp = np.einsum("mij,nj->nmi", outer, inner_p[start:stop])
        tq = np.einsum("mij,nj->nmi", outer, inner_q[start:stop])
        return objective.evaluate_batch(tp, tq).ravel()

    start, value, offset = _parallel_argmax(len(partitions), evaluate, threads)
    flat = start * count + offset
    return flat // count, flat % count, value


def _relabelings(partitions: List[ThresholdPartition]) -> List[ThresholdPartition]:
    expanded = []
    for partition in partitions:
        for labeling in permutations(range(partition.l)):
            expanded.append(partition.relabeled(labeling))
    return expanded


def maximize_comm(
    p: DistributionLike,
    q: DistributionLike,
    l: int,
    objective: Objective = HELLINGER,
    threads: Optional[int] = None
) -> OptResult:
    """
    Maximize an objective over all channels from [k] to [l].

    Threshold channels on the canonicalized pair contain a maximizer of any
    quasi-convex objective, so the search is exhaustive over them.

    Args:
        p: First distribution
        q: Second distribution
        l: Number of outputs (>= 1)
        objective: Objective to maximize
        threads: Worker cap

    Returns:
        OptResult with a "threshold" certificate
    """
    if l < 1:
        raise ValueError(f"need at least one output, got l = {l}")
    a, b = check_pair(p, q)
    canon = canonicalize(a, b)

    partitions = list(enumerate_partitions(canon.k, l))
    if not objective.permutation_invariant:
        partitions = _relabelings(partitions)
    logger.info(f"comm search: k={a.size} (canonical {canon.k}), l={l}, {len(partitions)} threshold channels")

    index, _, _ = _decomposition_search(canon, partitions, l, np.eye(l)[None, :, :], objective, threads)
    partition = partitions[index]
    inner = canon.lift(partition.to_channel(canon.order))
    value = objective(apply(inner, a).probs, apply(inner, b).probs)
    logger.debug(f"comm optimum {partition}: {value:.6g}")
    return OptResult(inner, value, Certificate("threshold", partition, inner), objective)


def decomposition_size(k: int, l: int) -> int:
    """Output size of the threshold stage T1: min(k, 2 l^2)."""
    return min(k, 2 * l * l)


def maximize_private(
    p: DistributionLike,
    q: DistributionLike,
    family: LpFamily,
    objective: Objective = HELLINGER,
    threads: Optional[int] = None
) -> OptResult:
    """
    Maximize an objective over an LP channel family F(l, k).

    Every extreme point of the joint range is reached by T2 x T1 with T1 a
    threshold channel into [2 l^2] and T2 an extreme point of F(l, 2 l^2).
    The threshold stage uses min(k, 2 l^2) outputs with trailing empty blocks
    only; both reductions are lossless because the family is closed under
    pre-processing and its extreme-point sets are closed under column
    permutations.

    Args:
        p: First distribution
        q: Second distribution
        family: LP family whose k matches the pair
        objective: Objective to maximize
        threads: Worker cap

    Returns:
        OptResult with a "decomposition" certificate

    Raises:
        VertexCapExceededError: If T2 needs vertex enumeration above the cap
    """
    a, b = check_pair(p, q)
    if family.k != a.size:
        raise DimensionMismatchError(f"family expects k = {family.k}, pair has {a.size} elements")
    canon = canonicalize(a, b)
    width = decomposition_size(canon.k, family.l)

    partitions = list(enumerate_partitions(canon.k, width, canonical_only=True))
    outers = extreme_points(family.resized(width))
    stack = np.stack([channel.matrix for channel in outers])
    logger.info(
        f"private search over {family}: {len(partitions)} threshold channels into [{width}] "
        f"x {len(outers)} extreme points"
    )

    index, pattern, _ = _decomposition_search(canon, partitions, width, stack, objective, threads)
    partition = partitions[index]
    inner = canon.lift(partition.to_channel(canon.order))
    outer = outers[pattern]
    channel = compose(outer, inner)
    value = objective(apply(channel, a).probs, apply(channel, b).probs)
    certificate = Certificate("decomposition", partition, inner, outer, pattern)
    logger.debug(f"private optimum {certificate}: {value:.6g}")
    return OptResult(channel, value, certificate, objective)


def rdp_binary_optimize(
    p: DistributionLike,
    q: DistributionLike,
    eps: float,
    alpha: float,
    objective: Objective = HELLINGER,
    threads: Optional[int] = None,
    step: float = RDP_GRID_STEP
) -> OptResult:
    """
    Maximize an objective over binary (eps, alpha)-RDP protocols.

    Optimal channels factor as an RDP extreme point after a binary threshold
    channel. The RDP extreme points are approximated by the traced boundary
    of the feasible 2x2 region, and both labelings of every binary threshold
    channel are tried because the traced set is not symmetric under swapping
    inputs.

    Returns:
        OptResult with an "rdp-decomposition" certificate
    """
    a, b = check_pair(p, q)
    family = rdp_binary_family(eps, alpha)
    canon = canonicalize(a, b)

    partitions = _relabelings(list(enumerate_partitions(canon.k, 2)))
    outers = [Channel.constant(2, 2, 0)] + family.candidates(step)
    stack = np.stack([channel.matrix for channel in outers])
    logger.info(f"rdp search over {family}: {len(partitions)} binary threshold channels x {len(outers)} boundary channels")

    index, pattern, _ = _decomposition_search(canon, partitions, 2, stack, objective, threads)
    partition = partitions[index]
    inner = canon.lift(partition.to_channel(canon.order))
    outer = outers[pattern]
    channel = compose(outer, inner)
    value = objective(apply(channel, a).probs, apply(channel, b).probs)
    return OptResult(channel, value, Certificate("rdp-decomposition", partition, inner, outer, pattern), objective)
