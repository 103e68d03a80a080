"""
Threshold channels over the likelihood-ratio ordering.

A threshold channel is deterministic and sends contiguous runs of the
likelihood-sorted alphabet to the same output. This module enumerates them,
recognizes them, and, for a deterministic channel that is not threshold,
builds two channels whose half-half mixture reproduces (Tp, Tq), showing that
(Tp, Tq) is not an extreme point of the joint range.
"""

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb

from src.errors import DimensionMismatchError, InvalidDistributionError, IsThresholdError
from src.models.distributions import (
    Channel,
    DistributionLike,
    LikelihoodOrder,
    as_array,
    check_pair,
)
from src.settings import WITNESS_TOLERANCE


@dataclass(frozen=True)
class ThresholdPartition:
    """
    Split of the likelihood-sorted alphabet [k] into l contiguous blocks.

    Attributes:
        k: Input alphabet size
        l: Number of blocks / outputs
        cuts: l - 1 non-decreasing cut positions in [0..k]
        labeling: Output assigned to each block (identity when omitted)
    """

    k: int
    l: int
    cuts: Tuple[int, ...]
    labeling: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        cuts = tuple(int(c) for c in self.cuts)
        if len(cuts) != self.l - 1:
            raise ValueError(f"{self.l} blocks need {self.l - 1} cuts, got {len(cuts)}")
        if any(c < 0 or c > self.k for c in cuts) or list(cuts) != sorted(cuts):
            raise ValueError(f"cuts {cuts} must be non-decreasing within [0, {self.k}]")
        labeling = tuple(range(self.l)) if self.labeling is None else tuple(self.labeling)
        if sorted(labeling) != list(range(self.l)):
            raise ValueError(f"labeling {labeling} is not a permutation of [{self.l}]")
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "labeling", labeling)

    def boundaries(self) -> Tuple[int, ...]:
        return (0,) + self.cuts + (self.k,)

    def blocks(self) -> List[range]:
        """Sorted positions covered by each block (possibly empty)."""
        edges = self.boundaries()
        return [range(edges[i], edges[i + 1]) for i in range(self.l)]

    def sizes(self) -> List[int]:
        return [len(block) for block in self.blocks()]

    def empties_trailing(self) -> bool:
        """True when every empty block comes after all non-empty ones."""
        sizes = self.sizes()
        seen_empty = False
        for size in sizes:
            if size == 0:
                seen_empty = True
            elif seen_empty:
                return False
        return True

    def position_labels(self) -> np.ndarray:
        """Output label of each sorted position."""
        labels = np.empty(self.k, dtype=int)
        for block, positions in enumerate(self.blocks()):
            labels[list(positions)] = self.labeling[block]
        return labels

    def to_channel(self, order: LikelihoodOrder) -> Channel:
        """Deterministic channel on the original alphabet induced by this partition."""
        if order.k != self.k:
            raise DimensionMismatchError(f"order has {order.k} elements, partition has {self.k}")
        labels = np.empty(self.k, dtype=int)
        labels[list(order.permutation)] = self.position_labels()
        return Channel.deterministic(labels, self.l)

    def relabeled(self, labeling: Sequence[int]) -> "ThresholdPartition":
        return ThresholdPartition(self.k, self.l, self.cuts, tuple(labeling))

    def __str__(self) -> str:
        cuts = ",".join(str(c) for c in self.cuts)
        if self.labeling == tuple(range(self.l)):
            return f"cuts=({cuts})"
        labels = ",".join(str(x) for x in self.labeling)
        return f"cuts=({cuts});labels=({labels})"


def count_threshold(k: int, l: int) -> int:
    """Number of compositions of k sorted elements into l ordered blocks: C(k+l-1, l-1)."""
    return int(comb(k + l - 1, l - 1, exact=True))


def enumerate_partitions(k: int, l: int, canonical_only: bool = False) -> Iterator[ThresholdPartition]:
    """
    Yield every threshold partition in lexicographic cut order.

    Args:
        k: Input alphabet size (>= 1)
        l: Number of outputs (>= 1)
        canonical_only: Keep one partition per channel up to output relabeling
            (the one whose empty blocks are all trailing)

    Yields:
        ThresholdPartition with the canonical labeling
    """
    for cuts in combinations_with_replacement(range(k + 1), l - 1):
        partition = ThresholdPartition(k, l, cuts)
        if canonical_only and not partition.empties_trailing():
            continue
        yield partition


def enumerate_threshold(
    k: int,
    l: int,
    order: LikelihoodOrder,
    canonical_only: bool = False
) -> Iterator[Channel]:
    """Yield the channel of every partition from enumerate_partitions."""
    for partition in enumerate_partitions(k, l, canonical_only):
        yield partition.to_channel(order)


def is_threshold(channel: Channel, order: LikelihoodOrder) -> bool:
    """
    Check whether a deterministic channel has contiguous preimages in sorted order.

    Raises:
        NotDeterministicError: If some column is not a point mass
        DimensionMismatchError: If the channel and order sizes differ
    """
    if channel.input_size != order.k:
        raise DimensionMismatchError(f"channel has {channel.input_size} inputs, order has {order.k}")
    sequence = channel.labels()[list(order.permutation)]
    return _betweenness_violation(sequence) is None


def _betweenness_violation(sequence: Sequence[int]) -> Optional[Tuple[int, int, int]]:
    """First positions a < b < c with sequence[a] == sequence[c] != sequence[b]."""
    size = len(sequence)
    for c in range(size):
        for a in range(c):
            if sequence[a] != sequence[c]:
                continue
            for b in range(a + 1, c):
                if sequence[b] != sequence[a]:
                    return a, b, c
    return None


def scheffe_channel(p: DistributionLike, q: DistributionLike) -> Channel:
    """Binary threshold channel at likelihood ratio 1: output 1 where p_i >= q_i (and p_i > 0)."""
    a, b = check_pair(p, q)
    labels = [1 if a_i >= b_i and a_i > 0 else 0 for a_i, b_i in zip(a, b)]
    return Channel.deterministic(labels, 2)


@dataclass(frozen=True)
class ExtremalityWitness:
    """
    Two channels whose mixture reproduces (Tp, Tq) while moving Tp.

    Attributes:
        first: T1
        second: T2
        weight: Mixing weight on T1 (T2 gets 1 - weight)
        columns: Input elements whose columns were perturbed
    """

    first: Channel
    second: Channel
    weight: float = 0.5
    columns: Tuple[int, ...] = ()

    def residual(self, channel: Channel, p: DistributionLike, q: DistributionLike) -> float:
        """Largest deviation of the mixture from (Tp, Tq)."""
        a, b = check_pair(p, q)
        worst = 0.0
        for probs in (a, b):
            target = channel.matrix @ probs
            mixture = self.weight * (self.first.matrix @ probs) + (1 - self.weight) * (self.second.matrix @ probs)
            worst = max(worst, float(np.max(np.abs(mixture - target))))
        return worst

    def movement(self, channel: Channel, p: DistributionLike) -> float:
        """Distance between T1 p and T p (positive for a genuine witness)."""
        probs = as_array(p)
        return float(np.max(np.abs(self.first.matrix @ probs - channel.matrix @ probs)))

    def verify(
        self,
        channel: Channel,
        p: DistributionLike,
        q: DistributionLike,
        tolerance: float = WITNESS_TOLERANCE
    ) -> bool:
        return self.residual(channel, p, q) <= tolerance and self.movement(channel, p) > tolerance


def non_extremality_witness(channel: Channel, p: DistributionLike, q: DistributionLike) -> ExtremalityWitness:
    """
    Build T1, T2 with (T1 + T2)/2 acting like T on the pair.

    Takes sorted elements a < b < c with a, c sent to output m and b to output
    n != m. T1 trades mass of columns a and b between m and n; T2 does the same
    for c and b. The trade sizes keep T1 q = T2 q = T q and cancel the movement
    of T p. When q_c = 0 the b-column trade of T2 vanishes.

    Args:
        channel: Deterministic channel that is not threshold
        p: First distribution (canonicalized pair)
        q: Second distribution

    Returns:
        ExtremalityWitness

    Raises:
        IsThresholdError: If the channel is threshold for (p, q)
        InvalidDistributionError: If the chosen elements share a likelihood ratio
    """
    a_arr, b_arr = check_pair(p, q)
    order = LikelihoodOrder.from_pair(a_arr, b_arr)
    if channel.input_size != order.k:
        raise DimensionMismatchError(f"channel has {channel.input_size} inputs, pair has {order.k}")

    labels = channel.labels()
    sequence = labels[list(order.permutation)]
    violation = _betweenness_violation(sequence)
    if violation is None:
        raise IsThresholdError()

    ia, ib, ic = (order.permutation[pos] for pos in violation)
    if not order.ratios[ia] < order.ratios[ib] < order.ratios[ic]:
        raise InvalidDistributionError("elements share a likelihood ratio; canonicalize the pair first")

    pa, pb, pc = a_arr[ia], a_arr[ib], a_arr[ic]
    qa, qb, qc = b_arr[ia], b_arr[ib], b_arr[ic]
    # q_a(theta_b - theta_a) and q_c(theta_c - theta_b), both positive
    gap_low = qa * pb / qb - pa
    gap_high = pc - qc * pb / qb

    limits = [1.0 / gap_high, qb / (qa * gap_high), 1.0 / gap_low]
    if qc > 0:
        limits.append(qb / (qc * gap_low))
    scale = 0.5 * min(limits)

    eps1 = scale * gap_high
    eps2 = eps1 * qa / qb
    eps3 = scale * gap_low
    eps4 = eps3 * qc / qb

    m, n = labels[ia], labels[ib]
    first = np.array(channel.matrix)
    first[m, ia] -= eps1
    first[n, ia] += eps1
    first[n, ib] -= eps2
    first[m, ib] += eps2

    second = np.array(channel.matrix)
    second[m, ic] -= eps3
    second[n, ic] += eps3
    second[n, ib] -= eps4
    second[m, ib] += eps4

    return ExtremalityWitness(Channel(first), Channel(second), 0.5, (int(ia), int(ib), int(ic)))
