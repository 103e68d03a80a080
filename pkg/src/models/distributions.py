"""
Distribution and channel models for private hypothesis testing.

This module defines the numeric substrate used everywhere else: probability
vectors, column-stochastic channels, likelihood-ratio orderings on the
extended real line, and the canonicalization that merges equal-ratio elements.
All values are immutable after construction and safe to share across threads.
"""

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import (
    DimensionMismatchError,
    InvalidDistributionError,
    NotDeterministicError,
)
from src.log import get_logger
from src.settings import DETERMINISTIC_TOLERANCE, RATIO_TOLERANCE, SUM_TOLERANCE

logger = get_logger("core")


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Distribution:
    """
    Probability vector over a finite alphabet [k].

    Entries are non-negative 64-bit floats summing to 1 within SUM_TOLERANCE.
    Renormalization only happens through Distribution.normalized().

    Attributes:
        probs: Read-only array of k probabilities
    """

    probs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.probs, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise InvalidDistributionError("a distribution needs a non-empty 1-D probability vector")
        if not np.all(np.isfinite(arr)):
            raise InvalidDistributionError("probabilities must be finite")
        if np.any(arr < 0):
            raise InvalidDistributionError(f"negative probability in {arr.tolist()}")
        total = float(arr.sum())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", _readonly(arr))

    @classmethod
    def normalized(cls, values: Sequence[float]) -> "Distribution":
        """Build a distribution from non-negative weights, rescaling them to sum to 1."""
        arr = np.asarray(values, dtype=np.float64)
        if np.any(arr < 0) or arr.sum() <= 0:
            raise InvalidDistributionError("weights must be non-negative with a positive sum")
        return cls(arr / arr.sum())

    @classmethod
    def bernoulli(cls, x: float) -> "Distribution":
        """Ber(x) as the vector (1 - x, x): x is the probability of observing 1."""
        if not 0.0 <= x <= 1.0:
            raise InvalidDistributionError(f"Bernoulli parameter {x} outside [0, 1]")
        return cls([1.0 - x, x])

    @classmethod
    def uniform(cls, k: int) -> "Distribution":
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def point_mass(cls, k: int, index: int) -> "Distribution":
        arr = np.zeros(k)
        arr[index] = 1.0
        return cls(arr)

    @property
    def k(self) -> int:
        return int(self.probs.size)

    def to_list(self) -> List[float]:
        return [float(x) for x in self.probs]

    def __len__(self) -> int:
        return self.k

    def __getitem__(self, index: int) -> float:
        return float(self.probs[index])

    def __iter__(self) -> Iterator[float]:
        return iter(self.to_list())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return bool(np.array_equal(self.probs, other.probs))

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())

    def __str__(self) -> str:
        values = ", ".join(f"{x:.6g}" for x in self.probs)
        return f"Distribution(k={self.k}, [{values}])"


DistributionLike = Union[Distribution, Sequence[float], np.ndarray]


def as_array(values: DistributionLike) -> np.ndarray:
    """Return the probability array behind a Distribution or array-like."""
    if isinstance(values, Distribution):
        return values.probs
    return np.asarray(values, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class Channel:
    """
    Column-stochastic matrix T from [k] to [l].

    Column i is the output distribution T(. | i). Entries lie in [0, 1] and
    columns sum to 1 within SUM_TOLERANCE; values within tolerance of the
    boundary are clipped onto it.

    Attributes:
        matrix: Read-only l x k array
    """

    matrix: np.ndarray

    def __post_init__(self):
        arr = np.array(self.matrix, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidDistributionError("a channel needs a non-empty 2-D matrix")
        if not np.all(np.isfinite(arr)):
            raise InvalidDistributionError("channel entries must be finite")
        if np.any(arr < -SUM_TOLERANCE) or np.any(arr > 1.0 + SUM_TOLERANCE):
            raise InvalidDistributionError("channel entries must lie in [0, 1]")
        arr = np.clip(arr, 0.0, 1.0)
        sums = arr.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > SUM_TOLERANCE):
            worst = int(np.argmax(np.abs(sums - 1.0)))
            raise InvalidDistributionError(f"column {worst} sums to {sums[worst]!r}, not 1")
        object.__setattr__(self, "matrix", _readonly(arr))

    @classmethod
    def identity(cls, k: int) -> "Channel":
        return cls(np.eye(k))

    @classmethod
    def constant(cls, k: int, l: int, row: int = 0) -> "Channel":
        """Channel sending every input to output `row` (a trivial extreme point)."""
        arr = np.zeros((l, k))
        arr[row, :] = 1.0
        return cls(arr)

    @classmethod
    def deterministic(cls, labels: Sequence[int], l: int) -> "Channel":
        """Channel sending input i to output labels[i]."""
        labels = list(labels)
        arr = np.zeros((l, len(labels)))
        for column, label in enumerate(labels):
            if not 0 <= label < l:
                raise InvalidDistributionError(f"label {label} outside [0, {l})")
            arr[label, column] = 1.0
        return cls(arr)

    @property
    def input_size(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def output_size(self) -> int:
        return int(self.matrix.shape[0])

    def is_deterministic(self, tolerance: float = DETERMINISTIC_TOLERANCE) -> bool:
        """True when every column is a point mass."""
        return bool(np.all(np.abs(self.matrix.max(axis=0) - 1.0) <= tolerance))

    def labels(self) -> np.ndarray:
        """Output label of each input for a deterministic channel."""
        if not self.is_deterministic():
            raise NotDeterministicError("channel is not deterministic")
        return np.argmax(self.matrix, axis=0)

    def relabeled(self, permutation: Sequence[int]) -> "Channel":
        """Move output j to position permutation[j]."""
        arr = np.zeros_like(self.matrix)
        arr[list(permutation), :] = self.matrix
        return Channel(arr)

    def unique_columns(self, tolerance: float) -> List[int]:
        """Indices of the first occurrence of each distinct column (max-abs tolerance)."""
        kept: List[int] = []
        for column in range(self.input_size):
            vector = self.matrix[:, column]
            if all(np.max(np.abs(vector - self.matrix[:, other])) > tolerance for other in kept):
                kept.append(column)
        return kept

    def to_rows(self) -> List[List[float]]:
        return [[float(x) for x in row] for row in self.matrix]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Channel):
            return NotImplemented
        return bool(np.array_equal(self.matrix, other.matrix))

    def __hash__(self) -> int:
        return hash((self.matrix.shape, self.matrix.tobytes()))

    def __str__(self) -> str:
        rows = "; ".join(" ".join(f"{x:.4g}" for x in row) for row in self.matrix)
        return f"Channel({self.input_size}->{self.output_size}, [{rows}])"


def apply(channel: Channel, p: DistributionLike) -> Distribution:
    """
    Push a distribution through a channel (matrix-vector product).

    Args:
        channel: Channel from [k] to [l]
        p: Distribution on [k]

    Returns:
        Output distribution T p on [l]

    Raises:
        DimensionMismatchError: If channel.input_size != |p|
    """
    probs = as_array(p)
    if probs.shape != (channel.input_size,):
        raise DimensionMismatchError(
            f"channel expects {channel.input_size} inputs, distribution has {probs.size}"
        )
    return Distribution(channel.matrix @ probs)


def compose(outer: Channel, inner: Channel) -> Channel:
    """
    Sequential composition outer x inner (apply inner first).

    Raises:
        DimensionMismatchError: If inner.output_size != outer.input_size
    """
    if inner.output_size != outer.input_size:
        raise DimensionMismatchError(
            f"cannot compose {outer.input_size}-input channel after {inner.output_size}-output channel"
        )
    return Channel(outer.matrix @ inner.matrix)


def check_pair(p: DistributionLike, q: DistributionLike) -> Tuple[np.ndarray, np.ndarray]:
    """Return the arrays of a pair after checking that their shapes agree."""
    a, b = as_array(p), as_array(q)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"alphabet sizes differ: {a.shape[-1]} vs {b.shape[-1]}")
    return a, b


@dataclass(frozen=True, order=True)
class LikelihoodRatio:
    """
    Likelihood ratio p_i / q_i on the extended real line.

    +inf is carried by the `infinite` tag rather than a float infinity, so the
    dataclass ordering (infinite, value) places it after every finite ratio.
    """

    infinite: bool
    value: float

    @classmethod
    def of(cls, p_i: float, q_i: float) -> Optional["LikelihoodRatio"]:
        """Ratio of one element, or None when p_i = q_i = 0 (undefined)."""
        if q_i > 0:
            return cls(False, p_i / q_i)
        if p_i > 0:
            return cls(True, 0.0)
        return None

    def as_float(self) -> float:
        return float("inf") if self.infinite else self.value

    def __str__(self) -> str:
        return "inf" if self.infinite else f"{self.value:.6g}"


@dataclass(frozen=True)
class LikelihoodOrder:
    """
    Permutation of [k] sorting likelihood ratios ascending.

    Ties are broken by original index. `ratios` is indexed by the original
    element, `permutation[r]` is the element at sorted position r.
    """

    permutation: Tuple[int, ...]
    ratios: Tuple[LikelihoodRatio, ...]

    @classmethod
    def from_pair(cls, p: DistributionLike, q: DistributionLike) -> "LikelihoodOrder":
        a, b = check_pair(p, q)
        ratios: List[LikelihoodRatio] = []
        for index, (p_i, q_i) in enumerate(zip(a, b)):
            ratio = LikelihoodRatio.of(float(p_i), float(q_i))
            if ratio is None:
                raise InvalidDistributionError(
                    f"element {index} has p = q = 0; canonicalize the pair first"
                )
            ratios.append(ratio)
        permutation = sorted(range(len(ratios)), key=lambda i: (ratios[i], i))
        return cls(tuple(permutation), tuple(ratios))

    @classmethod
    def identity(cls, k: int) -> "LikelihoodOrder":
        """Order for an alphabet that is already sorted (all ratios reported as 1)."""
        return cls(tuple(range(k)), tuple(LikelihoodRatio(False, 1.0) for _ in range(k)))

    @property
    def k(self) -> int:
        return len(self.permutation)

    def positions(self) -> np.ndarray:
        """positions()[i] is the sorted rank of element i."""
        ranks = np.empty(self.k, dtype=int)
        ranks[list(self.permutation)] = np.arange(self.k)
        return ranks

    def sorted_ratios(self) -> List[LikelihoodRatio]:
        return [self.ratios[i] for i in self.permutation]

    def is_strict(self) -> bool:
        ordered = self.sorted_ratios()
        return all(a < b for a, b in zip(ordered, ordered[1:]))


def likelihood_order(p: DistributionLike, q: DistributionLike) -> LikelihoodOrder:
    return LikelihoodOrder.from_pair(p, q)


@dataclass(frozen=True)
class PairCanonicalization:
    """
    A pair with equal-ratio elements merged and both-zero elements dropped.

    Attributes:
        p: Merged p' on [k']
        q: Merged q' on [k']
        merge: Deterministic channel T* from [k] to [k'] with T* p = p', T* q = q'
        groups: Original indices merged into each element of [k']
        dropped: Original indices where p_i = q_i = 0 (routed to block 0)
        source_p: The original p
        source_q: The original q
    """

    p: Distribution
    q: Distribution
    merge: Channel
    groups: Tuple[Tuple[int, ...], ...]
    dropped: Tuple[int, ...]
    source_p: Distribution
    source_q: Distribution

    @property
    def k(self) -> int:
        return self.p.k

    @property
    def order(self) -> LikelihoodOrder:
        return LikelihoodOrder.from_pair(self.p, self.q)

    def lift(self, channel: Channel) -> Channel:
        """Channel on the original alphabet: channel x T*."""
        return compose(channel, self.merge)

    def reduce_channel(self, channel: Channel) -> Channel:
        """
        Equivalent channel on [k'] for a channel on [k].

        Each merged column is the p-weighted average of its group's columns
        (q-weighted when the group has no p-mass), which reproduces
        (T p, T q) exactly because a group shares one likelihood ratio.
        """
        if channel.input_size != self.source_p.k:
            raise DimensionMismatchError(
                f"channel expects {channel.input_size} inputs, pair has {self.source_p.k}"
            )
        columns = np.zeros((channel.output_size, self.k))
        source_p, source_q = self.source_p.probs, self.source_q.probs
        for block, members in enumerate(self.groups):
            members = list(members)
            weights = source_p[members] if self.p.probs[block] > 0 else source_q[members]
            columns[:, block] = channel.matrix[:, members] @ weights / weights.sum()
        return Channel(columns)


def _same_ratio(p_i: float, q_i: float, p_j: float, q_j: float) -> bool:
    left, right = p_i * q_j, p_j * q_i
    return abs(left - right) <= RATIO_TOLERANCE * max(left, right)


def canonicalize(p: DistributionLike, q: DistributionLike) -> PairCanonicalization:
    """
    Merge elements sharing a likelihood ratio and drop both-zero elements.

    Merged elements keep the order of their first appearance. Equal ratios are
    detected through cross products, which also handles zero and infinite
    ratios without dividing.

    Args:
        p: First distribution
        q: Second distribution

    Returns:
        PairCanonicalization with distinct, well-defined ratios
    """
    a, b = check_pair(p, q)
    source_p, source_q = Distribution(a), Distribution(b)

    groups: List[List[int]] = []
    dropped: List[int] = []
    for index in range(a.size):
        if a[index] == 0 and b[index] == 0:
            dropped.append(index)
            continue
        for group in groups:
            head = group[0]
            if _same_ratio(a[index], b[index], a[head], b[head]):
                group.append(index)
                break
        else:
            groups.append([index])

    if len(groups) == 1:
        logger.warning("pair has a single likelihood ratio (p == q); canonical alphabet has one element")

    block_of: Dict[int, int] = {i: block for block, group in enumerate(groups) for i in group}
    merge_matrix = np.zeros((len(groups), a.size))
    for index in range(a.size):
        merge_matrix[block_of.get(index, 0), index] = 1.0

    merged_p = np.array([a[group].sum() for group in groups])
    merged_q = np.array([b[group].sum() for group in groups])
    return PairCanonicalization(
        p=Distribution(merged_p),
        q=Distribution(merged_q),
        merge=Channel(merge_matrix),
        groups=tuple(tuple(group) for group in groups),
        dropped=tuple(dropped),
        source_p=source_p,
        source_q=source_q,
    )
