"""
LP channel families and the tight/loose entry machinery.

An LP family F(gamma, nu) on [k] -> [l] holds the channels whose rows satisfy
T(j, i) <= gamma_j T(j, i') + nu_j for every pair of inputs, equivalently
M_j <= gamma_j m_j + nu_j with M_j, m_j the row max and min. Pure eps-LDP is
gamma_j = e^eps, nu_j = 0; singleton-based LDP and binary (eps, delta)-LDP
use nu_j = delta.
"""

from dataclasses import dataclass
from enum import IntFlag
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.channels.threshold import ExtremalityWitness
from src.errors import (
    AdmissibilityError,
    DimensionMismatchError,
    InvalidDistributionError,
    WitnessConstructionError,
)
from src.log import get_logger
from src.models.distributions import Channel, DistributionLike, LikelihoodOrder, check_pair
from src.settings import (
    BISECTION_MAX_ITER,
    COLUMN_TOLERANCE,
    MEMBERSHIP_TOLERANCE,
    TIGHTNESS_TOLERANCE,
    capped_exp,
)

logger = get_logger("ldp")


@dataclass(frozen=True)
class LpFamily:
    """
    The channel set F(gamma, nu) from [k] to [l].

    Attributes:
        gamma: Multiplicative slack per output row
        nu: Additive slack per output row
        k: Input alphabet size
        name: Short tag used in logs and certificates
        eps: Privacy parameter when the family was built from one
    """

    gamma: Tuple[float, ...]
    nu: Tuple[float, ...]
    k: int
    name: str = "lp"
    eps: Optional[float] = None

    def __post_init__(self):
        gamma = tuple(float(g) for g in self.gamma)
        nu = tuple(float(v) for v in self.nu)
        if len(gamma) != len(nu) or not gamma:
            raise DimensionMismatchError("gamma and nu need one entry per output row")
        if any(g < 0 for g in gamma) or any(v < 0 for v in nu):
            raise AdmissibilityError("gamma and nu must be non-negative")
        if self.k < 1:
            raise AdmissibilityError("input alphabet must be non-empty")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "nu", nu)

    @property
    def l(self) -> int:
        return len(self.gamma)

    @classmethod
    def pure(cls, k: int, l: int, eps: float) -> "LpFamily":
        """eps-LDP channels from [k] to [l]."""
        if eps < 0:
            raise AdmissibilityError(f"eps must be non-negative, got {eps}")
        return cls((capped_exp(eps),) * l, (0.0,) * l, k, "pure", eps)

    @classmethod
    def unconstrained(cls, k: int, l: int) -> "LpFamily":
        """Every channel from [k] to [l] (nu_j = 1 makes the constraint vacuous)."""
        return cls((1.0,) * l, (1.0,) * l, k, "unconstrained")

    def pure_gamma(self) -> Optional[float]:
        """Common gamma when the family is pure eps-LDP, else None."""
        if any(v != 0 for v in self.nu) or len(set(self.gamma)) != 1:
            return None
        return self.gamma[0]

    def resized(self, k: int, l: Optional[int] = None) -> "LpFamily":
        """Same per-row parameters on a different input size (and optionally output size)."""
        if l is None or l == self.l:
            return LpFamily(self.gamma, self.nu, k, self.name, self.eps)
        if len(set(self.gamma)) != 1 or len(set(self.nu)) != 1:
            raise AdmissibilityError("only row-homogeneous families can change output size")
        return LpFamily((self.gamma[0],) * l, (self.nu[0],) * l, k, self.name, self.eps)

    def to_dict(self) -> Dict:
        return {"gamma": list(self.gamma), "nu": list(self.nu), "k": self.k, "l": self.l}

    @classmethod
    def from_dict(cls, data: Dict) -> "LpFamily":
        family = cls(tuple(data["gamma"]), tuple(data["nu"]), int(data["k"]))
        if "l" in data and int(data["l"]) != family.l:
            raise DimensionMismatchError(f"l = {data['l']} but {family.l} rows given")
        return family

    def __str__(self) -> str:
        if self.eps is not None:
            delta = self.nu[0]
            return f"{self.name}(k={self.k}, l={self.l}, eps={self.eps:g}, delta={delta:g})"
        return f"{self.name}(k={self.k}, l={self.l})"


def sldp_family(k: int, l: int, eps: float, delta: float) -> LpFamily:
    """Singleton-based LDP: gamma_j = e^eps, nu_j = delta."""
    if eps < 0 or not 0 <= delta <= 1:
        raise AdmissibilityError(f"need eps >= 0 and delta in [0, 1], got ({eps}, {delta})")
    return LpFamily((capped_exp(eps),) * l, (float(delta),) * l, k, "sldp", eps)


def approx_binary_family(k: int, eps: float, delta: float) -> LpFamily:
    """Binary-output (eps, delta)-LDP channels, which coincide with SLDP at l = 2."""
    family = sldp_family(k, 2, eps, delta)
    return LpFamily(family.gamma, family.nu, k, "approx2", eps)


def randomized_response(k: int, eps: float) -> Channel:
    """
    k-ary randomized response.

    Keeps the input with probability e^eps / (k - 1 + e^eps) and otherwise
    reports one of the other k - 1 symbols uniformly. eps is capped before
    exponentiation, so eps = inf gives the identity to machine precision.

    Args:
        k: Alphabet size (>= 2)
        eps: Privacy parameter (>= 0)

    Returns:
        Symmetric k x k channel
    """
    if k < 2:
        raise AdmissibilityError(f"randomized response needs k >= 2, got {k}")
    if eps < 0:
        raise AdmissibilityError(f"eps must be non-negative, got {eps}")
    weight = capped_exp(eps)
    keep = weight / (k - 1 + weight)
    other = 1.0 / (k - 1 + weight)
    matrix = np.full((k, k), other)
    np.fill_diagonal(matrix, keep)
    return Channel(matrix)


def _check_dimensions(family: LpFamily, channel: Channel) -> None:
    if channel.input_size != family.k or channel.output_size != family.l:
        raise DimensionMismatchError(
            f"channel is {channel.output_size}x{channel.input_size}, family is {family.l}x{family.k}"
        )


def row_slack(family: LpFamily, matrix: np.ndarray) -> np.ndarray:
    """gamma_j m_j + nu_j - M_j per row (negative means violated)."""
    gamma = np.asarray(family.gamma)
    nu = np.asarray(family.nu)
    return gamma * matrix.min(axis=1) + nu - matrix.max(axis=1)


def membership(family: LpFamily, channel: Channel, tolerance: float = MEMBERSHIP_TOLERANCE) -> bool:
    """Row-wise check M_j <= gamma_j m_j + nu_j."""
    _check_dimensions(family, channel)
    return bool(np.all(row_slack(family, channel.matrix) >= -tolerance))


def mix_into_family(family: LpFamily, matrix: np.ndarray) -> np.ndarray:
    """
    Pull column-stochastic matrices toward the uniform channel until they join the family.

    Mixing with weight lam keeps each row's argmax and argmin, so the minimal
    lam has a closed form per row. Works on a single l x k matrix or a batch
    (..., l, k).
    """
    arr = np.asarray(matrix, dtype=np.float64)
    gamma = np.asarray(family.gamma)
    nu = np.asarray(family.nu)
    uniform = 1.0 / family.l

    excess = arr.max(axis=-1) - gamma * arr.min(axis=-1)
    floor = uniform * (1.0 - gamma)
    with np.errstate(divide="ignore", invalid="ignore"):
        needed = np.where(excess > nu, (excess - nu) / (excess - floor), 0.0)
    lam = np.clip(np.max(needed, axis=-1), 0.0, 1.0)
    lam = np.minimum(1.0, lam + 1e-12 * (lam > 0))
    lam = lam[..., None, None]
    return (1.0 - lam) * arr + lam * uniform


def random_member(family: LpFamily, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """
    Random channels of the family on its boundary.

    Columns are drawn from a flat Dirichlet and the matrix is mixed toward
    uniform just enough to satisfy every row constraint.

    Returns:
        l x k matrix, or (size, l, k) batch when size is given
    """
    shape = (family.k,) if size is None else (size, family.k)
    columns = rng.dirichlet(np.ones(family.l), size=shape)
    matrix = np.swapaxes(columns, -1, -2)
    return mix_into_family(family, matrix)


class EntryTag(IntFlag):
    """Tightness of a channel entry relative to its row constraint."""

    LOOSE = 0
    MAX_TIGHT = 1
    MIN_TIGHT = 2


@dataclass(frozen=True, eq=False)
class EntryClass:
    """
    Per-entry tightness grid.

    An entry is max-tight when it equals its row max M_r and the row
    constraint holds with equality, min-tight when it equals the row min m_r
    under the same equality. A constant tight row is both.
    """

    max_tight: np.ndarray
    min_tight: np.ndarray

    def tag(self, row: int, column: int) -> EntryTag:
        tag = EntryTag.LOOSE
        if self.max_tight[row, column]:
            tag |= EntryTag.MAX_TIGHT
        if self.min_tight[row, column]:
            tag |= EntryTag.MIN_TIGHT
        return tag

    def tags(self) -> List[List[EntryTag]]:
        rows, columns = self.max_tight.shape
        return [[self.tag(r, c) for c in range(columns)] for r in range(rows)]

    def loose(self) -> np.ndarray:
        return ~(self.max_tight | self.min_tight)


def classify_entries(family: LpFamily, channel: Channel, tolerance: float = TIGHTNESS_TOLERANCE) -> EntryClass:
    """Classify every entry as max-tight, min-tight, both, or loose."""
    _check_dimensions(family, channel)
    matrix = channel.matrix
    tight_rows = np.abs(row_slack(family, matrix)) <= tolerance
    at_max = np.abs(matrix - matrix.max(axis=1, keepdims=True)) <= tolerance
    at_min = np.abs(matrix - matrix.min(axis=1, keepdims=True)) <= tolerance
    return EntryClass(
        max_tight=at_max & tight_rows[:, None],
        min_tight=at_min & tight_rows[:, None],
    )


@dataclass(frozen=True)
class ForbiddenPattern:
    """
    Rows (r, r') and columns i1 < i2 < i3 (in likelihood order) such that
    T(r,i1), T(r,i3), T(r',i2) can decrease and T(r,i2), T(r',i1), T(r',i3)
    can increase without leaving the family.
    """

    rows: Tuple[int, int]
    columns: Tuple[int, int, int]


def _movable(classes: EntryClass, matrix: np.ndarray, tolerance: float) -> Tuple[np.ndarray, np.ndarray]:
    decreasable = ~classes.min_tight & (matrix > tolerance)
    increasable = ~classes.max_tight & (matrix < 1.0 - tolerance)
    return decreasable, increasable


def _pattern_holds(decreasable: np.ndarray, increasable: np.ndarray, r: int, s: int, x: int, y: int, z: int) -> bool:
    return bool(
        decreasable[r, x] and increasable[r, y] and decreasable[r, z]
        and increasable[s, x] and decreasable[s, y] and increasable[s, z]
    )


def sorted_unique_columns(channel: Channel, order: LikelihoodOrder, tolerance: float = COLUMN_TOLERANCE) -> List[int]:
    """First occurrence of each distinct column, walking the likelihood order."""
    matrix = channel.matrix
    kept: List[int] = []
    for column in order.permutation:
        vector = matrix[:, column]
        if all(np.max(np.abs(vector - matrix[:, other])) > tolerance for other in kept):
            kept.append(column)
    return kept


def find_forbidden(family: LpFamily, channel: Channel, order: LikelihoodOrder) -> Optional[ForbiddenPattern]:
    """
    Search for a forbidden tightness pattern.

    Unique columns (in likelihood order) are paired off consecutively. For each
    pair, g is the row where the first column is largest relative to the
    second and h the row where it is smallest. Two pairs sharing (g, h) give a
    pattern, which is guaranteed once there are more than 2 l^2 unique
    columns. Otherwise an exhaustive scan over column triples and row pairs
    runs.

    Returns:
        ForbiddenPattern, or None when no pattern exists
    """
    _check_dimensions(family, channel)
    if order.k != channel.input_size:
        raise DimensionMismatchError(f"order has {order.k} elements, channel has {channel.input_size} inputs")
    if not membership(family, channel):
        raise AdmissibilityError("channel is not a member of the family")

    matrix = channel.matrix
    classes = classify_entries(family, channel)
    decreasable, increasable = _movable(classes, matrix, TIGHTNESS_TOLERANCE)
    uniques = sorted_unique_columns(channel, order)

    seen: Dict[Tuple[int, int], Tuple[int, int]] = {}
    for start in range(0, len(uniques) - 1, 2):
        first, second = uniques[start], uniques[start + 1]
        diff = matrix[:, first] - matrix[:, second]
        g, h = int(np.argmax(diff)), int(np.argmin(diff))
        key = (g, h)
        if key in seen:
            earlier_first, earlier_second = seen[key]
            if _pattern_holds(decreasable, increasable, g, h, earlier_first, earlier_second, first):
                logger.debug(f"pigeonhole pattern rows={key} columns={(earlier_first, earlier_second, first)}")
                return ForbiddenPattern((g, h), (earlier_first, earlier_second, first))
        else:
            seen[key] = (first, second)

    rows = range(family.l)
    count = len(uniques)
    for a in range(count):
        for b in range(a + 1, count):
            for c in range(b + 1, count):
                x, y, z = uniques[a], uniques[b], uniques[c]
                for r in rows:
                    for s in rows:
                        if r != s and _pattern_holds(decreasable, increasable, r, s, x, y, z):
                            return ForbiddenPattern((r, s), (x, y, z))
    return None


def forbidden_witness(
    family: LpFamily,
    channel: Channel,
    pattern: ForbiddenPattern,
    p: DistributionLike,
    q: DistributionLike
) -> ExtremalityWitness:
    """
    Perturb a channel along a forbidden pattern into two family members T', T''.

    T' lowers T(r,i1) and raises T(r,i2) (and the mirror entries of row r'),
    with mass ratios that keep T'q = Tq; T'' does the same with i2 and i3.
    Their step sizes balance so that (T'p + T''p)/2 = Tp. When q_{i3} = 0 the
    i2 entries of T'' stay fixed. The common scale starts at the largest value
    keeping entries in [0, 1] and is halved until both channels are members.

    Raises:
        InvalidDistributionError: If the pattern's columns do not have
            strictly increasing likelihood ratios
        WitnessConstructionError: If no feasible step is found
    """
    _check_dimensions(family, channel)
    a_arr, b_arr = check_pair(p, q)
    order = LikelihoodOrder.from_pair(a_arr, b_arr)
    r, s = pattern.rows
    i1, i2, i3 = pattern.columns
    if not order.ratios[i1] < order.ratios[i2] < order.ratios[i3]:
        raise InvalidDistributionError("pattern columns must have strictly increasing likelihood ratios")

    p1, p2, p3 = a_arr[i1], a_arr[i2], a_arr[i3]
    q1, q2, q3 = b_arr[i1], b_arr[i2], b_arr[i3]
    gap_low = q1 * p2 / q2 - p1
    gap_high = p3 - q3 * p2 / q2

    down = np.zeros_like(channel.matrix)
    down[r, i1], down[s, i1] = -gap_high, gap_high
    down[r, i2], down[s, i2] = gap_high * q1 / q2, -gap_high * q1 / q2

    up = np.zeros_like(channel.matrix)
    up[r, i2], up[s, i2] = gap_low * q3 / q2, -gap_low * q3 / q2
    up[r, i3], up[s, i3] = -gap_low, gap_low

    matrix = channel.matrix
    limits: List[float] = []
    for direction in (down, up):
        negative, positive = direction < 0, direction > 0
        limits.extend((matrix[negative] / -direction[negative]).tolist())
        limits.extend(((1.0 - matrix[positive]) / direction[positive]).tolist())
    scale = 0.5 * min(limits) if limits else 0.0
    if scale <= 0:
        raise WitnessConstructionError("pattern entries have no room to move")

    for _ in range(BISECTION_MAX_ITER):
        first = np.clip(matrix + scale * down, 0.0, 1.0)
        second = np.clip(matrix + scale * up, 0.0, 1.0)
        first_channel, second_channel = Channel(first), Channel(second)
        if membership(family, first_channel) and membership(family, second_channel):
            return ExtremalityWitness(first_channel, second_channel, 0.5, (int(i1), int(i2), int(i3)))
        scale *= 0.5

    raise WitnessConstructionError(f"no feasible step for pattern {pattern}")
