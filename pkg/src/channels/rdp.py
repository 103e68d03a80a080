"""
Binary (eps, alpha)-Renyi-DP channels.

A 2x2 channel [[x, y], [1 - x, 1 - y]] is (eps, alpha)-RDP when the Renyi
divergence between its two columns is at most eps in both directions. The set
is convex but not polyhedral, so its extreme points are traced along the
boundary curve on a grid of x values.
"""

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.channels.ldp import randomized_response
from src.errors import AdmissibilityError, DimensionMismatchError
from src.log import get_logger
from src.models.distributions import Channel
from src.models.divergences import renyi
from src.settings import BISECTION_MAX_ITER, BISECTION_TOLERANCE, RDP_GRID_STEP

logger = get_logger("rdp")


def _bernoulli_renyi(x: np.ndarray, y: np.ndarray, alpha: float) -> np.ndarray:
    """Renyi divergence between Ber(x) and Ber(y), elementwise."""
    first = np.stack([1.0 - x, x], axis=-1)
    second = np.stack([1.0 - y, y], axis=-1)
    return np.asarray(renyi(first, second, alpha), dtype=float)


@dataclass(frozen=True)
class RdpBinaryFamily:
    """
    (eps, alpha)-RDP channels from [2] to [2].

    Attributes:
        eps: Divergence budget
        alpha: Renyi order (> 1, may be math.inf)
    """

    eps: float
    alpha: float

    def __post_init__(self):
        if self.eps < 0:
            raise AdmissibilityError(f"eps must be non-negative, got {self.eps}")
        if not self.alpha > 1:
            raise AdmissibilityError(f"Renyi order must exceed 1, got {self.alpha}")

    @property
    def k(self) -> int:
        return 2

    @property
    def l(self) -> int:
        return 2

    def worst_divergence(self, channel: Channel) -> float:
        """Largest Renyi divergence between the two columns, either direction."""
        if channel.input_size != 2 or channel.output_size != 2:
            raise DimensionMismatchError("RDP family is defined on 2x2 channels")
        first, second = channel.matrix[:, 0], channel.matrix[:, 1]
        return max(renyi(first, second, self.alpha), renyi(second, first, self.alpha))

    def admits(self, channel: Channel, tolerance: float = 1e-9) -> bool:
        return self.worst_divergence(channel) <= self.eps + tolerance

    def y_range(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Feasible interval of y for each x.

        Finds the smallest y <= x and the largest y >= x with
        max(D(x||y), D(y||x)) <= eps, by vectorized bisection. The divergence
        grows as y moves away from x, so the feasible set is an interval.

        Returns:
            (lower y, upper y)
        """
        x = np.asarray(x, dtype=float)

        def feasible(y: np.ndarray) -> np.ndarray:
            forward = _bernoulli_renyi(x, y, self.alpha)
            backward = _bernoulli_renyi(y, x, self.alpha)
            return np.maximum(forward, backward) <= self.eps

        lower = self._bisect(feasible, x.copy(), np.zeros_like(x))
        upper = self._bisect(feasible, x.copy(), np.ones_like(x))
        return lower, upper

    def boundary(self, step: float = RDP_GRID_STEP) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Trace the boundary of the feasible (x, y) region on a grid of x.

        Returns:
            (x grid, upper y, lower y)
        """
        grid = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
        lower, upper = self.y_range(grid)
        return grid, upper, lower

    @staticmethod
    def _bisect(feasible, inside: np.ndarray, outside: np.ndarray) -> np.ndarray:
        """Move `inside` towards `outside` while staying feasible."""
        reachable = feasible(outside)
        inside = np.where(reachable, outside, inside)
        for _ in range(BISECTION_MAX_ITER):
            if np.max(np.abs(outside - inside)) <= BISECTION_TOLERANCE:
                break
            middle = 0.5 * (inside + outside)
            ok = feasible(middle)
            inside = np.where(ok, middle, inside)
            outside = np.where(ok, outside, middle)
        return inside

    def candidates(self, step: float = RDP_GRID_STEP) -> List[Channel]:
        """Boundary channels [[x, y], [1 - x, 1 - y]] for every traced point, deduplicated."""
        grid, upper, lower = self.boundary(step)
        seen = set()
        channels = []
        for x, y_hi, y_lo in zip(grid, upper, lower):
            for y in (y_hi, y_lo):
                key = (round(float(x), 12), round(float(y), 12))
                if key in seen or key[0] == key[1]:
                    continue
                seen.add(key)
                channels.append(Channel(np.array([[x, y], [1.0 - x, 1.0 - y]])))
        logger.debug(f"{self}: {len(channels)} boundary channels")
        return channels

    def __str__(self) -> str:
        return f"rdp(eps={self.eps:g}, alpha={self.alpha:g})"


def rdp_binary_family(eps: float, alpha: float) -> RdpBinaryFamily:
    return RdpBinaryFamily(float(eps), float(alpha))


def rr_feasibility_limit(family: RdpBinaryFamily) -> float:
    """
    Largest t with binary randomized response RR(2, t) inside the family.

    At alpha = inf the constraint is pure eps-LDP and the limit is eps itself.
    Otherwise the worst divergence of RR(2, t) increases in t, so bisection on
    t finds the crossing.
    """
    if math.isinf(family.alpha):
        return family.eps
    if family.eps == 0:
        return 0.0

    low, high = 0.0, 1.0
    while family.admits(randomized_response(2, high), tolerance=0.0):
        low, high = high, 2.0 * high
        if high > 700:
            return math.inf
    for _ in range(BISECTION_MAX_ITER):
        if high - low <= BISECTION_TOLERANCE:
            break
        middle = 0.5 * (low + high)
        if family.admits(randomized_response(2, middle), tolerance=0.0):
            low = middle
        else:
            high = middle
    return low
