"""
Sample-complexity estimates and curves over eps.

The estimate is n = 1 / max d_h^2(Tp, Tq) over eps-LDP channels, which tracks
the true sample complexity up to constant factors.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.channels.ldp import LpFamily
from src.constructions.closed_forms import sdpi_binary
from src.log import get_logger
from src.models.distributions import Channel, DistributionLike, check_pair
from src.models.divergences import hellinger_sq
from src.optimization.optimizer import maximize_comm, maximize_private
from src.settings import FREE_PRIVACY_FACTOR, capped_exp, resolve_threads

logger = get_logger("complexity")


@dataclass(frozen=True)
class SampleComplexityEstimate:
    """
    One point of a sample-complexity curve.

    Attributes:
        eps: Privacy parameter
        l: Output size searched
        value: Best d_h^2(Tp, Tq)
        channel: Channel attaining value
        certificate: How the channel was found
    """

    eps: float
    l: int
    value: float
    channel: Channel
    certificate: str

    @property
    def e_eps(self) -> float:
        return capped_exp(self.eps)

    @property
    def n_hat(self) -> float:
        return 1.0 / self.value if self.value > 0 else math.inf


def curve_output_size(k: int, l: Optional[int] = None) -> int:
    """Binary pairs use l = 2, ternary pairs the full l = 3 catalog, larger pairs l (default 2)."""
    if k == 3 and l is None:
        return 3
    return 2 if l is None else l


def estimate_sample_complexity(
    p: DistributionLike,
    q: DistributionLike,
    eps: float,
    l: Optional[int] = None,
    threads: Optional[int] = 1
) -> SampleComplexityEstimate:
    """
    Estimate the eps-LDP sample complexity of testing p against q.

    Binary pairs use binary randomized response in closed form; other pairs
    run maximize_private over pure eps-LDP channels into [l].
    """
    a, b = check_pair(p, q)
    if a.size == 2 and l in (None, 2):
        channel, value = sdpi_binary(a, b, eps)
        return SampleComplexityEstimate(eps, 2, value, channel, "rr-binary")

    size = curve_output_size(a.size, l)
    result = maximize_private(a, b, LpFamily.pure(a.size, size, eps), threads=threads)
    return SampleComplexityEstimate(eps, size, result.value, result.channel, str(result.certificate))


def complexity_curve(
    p: DistributionLike,
    q: DistributionLike,
    eps_grid: Sequence[float],
    l: Optional[int] = None,
    threads: Optional[int] = None
) -> List[SampleComplexityEstimate]:
    """
    Sample-complexity estimates on a grid of eps, in grid order.

    Grid points are independent and run on a thread pool; each point's own
    search is single-threaded.
    """
    a, b = check_pair(p, q)
    grid = [float(eps) for eps in eps_grid]
    logger.info(f"curve over {len(grid)} eps values for k={a.size}")

    def point(eps: float) -> SampleComplexityEstimate:
        return estimate_sample_complexity(a, b, eps, l, threads=1)

    workers = min(resolve_threads(threads), max(1, len(grid)))
    if workers <= 1:
        return [point(eps) for eps in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(point, grid))


def parse_eps_grid(spec: str) -> List[float]:
    """
    Parse "log:start,stop,points" (geometric grid of e^eps) or a comma list of eps values.

    Raises:
        ValueError: On malformed specs or non-positive e^eps bounds
    """
    if spec.startswith("log:"):
        parts = spec[4:].split(",")
        if len(parts) != 3:
            raise ValueError(f"grid spec {spec!r} must look like log:start,stop,points")
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
        if start <= 0 or stop <= 0 or points < 1:
            raise ValueError(f"grid spec {spec!r} needs positive e^eps bounds and points >= 1")
        return [float(x) for x in np.log(np.geomspace(start, stop, points))]
    values = [float(x) for x in spec.split(",") if x.strip()]
    if not values or any(v < 0 for v in values):
        raise ValueError(f"grid spec {spec!r} must list non-negative eps values")
    return values


def baseline_sample_complexity(p: DistributionLike, q: DistributionLike, l: Optional[int] = None) -> float:
    """Non-private estimate 1 / max d_h^2(Tp, Tq) over channels into [l] (all channels when l is None)."""
    a, b = check_pair(p, q)
    size = a.size if l is None else l
    value = hellinger_sq(a, b) if size >= a.size else maximize_comm(a, b, size).value
    return 1.0 / value if value > 0 else math.inf


def free_privacy_threshold(
    curve: Sequence[SampleComplexityEstimate],
    baseline: float,
    factor: float = FREE_PRIVACY_FACTOR
) -> Optional[float]:
    """
    Smallest eps on the curve whose estimate is within `factor` of the non-private one.

    Returns:
        eps, or None when no grid point qualifies
    """
    for point in sorted(curve, key=lambda item: item.eps):
        if point.n_hat <= factor * baseline:
            return point.eps
    return None


def curve_slope(curve: Sequence[SampleComplexityEstimate], low: float, high: float) -> float:
    """Least-squares slope of log n against log eps for grid points with low <= eps <= high."""
    points = [(pt.eps, pt.n_hat) for pt in curve if low <= pt.eps <= high and pt.eps > 0 and math.isfinite(pt.n_hat)]
    if len(points) < 2:
        raise ValueError("need at least two finite curve points in range to fit a slope")
    eps, n_hat = np.array(points).T
    slope, _ = np.polyfit(np.log(eps), np.log(n_hat), 1)
    return float(slope)
