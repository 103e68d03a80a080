"""
Brute-force validation oracles.

These never claim optimality: random search with local refinement only
lower-bounds the true maximum, and the deterministic oracle is exhaustive but
exponential in k. The exact optimizers are tested against both.
"""

from dataclasses import dataclass
from itertools import product
from typing import Union

import numpy as np

from src.channels.ldp import LpFamily, mix_into_family, random_member
from src.channels.rdp import RdpBinaryFamily
from src.errors import DimensionMismatchError
from src.log import get_logger
from src.models.distributions import DistributionLike, check_pair
from src.optimization.objectives import HELLINGER, Objective
from src.settings import REFINEMENT_ITERATIONS

logger = get_logger("oracle")

_BATCH = 4096
_MIN_STEP = 1e-12


@dataclass(frozen=True)
class CommConstraint:
    """All channels from [k] to [l]."""

    k: int
    l: int

    def random_batch(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # sparse Dirichlet columns land close to deterministic channels
        columns = rng.dirichlet(np.full(self.l, 0.2), size=(size, self.k))
        return np.swapaxes(columns, -1, -2)

    def project(self, matrices: np.ndarray) -> np.ndarray:
        clipped = np.clip(matrices, 0.0, None)
        return clipped / clipped.sum(axis=-2, keepdims=True)


Constraint = Union[CommConstraint, LpFamily, RdpBinaryFamily]


def project_to_family(family: LpFamily, matrices: np.ndarray) -> np.ndarray:
    """
    Heuristic projection of column-stochastic matrices onto an LP family.

    Each row is clamped to [m_j, gamma_j m_j + nu_j] around its current
    minimum, columns are renormalized, and whatever violation remains is
    removed by mixing toward the uniform channel.
    """
    arr = np.clip(np.asarray(matrices, dtype=float), 0.0, None)
    gamma = np.asarray(family.gamma)[:, None]
    nu = np.asarray(family.nu)[:, None]
    low = arr.min(axis=-1, keepdims=True)
    arr = np.clip(arr, low, gamma * low + nu)
    totals = arr.sum(axis=-2, keepdims=True)
    arr = np.divide(arr, totals, out=np.full_like(arr, 1.0 / family.l), where=totals > 0)
    return mix_into_family(family, arr)


def _random_batch(constraint: Constraint, rng: np.random.Generator, size: int) -> np.ndarray:
    if isinstance(constraint, LpFamily):
        return random_member(constraint, rng, size)
    if isinstance(constraint, RdpBinaryFamily):
        x = rng.random(size)
        lower, upper = constraint.y_range(x)
        y = lower + rng.random(size) * (upper - lower)
        return _rdp_matrices(x, y)
    return constraint.random_batch(rng, size)


def _rdp_matrices(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    top = np.stack([x, y], axis=-1)
    return np.stack([top, 1.0 - top], axis=-2)


def _project(constraint: Constraint, matrices: np.ndarray) -> np.ndarray:
    if isinstance(constraint, LpFamily):
        return project_to_family(constraint, matrices)
    if isinstance(constraint, RdpBinaryFamily):
        x = np.clip(matrices[..., 0, 0], 0.0, 1.0)
        lower, upper = constraint.y_range(x)
        y = np.clip(matrices[..., 0, 1], lower, upper)
        return _rdp_matrices(x, y)
    return constraint.project(matrices)


def _score(objective: Objective, matrices: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    values = objective.evaluate_batch(matrices @ p, matrices @ q)
    return np.where(np.isnan(values), -np.inf, values)


def _refine(
    constraint: Constraint,
    objective: Objective,
    start: np.ndarray,
    value: float,
    p: np.ndarray,
    q: np.ndarray
) -> float:
    """Greedy coordinate mass moves between two rows of one column, step halving on stalls."""
    current = start
    l, k = current.shape
    moves = [(i, r, s) for i in range(k) for r in range(l) for s in range(l) if r != s]
    step = 1.0
    for _ in range(REFINEMENT_ITERATIONS):
        if step < _MIN_STEP:
            break
        candidates = np.repeat(current[None, :, :], len(moves), axis=0)
        for n, (i, r, s) in enumerate(moves):
            shift = min(step, candidates[n, r, i])
            candidates[n, r, i] -= shift
            candidates[n, s, i] += shift
        candidates = _project(constraint, candidates)
        scores = _score(objective, candidates, p, q)
        best = int(np.argmax(scores))
        if scores[best] > value:
            current, value = candidates[best], float(scores[best])
        else:
            step *= 0.5
    return value


def oracle_random_search(
    p: DistributionLike,
    q: DistributionLike,
    constraint: Constraint,
    objective: Objective = HELLINGER,
    trials: int = 10000,
    seed: int = 0
) -> float:
    """
    Best objective value over random feasible channels plus local refinement.

    Args:
        p: First distribution
        q: Second distribution
        constraint: CommConstraint, LpFamily or RdpBinaryFamily
        objective: Objective to evaluate
        trials: Number of random channels (0 returns -inf)
        seed: Philox key

    Returns:
        A lower bound on the maximum over the constraint set
    """
    a, b = check_pair(p, q)
    if constraint.k != a.size:
        raise DimensionMismatchError(f"constraint expects k = {constraint.k}, pair has {a.size} elements")
    if trials <= 0:
        return float("-inf")

    rng = np.random.Generator(np.random.Philox(key=seed))
    best_value, best_matrix = float("-inf"), None
    remaining = trials
    while remaining > 0:
        size = min(_BATCH, remaining)
        batch = _random_batch(constraint, rng, size)
        scores = _score(objective, batch, a, b)
        index = int(np.argmax(scores))
        if best_matrix is None or scores[index] > best_value:
            best_value, best_matrix = float(scores[index]), batch[index]
        remaining -= size

    refined = _refine(constraint, objective, best_matrix, best_value, a, b)
    logger.debug(f"random search over {trials} trials: {best_value:.6g}, refined {refined:.6g}")
    return refined


def oracle_deterministic(p: DistributionLike, q: DistributionLike, l: int, objective: Objective = HELLINGER) -> float:
    """Exhaustive maximum over all l^k deterministic channels from [k] to [l]."""
    a, b = check_pair(p, q)
    labelings = np.array(list(product(range(l), repeat=a.size)), dtype=int)
    eye = np.eye(l)
    matrices = np.swapaxes(eye[labelings], -1, -2)
    return float(np.max(_score(objective, matrices, a, b)))
