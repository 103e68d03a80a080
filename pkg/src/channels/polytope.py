"""
Extreme points of LP channel families.

Two sources: a closed-form catalog for pure eps-LDP with two outputs (any k)
or three outputs on three inputs, and a generic vertex enumeration through
scipy's Qhull half-space intersection for small families.
"""

from itertools import permutations, product
from typing import Dict, Iterator, List, Optional, Set, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection

from src.channels.ldp import LpFamily, membership
from src.errors import LdpOptError, UnsupportedFamilyError, VertexCapExceededError
from src.log import get_logger
from src.models.distributions import Channel
from src.settings import COLUMN_TOLERANCE, TIGHTNESS_TOLERANCE, VERTEX_CAP

logger = get_logger("polytope")

_ACTIVE_TOLERANCE = 1e-7
_VERTEX_DECIMALS = 9


def two_type_patterns(k: int, gamma: float, up_to_row_swap: bool = False) -> Iterator[Tuple[int, Channel]]:
    """
    Non-constant binary channels with two column types.

    Column i is (a, 1 - a) when bit i is set and (1 - a, a) otherwise, with
    a / (1 - a) = gamma. Patterns are yielded in increasing bit order, the
    pattern index being the bit vector read as a binary number.

    Args:
        k: Input alphabet size
        gamma: e^eps
        up_to_row_swap: Keep only patterns whose first bit is set

    Yields:
        (pattern index, channel)
    """
    high = 1.0 / (1.0 + 1.0 / gamma) if gamma > 0 else 0.0
    low = 1.0 - high
    for bits in product((0, 1), repeat=k):
        if len(set(bits)) == 1:
            continue
        if up_to_row_swap and bits[0] == 0:
            continue
        top = np.where(np.array(bits) == 1, high, low)
        index = int("".join(str(b) for b in bits), 2)
        yield index, Channel(np.vstack([top, 1.0 - top]))


def _catalog(family: LpFamily, up_to_row_permutation: bool) -> Iterator[Channel]:
    gamma = family.pure_gamma()
    k, l = family.k, family.l

    for row in range(1 if up_to_row_permutation else l):
        yield Channel.constant(k, l, row)

    if l == 2:
        for _, channel in two_type_patterns(k, gamma, up_to_row_permutation):
            yield channel
        return

    zero_rows = (2,) if up_to_row_permutation else range(3)
    for zero_row in zero_rows:
        rows = [r for r in range(3) if r != zero_row]
        for _, pattern in two_type_patterns(3, gamma, up_to_row_permutation):
            matrix = np.zeros((3, 3))
            matrix[rows, :] = pattern.matrix
            yield Channel(matrix)

    # diagonal 1-2a: (1-2a)/a = gamma is randomized response, a/(1-2a) = gamma the other
    for off in (1.0 / (gamma + 2.0), gamma / (1.0 + 2.0 * gamma)):
        diagonal = 1.0 - 2.0 * off
        orders = [(0, 1, 2)] if up_to_row_permutation else permutations(range(3))
        for perm in orders:
            matrix = np.full((3, 3), off)
            matrix[list(perm), [0, 1, 2]] = diagonal
            yield Channel(matrix)


def catalog_supported(family: LpFamily) -> bool:
    if family.pure_gamma() is None:
        return False
    return family.l == 2 or (family.l == 3 and family.k == 3)


def extreme_points_catalog(family: LpFamily, up_to_row_permutation: bool = False) -> Iterator[Channel]:
    """
    Closed-form extreme points of pure eps-LDP families.

    Covers l = 2 (trivial channels plus every two-type column pattern) and
    l = k = 3 (two-row embeddings of the l = 2 patterns plus the two symmetric
    three-row channels, over the full row orbit). Exact duplicates are dropped.

    Args:
        family: LP family
        up_to_row_permutation: Keep one representative per row permutation

    Yields:
        Channel

    Raises:
        UnsupportedFamilyError: If the family is not pure eps-LDP with l = 2 or l = k = 3
    """
    if not catalog_supported(family):
        raise UnsupportedFamilyError(f"no closed-form catalog for {family}")

    seen: Set[bytes] = set()
    for channel in _catalog(family, up_to_row_permutation):
        key = channel.matrix.tobytes()
        if key not in seen:
            seen.add(key)
            yield channel


def _row_kinds(family: LpFamily) -> List[str]:
    kinds = []
    for gamma, nu in zip(family.gamma, family.nu):
        if nu == 0 and gamma < 1:
            kinds.append("zero")
        elif nu == 0 and gamma == 1:
            kinds.append("constant")
        else:
            kinds.append("free")
    return kinds


def _parametrize(family: LpFamily) -> Tuple[np.ndarray, np.ndarray, List[str]]:
    """
    Affine map y -> entries with columns summing to 1 built in.

    Returns:
        (weights, offsets, kinds) with entry (j, i) = weights[j*k+i] @ y + offsets[j*k+i]
    """
    k, l = family.k, family.l
    kinds = _row_kinds(family)
    if all(kind == "zero" for kind in kinds):
        raise LdpOptError(f"{family} is empty: every row is forced to zero")

    free_rows = [j for j, kind in enumerate(kinds) if kind == "free"]
    constant_rows = [j for j, kind in enumerate(kinds) if kind == "constant"]
    dependent = free_rows[-1] if free_rows else constant_rows[-1]

    index: Dict[Tuple[int, int], int] = {}
    count = 0
    for j in range(l):
        if j == dependent or kinds[j] == "zero":
            continue
        if kinds[j] == "free":
            for i in range(k):
                index[(j, i)] = count
                count += 1
        else:
            for i in range(k):
                index[(j, i)] = count
            count += 1

    weights = np.zeros((l * k, count))
    offsets = np.zeros(l * k)
    for (j, i), variable in index.items():
        weights[j * k + i, variable] = 1.0
    for i in range(k):
        row = dependent * k + i
        offsets[row] = 1.0
        for j in range(l):
            if j != dependent and (j, i) in index:
                weights[row, index[(j, i)]] -= 1.0
    return weights, offsets, kinds


def _halfspaces(family: LpFamily, weights: np.ndarray, offsets: np.ndarray, kinds: List[str]) -> np.ndarray:
    """Rows [A | c] meaning A y + c <= 0, normalized and deduplicated."""
    k = family.k
    rows = [np.append(-weights[e], -offsets[e]) for e in range(weights.shape[0])]
    for j, kind in enumerate(kinds):
        if kind != "free" or family.nu[j] >= 1:
            continue
        gamma, nu = family.gamma[j], family.nu[j]
        for i in range(k):
            for other in range(k):
                if i == other:
                    continue
                a = weights[j * k + i] - gamma * weights[j * k + other]
                c = offsets[j * k + i] - gamma * offsets[j * k + other] - nu
                rows.append(np.append(a, c))

    table = np.array(rows)
    norms = np.linalg.norm(table[:, :-1], axis=1)
    table = table[norms > 1e-14] / norms[norms > 1e-14, None]
    _, keep = np.unique(np.round(table, 12), axis=0, return_index=True)
    return table[np.sort(keep)]


def _interior_point(table: np.ndarray) -> np.ndarray:
    """Chebyshev center of {y : A y + c <= 0}."""
    a, c = table[:, :-1], table[:, -1]
    dim = a.shape[1]
    objective = np.zeros(dim + 1)
    objective[-1] = -1.0
    a_ub = np.hstack([a, np.ones((a.shape[0], 1))])
    result = linprog(objective, A_ub=a_ub, b_ub=-c, bounds=[(None, None)] * dim + [(0, None)], method="highs")
    if not result.success or result.x[-1] <= 1e-10:
        raise LdpOptError("channel polytope is not full-dimensional in its parametrization")
    return result.x[:-1]


def _refine(table: np.ndarray, point: np.ndarray) -> Optional[np.ndarray]:
    """Snap an approximate vertex onto the exact solution of its active constraints."""
    a, c = table[:, :-1], table[:, -1]
    active = np.abs(a @ point + c) <= _ACTIVE_TOLERANCE
    if np.linalg.matrix_rank(a[active], tol=1e-9) < a.shape[1]:
        return None
    exact, *_ = np.linalg.lstsq(a[active], -c[active], rcond=None)
    if np.max(a @ exact + c) > 1e-9:
        return None
    return exact


def _vertices_1d(table: np.ndarray) -> List[np.ndarray]:
    a, c = table[:, 0], table[:, -1]
    upper = min((-ci / ai for ai, ci in zip(a, c) if ai > 0), default=None)
    lower = max((-ci / ai for ai, ci in zip(a, c) if ai < 0), default=None)
    if upper is None or lower is None or lower > upper + 1e-12:
        return []
    return [np.array([lower]), np.array([upper])]


def vertex_enumeration(family: LpFamily) -> List[Channel]:
    """
    All vertices of a family's channel polytope.

    Columns summing to one are eliminated through a dependent row, rows forced
    to be constant or zero are collapsed, and the remaining inequalities are
    intersected with Qhull from a Chebyshev-center interior point. Each
    returned point is snapped to the exact solution of its active constraints
    (which must have full rank), checked for membership, deduplicated, and
    sorted lexicographically.

    Raises:
        VertexCapExceededError: If l * k exceeds VERTEX_CAP
    """
    if family.l * family.k > VERTEX_CAP:
        raise VertexCapExceededError(
            f"vertex enumeration capped at l*k <= {VERTEX_CAP}, requested {family.l}x{family.k}"
        )
    k, l = family.k, family.l
    weights, offsets, kinds = _parametrize(family)
    dim = weights.shape[1]

    if dim == 0:
        candidates = [np.zeros(0)]
        table = np.zeros((0, 1))
    else:
        table = _halfspaces(family, weights, offsets, kinds)
        if dim == 1:
            candidates = _vertices_1d(table)
        else:
            interior = _interior_point(table)
            intersection = HalfspaceIntersection(table, interior)
            candidates = [vertex for vertex in (_refine(table, point) for point in intersection.intersections)
                          if vertex is not None]

    found: Dict[Tuple[float, ...], Channel] = {}
    for point in candidates:
        entries = (weights @ point + offsets).reshape(l, k)
        entries = np.where(np.abs(entries) < 1e-12, 0.0, entries)
        try:
            channel = Channel(entries)
        except LdpOptError:
            continue
        if not membership(family, channel, tolerance=1e-9):
            continue
        key = tuple(np.round(channel.matrix, _VERTEX_DECIMALS).ravel())
        found.setdefault(key, channel)

    vertices = [found[key] for key in sorted(found)]
    logger.debug(f"{family}: {len(vertices)} vertices")
    return vertices


def free_entries_per_column(channel: Channel, tolerance: float = TIGHTNESS_TOLERANCE) -> np.ndarray:
    """Entries per column that equal neither their row min nor their row max."""
    matrix = channel.matrix
    at_max = np.abs(matrix - matrix.max(axis=1, keepdims=True)) <= tolerance
    at_min = np.abs(matrix - matrix.min(axis=1, keepdims=True)) <= tolerance
    return (~(at_max | at_min)).sum(axis=0)


def unique_column_count(channel: Channel, tolerance: float = COLUMN_TOLERANCE) -> int:
    return len(channel.unique_columns(tolerance))


def unique_column_bound(l: int) -> int:
    """Largest number of distinct columns a vertex of F(l, k) can have: l * 2^(l-1)."""
    return l * 2 ** (l - 1)


def extreme_points(family: LpFamily) -> List[Channel]:
    """Catalog when it covers the family, otherwise enumerated vertices."""
    try:
        return list(extreme_points_catalog(family))
    except UnsupportedFamilyError:
        logger.info(f"no closed-form catalog for {family}; enumerating vertices")
        return vertex_enumeration(family)


__all__ = [
    "catalog_supported",
    "extreme_points",
    "extreme_points_catalog",
    "free_entries_per_column",
    "two_type_patterns",
    "unique_column_bound",
    "unique_column_count",
    "vertex_enumeration",
]
