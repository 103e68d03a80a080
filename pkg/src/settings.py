"""
Configuration settings for the LDP hypothesis-testing channel toolkit.
This module defines numerical tolerances, search limits, simulator parameters,
and logging configuration. Every value can be overridden from the environment
or a local .env file.
"""

import math
import os
from typing import Dict, Optional, Tuple
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# ============================================================================
# PARALLELISM
# ============================================================================

# Worker cap for partitioned searches, curve points and simulator blocks
THREADS = int(os.getenv("LDPOPT_THREADS", str(os.cpu_count() or 1)))

# ============================================================================
# NUMERICAL TOLERANCES
# ============================================================================

EPS_CAP = float(os.getenv("LDPOPT_EPS_CAP", "700"))  # clamp before exp() to avoid overflow
SUM_TOLERANCE = float(os.getenv("LDPOPT_SUM_TOLERANCE", "1e-12"))  # distributions and channel columns
MEMBERSHIP_TOLERANCE = float(os.getenv("LDPOPT_MEMBERSHIP_TOLERANCE", "1e-12"))  # M_j <= g_j m_j + v_j slack
TIGHTNESS_TOLERANCE = float(os.getenv("LDPOPT_TIGHTNESS_TOLERANCE", "1e-9"))  # max/min-tight entries
COLUMN_TOLERANCE = float(os.getenv("LDPOPT_COLUMN_TOLERANCE", "1e-9"))  # unique-column detection
RATIO_TOLERANCE = float(os.getenv("LDPOPT_RATIO_TOLERANCE", "1e-12"))  # equal likelihood ratios
DETERMINISTIC_TOLERANCE = float(os.getenv("LDPOPT_DETERMINISTIC_TOLERANCE", "1e-12"))  # point-mass columns
WITNESS_TOLERANCE = float(os.getenv("LDPOPT_WITNESS_TOLERANCE", "1e-10"))  # mixing identity

# ============================================================================
# SEARCH LIMITS
# ============================================================================

VERTEX_CAP = int(os.getenv("LDPOPT_VERTEX_CAP", "20"))  # max l*k for vertex enumeration
BISECTION_MAX_ITER = int(os.getenv("LDPOPT_BISECTION_MAX_ITER", "200"))
BISECTION_TOLERANCE = float(os.getenv("LDPOPT_BISECTION_TOLERANCE", "1e-12"))
GOLDEN_TOLERANCE = float(os.getenv("LDPOPT_GOLDEN_TOLERANCE", "1e-10"))  # chernoff lambda search
REFINEMENT_ITERATIONS = int(os.getenv("LDPOPT_REFINEMENT_ITERATIONS", "200"))  # oracle local refinement
RDP_GRID_STEP = float(os.getenv("LDPOPT_RDP_GRID_STEP", "1e-4"))  # x-grid for the RDP boundary curve
SEARCH_CHUNK = int(os.getenv("LDPOPT_SEARCH_CHUNK", "4096"))  # threshold channels per worker task

# ============================================================================
# SIMULATOR PARAMETERS
# ============================================================================

TRIAL_BLOCK = int(os.getenv("LDPOPT_TRIAL_BLOCK", "1000"))  # trials per RNG substream
WILSON_Z = float(os.getenv("LDPOPT_WILSON_Z", "1.96"))  # 95% interval
MAX_SAMPLE_SIZE = int(float(os.getenv("LDPOPT_MAX_SAMPLE_SIZE", "1e9")))
TARGET_ERROR = float(os.getenv("LDPOPT_TARGET_ERROR", "0.1"))  # summed type-I + type-II error
DEFAULT_TRIALS = int(os.getenv("LDPOPT_DEFAULT_TRIALS", "10000"))
DEFAULT_SEED = int(os.getenv("LDPOPT_DEFAULT_SEED", "0"))

# ============================================================================
# SAMPLE-COMPLEXITY CURVES
# ============================================================================

FREE_PRIVACY_FACTOR = float(os.getenv("LDPOPT_FREE_PRIVACY_FACTOR", "10"))  # n_hat within this factor of the non-private n
DEFAULT_EPS_GRID = os.getenv("LDPOPT_DEFAULT_EPS_GRID", "log:1,1e10,60")

# ============================================================================
# REFERENCE PAIRS
# ============================================================================

# Named (rho, nu) presets: rho = Hellinger divergence, nu = total variation
REFERENCE_PAIRS: Dict[str, Dict] = {
    "stagnation": {
        "rho": 1e-8,
        "nu": 1e-5,
        "description": "Stagnation example: d_h^2 = 1e-8, d_TV = 1e-5"
    },
    "moderate": {
        "rho": 0.05,
        "nu": 0.1,
        "description": "Moderate separation, quick to simulate"
    },
    "boundary": {
        "rho": 2e-4,
        "nu": 1e-2,
        "description": "Lower edge of the admissible region (rho = 2 nu^2)"
    }
}

# ============================================================================
# VERIFICATION SUITES
# ============================================================================

VERIFY_SUITES: Dict[str, str] = {
    "extreme-comm": "Threshold channels are extreme; witnesses for every non-threshold map",
    "extreme-ldp": "Decomposition search dominates random private channels",
    "sdpi": "Binary randomized response: TV identity and argmax over 2x2 LDP channels",
    "free-privacy": "Free-privacy construction retains a constant fraction of d_h^2",
    "sim": "Simulator soundness and exact binomial agreement",
    "worst-case": "Worst-case ternary pair hits (rho, nu) exactly",
    "approx-ldp": "Approximate-LDP augmentation identity",
    "polytope": "Vertex structure and closure under pre-processing",
    "stagnation": "Three-phase sample-complexity curve for the stagnation example",
}

# ============================================================================
# LOGGING CONFIGURATION
# ============================================================================

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "[%(name)s] %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# ============================================================================
# HELPER FUNCTIONS
# ============================================================================

def capped_exp(eps: float) -> float:
    """
    Compute e^eps with eps clamped to EPS_CAP.

    Args:
        eps: Privacy parameter (may be math.inf)

    Returns:
        exp(min(eps, EPS_CAP))
    """
    return math.exp(min(eps, EPS_CAP))


def resolve_threads(requested: Optional[int] = None) -> int:
    """
    Resolve the worker count for a parallel search.

    Args:
        requested: Explicit worker count (e.g. from --threads), or None

    Returns:
        Positive worker count; falls back to LDPOPT_THREADS
    """
    if requested is None or requested < 1:
        return max(1, THREADS)
    return requested


def get_reference_pair(name: str) -> Tuple[float, float]:
    """
    Look up a named (rho, nu) preset.

    Args:
        name: Preset name (e.g., "stagnation")

    Returns:
        Tuple (rho, nu)

    Raises:
        KeyError: If the preset does not exist
    """
    preset = REFERENCE_PAIRS[name]
    return preset["rho"], preset["nu"]
