"""
Quasi-convex objectives g(Tp, Tq) maximized by the optimizers.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.models.divergences import chernoff_info, hellinger_sq, kl, renyi, tv

OBJECTIVE_NAMES = ("hellinger_sq", "tv", "kl", "renyi", "chernoff")


@dataclass(frozen=True)
class Objective:
    """
    A divergence evaluated on the privatized pair.

    Attributes:
        name: One of OBJECTIVE_NAMES
        alpha: Renyi order (renyi only)
        permutation_invariant: False asks the optimizers to also try output
            relabelings of every candidate
    """

    name: str = "hellinger_sq"
    alpha: Optional[float] = None
    permutation_invariant: bool = True

    def __post_init__(self):
        if self.name not in OBJECTIVE_NAMES:
            raise ValueError(f"unknown objective {self.name!r}; choose from {', '.join(OBJECTIVE_NAMES)}")
        if self.name == "renyi" and (self.alpha is None or self.alpha <= 0):
            raise ValueError("renyi objective needs a positive order, e.g. renyi:2")

    @classmethod
    def from_name(cls, spec: str) -> "Objective":
        """
        Parse an objective name such as "tv" or "renyi:2" ("renyi:inf" for order infinity).
        """
        name, _, order = spec.partition(":")
        if name == "renyi":
            if not order:
                raise ValueError("renyi objective needs an order, e.g. renyi:2")
            return cls(name, float(order))
        if order:
            raise ValueError(f"objective {name!r} takes no parameter")
        return cls(name)

    def __call__(self, tp, tq) -> float:
        return float(self.evaluate_batch(np.asarray(tp, dtype=float), np.asarray(tq, dtype=float)))

    def evaluate_batch(self, tp: np.ndarray, tq: np.ndarray) -> np.ndarray:
        """Objective along the last axis of stacked output distributions."""
        if self.name == "hellinger_sq":
            return np.asarray(hellinger_sq(tp, tq))
        if self.name == "tv":
            return np.asarray(tv(tp, tq))
        if self.name == "kl":
            return np.asarray(kl(tp, tq))
        if self.name == "renyi":
            return np.asarray(renyi(tp, tq, self.alpha))

        if tp.ndim == 1:
            return np.asarray(chernoff_info(tp, tq))
        flat_p = tp.reshape(-1, tp.shape[-1])
        flat_q = tq.reshape(-1, tq.shape[-1])
        values = np.array([chernoff_info(a, b) for a, b in zip(flat_p, flat_q)])
        return values.reshape(tp.shape[:-1])

    def __str__(self) -> str:
        if self.name == "renyi":
            order = "inf" if math.isinf(self.alpha) else f"{self.alpha:g}"
            return f"renyi:{order}"
        return self.name


HELLINGER = Objective("hellinger_sq")
