"""
Monte Carlo simulator for non-interactive private hypothesis testing.

n users each observe an i.i.d. sample from p (or q), privatize it with the same
channel T, and the analyst runs the likelihood-ratio test on the n outputs.
Only output counts matter to the test, so each trial draws one multinomial
count vector instead of n individual samples.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.stats import binom

from src.errors import DimensionMismatchError, LdpOptError, ZeroDivergenceError
from src.log import get_logger
from src.models.distributions import Channel, Distribution, DistributionLike, check_pair
from src.models.divergences import hellinger_sq
from src.settings import (
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    MAX_SAMPLE_SIZE,
    TARGET_ERROR,
    TRIAL_BLOCK,
    WILSON_Z,
    resolve_threads,
)


@dataclass(frozen=True)
class ProtocolConfig:
    """
    One simulated testing problem.

    Attributes:
        p: Null distribution
        q: Alternative distribution
        channel: Channel applied by every user
        n: Number of users / samples
        trials: Monte Carlo trials per hypothesis
        seed: 64-bit seed of the counter-based generator
    """

    p: Distribution
    q: Distribution
    channel: Channel
    n: int
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.p.k != self.q.k:
            raise DimensionMismatchError(f"alphabet sizes differ: {self.p.k} vs {self.q.k}")
        if self.channel.input_size != self.p.k:
            raise DimensionMismatchError(
                f"channel expects {self.channel.input_size} inputs, pair has {self.p.k} elements"
            )
        if self.n < 1 or self.trials < 1:
            raise ValueError(f"need n >= 1 and trials >= 1, got n={self.n}, trials={self.trials}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")

    def privatized(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.channel.matrix @ self.p.probs, self.channel.matrix @ self.q.probs


@dataclass(frozen=True)
class ErrorReport:
    """
    Empirical errors of the likelihood-ratio test.

    Attributes:
        type_one: Fraction of p-trials deciding q
        type_two: Fraction of q-trials deciding p
        half_width: 95% Wilson half-width of the error sum (sum of both halves)
        trials: Trials per hypothesis
        n: Sample size
    """

    type_one: float
    type_two: float
    half_width: float
    trials: int
    n: int

    @property
    def error_sum(self) -> float:
        return self.type_one + self.type_two

    def __str__(self) -> str:
        return (
            f"ErrorReport(n={self.n}, error={self.error_sum:.4f} +/- {self.half_width:.4f}, "
            f"type_one={self.type_one:.4f}, type_two={self.type_two:.4f}, trials={self.trials})"
        )


def wilson_half_width(failures: int, trials: int, z: float = WILSON_Z) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return math.inf
    share = failures / trials
    denominator = 1.0 + z * z / trials
    spread = math.sqrt(share * (1.0 - share) / trials + z * z / (4.0 * trials * trials))
    return z * spread / denominator


def _log_ratios(tp: np.ndarray, tq: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Finite log-ratios plus masks of symbols seen only under p or only under q."""
    both = (tp > 0) & (tq > 0)
    ratios = np.zeros_like(tp)
    ratios[both] = np.log(tp[both]) - np.log(tq[both])
    return ratios, (tp > 0) & (tq == 0), (tp == 0) & (tq > 0)


def decide_p(counts: np.ndarray, tp: np.ndarray, tq: np.ndarray) -> np.ndarray:
    """
    Likelihood-ratio decisions for rows of output counts.

    The statistic sum_y c_y log(Tp(y)/Tq(y)) picks p when it is >= 0. A symbol
    impossible under q forces p, one impossible under p forces q.
    """
    ratios, only_p, only_q = _log_ratios(tp, tq)
    statistic = counts @ ratios
    forced_p = counts[..., only_p].sum(axis=-1) > 0
    forced_q = counts[..., only_q].sum(axis=-1) > 0
    return forced_p | (~forced_q & (statistic >= 0))


class ProtocolSimulator:
    """
    Runs Monte Carlo trials of the testing protocol and searches sample sizes.

    Trials are grouped in blocks of TRIAL_BLOCK; block b draws from
    Philox(key = seed * 2^64 + b). Blocks run on a thread pool and only integer
    failure counts are summed, so reports are bit-identical for any thread
    count.

    Attributes:
        threads: Worker cap for trial blocks
        total_runs: Protocol runs since the last reset
        total_trials: Trials simulated since the last reset
    """

    def __init__(self, threads: Optional[int] = None):
        self.threads = resolve_threads(threads)
        self.logger = get_logger("simulator")
        self.total_runs = 0
        self.total_trials = 0
        self.start_time = datetime.now()

    def log(self, message: str, level: str = "INFO") -> None:
        log_func = getattr(self.logger, level.lower(), self.logger.info)
        log_func(message)

    def _block_failures(self, config: ProtocolConfig, block: int, size: int) -> Tuple[int, int]:
        tp, tq = config.privatized()
        rng = np.random.Generator(np.random.Philox(key=(config.seed << 64) | block))
        counts_p = rng.multinomial(config.n, tp, size=size)
        counts_q = rng.multinomial(config.n, tq, size=size)
        type_one = int(np.count_nonzero(~decide_p(counts_p, tp, tq)))
        type_two = int(np.count_nonzero(decide_p(counts_q, tp, tq)))
        return type_one, type_two

    def run(self, config: ProtocolConfig) -> ErrorReport:
        """
        Simulate the protocol under both hypotheses.

        Returns:
            ErrorReport with empirical type-I and type-II errors
        """
        blocks = [(block, min(TRIAL_BLOCK, config.trials - block * TRIAL_BLOCK))
                  for block in range(math.ceil(config.trials / TRIAL_BLOCK))]

        def task(item: Tuple[int, int]) -> Tuple[int, int]:
            return self._block_failures(config, *item)

        workers = min(self.threads, len(blocks))
        if workers <= 1:
            results = [task(item) for item in blocks]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(task, blocks))

        failures_p = sum(result[0] for result in results)
        failures_q = sum(result[1] for result in results)
        self.total_runs += 1
        self.total_trials += 2 * config.trials

        half_width = wilson_half_width(failures_p, config.trials) + wilson_half_width(failures_q, config.trials)
        report = ErrorReport(
            type_one=failures_p / config.trials,
            type_two=failures_q / config.trials,
            half_width=half_width,
            trials=config.trials,
            n=config.n,
        )
        if self.logger.isEnabledFor(logging.DEBUG):
            self.log(str(report), "DEBUG")
        return report

    def find_sample_size(
        self,
        p: DistributionLike,
        q: DistributionLike,
        channel: Channel,
        target: float = TARGET_ERROR,
        trials: int = DEFAULT_TRIALS,
        seed: int = DEFAULT_SEED
    ) -> int:
        """
        Smallest n whose empirical error sum plus its Wilson margin is at most target.

        Doubles n until the criterion holds, then binary searches the last
        doubling interval. Every evaluation reuses the same seed.

        Raises:
            ZeroDivergenceError: If d_h^2(Tp, Tq) = 0
            LdpOptError: If no n up to MAX_SAMPLE_SIZE qualifies
        """
        a, b = check_pair(p, q)
        pair = (Distribution(a), Distribution(b))
        tp, tq = channel.matrix @ a, channel.matrix @ b
        if hellinger_sq(tp, tq) <= 0:
            raise ZeroDivergenceError()

        def passes(n: int) -> bool:
            report = self.run(ProtocolConfig(pair[0], pair[1], channel, n, trials, seed))
            return report.error_sum + report.half_width <= target

        high = 1
        while not passes(high):
            if high >= MAX_SAMPLE_SIZE:
                raise LdpOptError(f"no sample size up to {MAX_SAMPLE_SIZE} reaches error {target}")
            high = min(2 * high, MAX_SAMPLE_SIZE)
        low = high // 2
        while high - low > 1:
            middle = (low + high) // 2
            if passes(middle):
                high = middle
            else:
                low = middle
        self.log(f"sample size {high} reaches error target {target}")
        return high

    def get_statistics(self) -> Dict:
        """
        Get simulation statistics.

        Returns:
            Dictionary with run counts and throughput
        """
        elapsed = (datetime.now() - self.start_time).total_seconds()
        return {
            "total_runs": self.total_runs,
            "total_trials": self.total_trials,
            "threads": self.threads,
            "elapsed_time": elapsed,
            "trials_per_second": (self.total_trials / elapsed) if elapsed > 0 else 0,
        }

    def reset_statistics(self) -> None:
        self.total_runs = 0
        self.total_trials = 0
        self.start_time = datetime.now()

    def __str__(self) -> str:
        stats = self.get_statistics()
        return f"ProtocolSimulator(runs={stats['total_runs']}, trials={stats['total_trials']}, threads={self.threads})"


def run_protocol(config: ProtocolConfig, threads: Optional[int] = None) -> ErrorReport:
    return ProtocolSimulator(threads).run(config)


def find_sample_size(
    p: DistributionLike,
    q: DistributionLike,
    channel: Channel,
    target: float = TARGET_ERROR,
    trials: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    threads: Optional[int] = None
) -> int:
    return ProtocolSimulator(threads).find_sample_size(p, q, channel, target, trials, seed)


def exact_binary_error(p: DistributionLike, q: DistributionLike, channel: Channel, n: int) -> Tuple[float, float]:
    """
    Exact type-I and type-II errors of the likelihood-ratio test for a binary-output channel.

    The count of output 1 is binomial under each hypothesis, and the test
    decision depends only on that count.

    Returns:
        (type-I error, type-II error)
    """
    if channel.output_size != 2:
        raise DimensionMismatchError(f"exact oracle needs a binary-output channel, got {channel.output_size} outputs")
    a, b = check_pair(p, q)
    tp, tq = channel.matrix @ a, channel.matrix @ b
    ones = np.arange(n + 1)
    counts = np.stack([n - ones, ones], axis=-1)
    decisions = decide_p(counts, tp, tq)
    type_one = float(binom.pmf(ones[~decisions], n, tp[1]).sum())
    type_two = float(binom.pmf(ones[decisions], n, tq[1]).sum())
    return type_one, type_two
