"""
Verification batteries for the structural and numerical guarantees of the toolkit.

Each suite draws its instances from a Philox stream keyed by the seed and
records one check per property instance. Default sizes are the acceptance
sizes; QUICK_SIZES shrinks them for smoke runs and tests.
"""

import math
import time
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.channels.ldp import LpFamily, membership, random_member, randomized_response, sldp_family
from src.channels.polytope import (
    extreme_points_catalog,
    free_entries_per_column,
    unique_column_bound,
    unique_column_count,
    vertex_enumeration,
)
from src.channels.threshold import is_threshold, non_extremality_witness
from src.constructions.closed_forms import (
    approx_ldp_channel,
    approx_ldp_sample_complexity_law,
    binary_pair,
    rr_tv_contraction,
    sdpi_binary,
    worst_case_pair,
)
from src.constructions.complexity import complexity_curve, estimate_sample_complexity, parse_eps_grid
from src.constructions.reduction import free_privacy_channel
from src.errors import IsThresholdError, LdpOptError
from src.log import get_logger
from src.models.distributions import Channel, Distribution, canonicalize, compose
from src.models.divergences import hellinger_sq, tv
from src.optimization.optimizer import maximize_private
from src.optimization.oracle import CommConstraint, oracle_random_search
from src.simulation.protocol_simulator import ProtocolConfig, ProtocolSimulator, exact_binary_error
from src.settings import DEFAULT_SEED, VERIFY_SUITES, get_reference_pair, resolve_threads

# Reduced sizes for `verify --quick` and the test-suite
QUICK_SIZES: Dict[str, Dict[str, int]] = {
    "extreme-comm": {"pairs": 3},
    "extreme-ldp": {"pairs": 4, "trials": 500},
    "sdpi": {"instances": 200, "pairs": 5, "trials": 500},
    "free-privacy": {"pairs": 5},
    "sim": {"instances": 4, "trials": 2000},
    "worst-case": {"instances": 20},
    "approx-ldp": {"instances": 50, "pairs": 3},
    "polytope": {"compositions": 50},
    "stagnation": {"points": 60},
}


@dataclass
class SuiteResult:
    """
    Outcome of one verification suite.

    Attributes:
        name: Suite name (a key of VERIFY_SUITES)
        checks: Number of property instances checked
        failures: One message per failed instance
        details: Extra measurements reported alongside the verdict
        elapsed: Wall-clock seconds
    """

    name: str
    checks: int = 0
    failures: List[str] = field(default_factory=list)
    details: Dict[str, float] = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.checks > 0 and not self.failures

    def check(self, ok: bool, message: str) -> bool:
        self.checks += 1
        if not ok:
            self.failures.append(message)
        return ok

    def __str__(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {verdict} ({self.checks - len(self.failures)}/{self.checks} checks, {self.elapsed:.1f}s)"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _random_pair(rng: np.random.Generator, k: int) -> Tuple[np.ndarray, np.ndarray]:
    return rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))


def suite_extreme_comm(result: SuiteResult, seed: int, threads: int, pairs: int = 20, max_k: int = 5) -> None:
    """Every deterministic non-threshold map into [2] gets a verified witness; threshold maps get none."""
    rng = _rng(seed)
    for k in range(3, max_k + 1):
        for index in range(pairs):
            canon = canonicalize(*_random_pair(rng, k))
            p, q, order = canon.p, canon.q, canon.order
            for labels in product(range(2), repeat=canon.k):
                channel = Channel.deterministic(labels, 2)
                tag = f"k={k} pair={index} labels={labels}"
                if is_threshold(channel, order):
                    try:
                        non_extremality_witness(channel, p, q)
                        result.check(False, f"{tag}: witness built for a threshold channel")
                    except IsThresholdError:
                        result.check(True, tag)
                    continue
                try:
                    witness = non_extremality_witness(channel, p, q)
                except LdpOptError as e:
                    result.check(False, f"{tag}: {e}")
                    continue
                result.check(witness.verify(channel, p, q), f"{tag}: residual {witness.residual(channel, p, q):.3g}")


def suite_extreme_ldp(
    result: SuiteResult,
    seed: int,
    threads: int,
    pairs: int = 50,
    trials: int = 10000,
    max_k: int = 5
) -> None:
    """maximize_private is never beaten by random search over the same pure LDP family."""
    rng = _rng(seed)
    worst_gap = 0.0
    for index in range(pairs):
        k = int(rng.integers(2, max_k + 1))
        p, q = _random_pair(rng, k)
        for eps in (1.0, math.log(10.0)):
            family = LpFamily.pure(k, 2, eps)
            exact = maximize_private(p, q, family, threads=threads).value
            sampled = oracle_random_search(p, q, family, trials=trials, seed=seed + index)
            worst_gap = max(worst_gap, sampled - exact)
            result.check(exact >= sampled - 1e-6, f"pair {index} k={k} eps={eps:.3g}: {exact:.9g} < {sampled:.9g}")
    result.details["max_oracle_excess"] = worst_gap


def suite_sdpi(
    result: SuiteResult,
    seed: int,
    threads: int,
    instances: int = 10000,
    pairs: int = 100,
    trials: int = 10000
) -> None:
    """Binary RR contracts TV by tanh(eps/2) exactly and is the argmax over 2x2 LDP channels."""
    rng = _rng(seed)
    for index in range(instances):
        p, q = _random_pair(rng, 2)
        eps = float(rng.uniform(0.0, 10.0))
        rr = randomized_response(2, eps).matrix
        left = tv(rr @ p, rr @ q)
        right = tv(p, q) * rr_tv_contraction(eps)
        result.check(abs(left - right) <= 1e-12, f"tv instance {index}: {left!r} vs {right!r}")

    worst_gap = 0.0
    for index in range(pairs):
        p, q = _random_pair(rng, 2)
        for eps in (0.1, 1.0, math.log(10.0), 10.0):
            _, closed = sdpi_binary(p, q, eps)
            sampled = oracle_random_search(p, q, LpFamily.pure(2, 2, eps), trials=trials, seed=seed + index)
            worst_gap = max(worst_gap, sampled - closed)
            result.check(sampled <= closed + 1e-6, f"argmax pair {index} eps={eps:.3g}: {sampled:.9g} > {closed:.9g}")
    result.details["max_oracle_excess"] = worst_gap


def suite_free_privacy(
    result: SuiteResult,
    seed: int,
    threads: int,
    pairs: int = 20,
    max_k: int = 16,
    retention: float = 1.0 / 64.0
) -> None:
    """Once e^eps >= (1/d_h^2) log(1/d_h^2) the free-privacy channel keeps a constant share of d_h^2."""
    rng = _rng(seed)
    worst = math.inf
    for index in range(pairs):
        k = int(rng.integers(2, max_k + 1))
        p = rng.dirichlet(np.ones(k))
        if index % 2:
            q = rng.dirichlet(np.ones(k))
        else:
            # comparable pair: every likelihood ratio near 1
            q = p * np.exp(0.3 * rng.standard_normal(k))
            q /= q.sum()
        h2 = hellinger_sq(p, q)
        eps = max(1.5, math.log(max(math.e, (1.0 / h2) * max(1.0, math.log(1.0 / h2)))))
        channel = free_privacy_channel(p, q, eps)
        kept = hellinger_sq(channel.matrix @ p, channel.matrix @ q)
        worst = min(worst, kept / h2)
        result.check(kept >= retention * h2, f"pair {index} k={k} eps={eps:.3g}: kept {kept / h2:.3g} of d_h^2")
    result.details["min_retained_fraction"] = worst


def suite_sim(result: SuiteResult, seed: int, threads: int, instances: int = 20, trials: int = 10000) -> None:
    """Errors vanish at n = 32 / d_h^2(Tp, Tq) and binary-output runs agree with the binomial oracle."""
    rng = _rng(seed)
    simulator = ProtocolSimulator(threads)
    for index in range(instances):
        k = int(rng.integers(2, 5))
        p, q = _random_pair(rng, k)
        eps = float(rng.uniform(0.5, 3.0))
        channel = randomized_response(k, eps)
        h2 = hellinger_sq(channel.matrix @ p, channel.matrix @ q)
        n = int(math.ceil(32.0 / h2))
        config = ProtocolConfig(Distribution(p), Distribution(q), channel, n, trials, seed + index)
        report = simulator.run(config)
        result.check(report.error_sum <= 0.1, f"instance {index} n={n}: error {report.error_sum:.4f}")

        binary = randomized_response(2, eps)
        h2b = 0.0
        while h2b < 1e-3:
            pb, qb = _random_pair(rng, 2)
            h2b = hellinger_sq(binary.matrix @ pb, binary.matrix @ qb)
        nb = max(1, int(math.ceil(1.0 / h2b)))
        simulated = simulator.run(ProtocolConfig(Distribution(pb), Distribution(qb), binary, nb, trials, seed + index))
        type_one, type_two = exact_binary_error(pb, qb, binary, nb)
        spread = math.sqrt((type_one * (1 - type_one) + type_two * (1 - type_two)) / trials)
        gap = abs(simulated.error_sum - (type_one + type_two))
        result.check(gap <= 3.0 * spread + 1.0 / trials, f"exact instance {index} n={nb}: gap {gap:.4f} vs se {spread:.4f}")
    result.details["simulated_trials"] = float(simulator.get_statistics()["total_trials"])


def suite_worst_case(result: SuiteResult, seed: int, threads: int, instances: int = 200) -> None:
    """The worst-case ternary pair hits (rho, nu) to 1e-9 / 1e-12."""
    rng = _rng(seed)
    for index in range(instances):
        nu = float(10 ** rng.uniform(-5.0, math.log10(0.45)))
        rho = float(rng.uniform(2 * nu * nu, nu))
        p, q = worst_case_pair(rho, nu)
        tv_gap = abs(tv(p, q) - nu)
        h2_gap = abs(hellinger_sq(p, q) - rho)
        result.check(tv_gap <= 1e-12 and h2_gap <= 1e-9, f"rho={rho:.3g} nu={nu:.3g}: gaps {tv_gap:.2g}, {h2_gap:.2g}")


def suite_approx_ldp(result: SuiteResult, seed: int, threads: int, instances: int = 1000, pairs: int = 20) -> None:
    """The delta-leak augmentation mixes divergences exactly and matches the min-form bound for binary pairs."""
    rng = _rng(seed)
    for index in range(instances):
        k = int(rng.integers(2, 6))
        p, q = _random_pair(rng, k)
        eps, delta = float(rng.uniform(0.1, 5.0)), float(rng.uniform(0.0, 1.0))
        base = Channel(random_member(LpFamily.pure(k, 2, eps), rng))
        channel = approx_ldp_channel(p, q, eps, delta, base=base)
        left = hellinger_sq(channel.matrix @ p, channel.matrix @ q)
        right = (1 - delta) * hellinger_sq(base.matrix @ p, base.matrix @ q) + delta * hellinger_sq(p, q)
        result.check(abs(left - right) <= 1e-12, f"identity instance {index}: {left!r} vs {right!r}")

    for index in range(pairs):
        p, q = _random_pair(rng, 2)
        eps, delta = float(rng.uniform(0.1, 5.0)), float(rng.uniform(0.01, 0.99))
        channel = approx_ldp_channel(p, q, eps, delta)
        n_hat = 1.0 / hellinger_sq(channel.matrix @ p, channel.matrix @ q)
        _, private = sdpi_binary(p, q, eps)
        law = approx_ldp_sample_complexity_law(1.0 / private, 1.0 / hellinger_sq(p, q), delta)
        result.check(law / 8 <= n_hat <= 8 * law, f"binary pair {index}: n_hat {n_hat:.4g} vs law {law:.4g}")


def suite_polytope(result: SuiteResult, seed: int, threads: int, compositions: int = 1000) -> None:
    """Vertices have at most one free entry per column and few distinct columns; families absorb pre-processing."""
    families = [LpFamily.pure(k, l, eps)
                for (k, l) in ((2, 2), (3, 2), (4, 2), (5, 2), (2, 3), (3, 3), (4, 3), (3, 4))
                for eps in (0.5, math.log(3.0))]
    families.append(sldp_family(3, 2, 1.0, 0.1))
    for family in families:
        vertices = vertex_enumeration(family)
        bound = unique_column_bound(family.l)
        for vertex in vertices:
            tag = f"{family} vertex"
            result.check(membership(family, vertex, 1e-9), f"{tag} outside family")
            result.check(int(free_entries_per_column(vertex).max()) <= 1, f"{tag} has a column with two free entries")
            result.check(unique_column_count(vertex) <= bound, f"{tag} exceeds {bound} unique columns")
        if family.l == 2 and family.pure_gamma() is not None:
            catalog = list(extreme_points_catalog(family))
            matched = all(any(np.max(np.abs(c.matrix - v.matrix)) <= 1e-7 for v in vertices) for c in catalog)
            result.check(matched and len(catalog) == len(vertices), f"{family}: catalog differs from enumeration")

    rng = _rng(seed)
    for index in range(compositions):
        k0, k, l = (int(x) for x in rng.integers(2, 6, size=3))
        eps = float(rng.uniform(0.1, 3.0))
        family = LpFamily.pure(k, l, eps)
        outer = Channel(random_member(family, rng))
        inner = Channel(CommConstraint(k0, k).random_batch(rng, 1)[0])
        composed = compose(outer, inner)
        result.check(membership(family.resized(k0), composed, 1e-9), f"composition {index} left the family")


def suite_stagnation(result: SuiteResult, seed: int, threads: int, points: int = 60) -> None:
    """Stagnation at 1/d_TV^2 for the ternary pair versus free privacy for the binary pair."""
    rho, nu = get_reference_pair("stagnation")
    binary = binary_pair(rho, nu)
    at_threshold = estimate_sample_complexity(*binary, math.log(100.0 * rho / (nu * nu)))
    result.details["binary_n_hat_at_threshold"] = at_threshold.n_hat
    result.check(at_threshold.n_hat <= 10.0 / rho, f"binary pair at e^eps = 100 rho/nu^2: {at_threshold.n_hat:.4g}")

    curve = complexity_curve(*worst_case_pair(rho, nu), parse_eps_grid(f"log:1,1e10,{points}"), threads=threads)
    for point in curve:
        e_eps = point.e_eps
        if 10.0 <= e_eps <= 1e5:
            ratio = point.n_hat * nu * nu
            result.check(0.1 <= ratio <= 10.0, f"plateau at e^eps={e_eps:.3g}: n_hat {point.n_hat:.4g}")
        if e_eps < 0.1 / rho:
            result.check(point.n_hat > 10.0 / rho, f"early free privacy at e^eps={e_eps:.3g}: n_hat {point.n_hat:.4g}")
    last = curve[-1]
    result.details["ternary_n_hat_at_max_eps"] = last.n_hat
    result.check(last.n_hat <= 10.0 / rho, f"no free privacy at e^eps={last.e_eps:.3g}: n_hat {last.n_hat:.4g}")


SUITES: Dict[str, Callable[..., None]] = {
    "extreme-comm": suite_extreme_comm,
    "extreme-ldp": suite_extreme_ldp,
    "sdpi": suite_sdpi,
    "free-privacy": suite_free_privacy,
    "sim": suite_sim,
    "worst-case": suite_worst_case,
    "approx-ldp": suite_approx_ldp,
    "polytope": suite_polytope,
    "stagnation": suite_stagnation,
}


class VerificationRunner:
    """
    Runs named suites and keeps their results.

    Attributes:
        seed: Base seed for every suite
        threads: Worker cap passed to the searches and the simulator
        quick: Use QUICK_SIZES instead of the acceptance sizes
        results: Results in run order
    """

    def __init__(self, seed: int = DEFAULT_SEED, threads: Optional[int] = None, quick: bool = False):
        self.seed = seed
        self.threads = resolve_threads(threads)
        self.quick = quick
        self.results: List[SuiteResult] = []
        self.logger = get_logger("verification")

    def log(self, message: str, level: str = "INFO") -> None:
        log_func = getattr(self.logger, level.lower(), self.logger.info)
        log_func(message)

    def run(self, name: str, **sizes) -> SuiteResult:
        """
        Run one suite.

        Args:
            name: Key of VERIFY_SUITES
            **sizes: Overrides of the suite's size parameters

        Raises:
            KeyError: For an unknown suite name
        """
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; choose from {', '.join(VERIFY_SUITES)}")
        params = dict(QUICK_SIZES.get(name, {})) if self.quick else {}
        params.update(sizes)

        self.log(f"running {name}: {VERIFY_SUITES[name]}")
        result = SuiteResult(name)
        start = time.perf_counter()
        try:
            SUITES[name](result, self.seed, self.threads, **params)
        except LdpOptError as e:
            result.check(False, f"suite aborted: {e}")
        result.elapsed = time.perf_counter() - start

        self.log(str(result), "INFO" if result.passed else "WARNING")
        for message in result.failures[:5]:
            self.log(f"  {message}", "DEBUG")
        self.results.append(result)
        return result

    def run_all(self, names: Optional[List[str]] = None) -> List[SuiteResult]:
        return [self.run(name) for name in (names or list(SUITES))]

    @property
    def all_passed(self) -> bool:
        return bool(self.results) and all(result.passed for result in self.results)
