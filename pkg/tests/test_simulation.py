"""
Unit tests for the protocol simulator.
"""

import math
import unittest
from unittest.mock import patch

import numpy as np

from src.channels.ldp import randomized_response
from src.errors import DimensionMismatchError, LdpOptError, ZeroDivergenceError
from src.models.distributions import Channel, Distribution
from src.models.divergences import hellinger_sq
from src.settings import WILSON_Z
from src.simulation import (
    ProtocolConfig,
    ProtocolSimulator,
    decide_p,
    exact_binary_error,
    find_sample_size,
    run_protocol,
    wilson_half_width,
)


class TestWilson(unittest.TestCase):
    """Test the Wilson half-width."""

    def test_zero_failures(self):
        """Test the interval stays open at zero failures."""
        z = WILSON_Z
        expected = z * (z / 200.0) / (1.0 + z * z / 100.0)
        self.assertAlmostEqual(wilson_half_width(0, 100), expected, places=15)

    def test_symmetry(self):
        """Test failures and successes give the same width."""
        self.assertAlmostEqual(wilson_half_width(13, 200), wilson_half_width(187, 200), places=15)

    def test_no_trials(self):
        """Test zero trials give an infinite width."""
        self.assertEqual(wilson_half_width(0, 0), math.inf)


class TestDecision(unittest.TestCase):
    """Test the likelihood-ratio decision rule."""

    def setUp(self):
        """Create privatized output distributions."""
        self.tp = np.array([0.5, 0.5])
        self.tq = np.array([0.2, 0.8])

    def test_statistic_sign(self):
        """Test counts favoring p and q."""
        decisions = decide_p(np.array([[3, 1], [0, 4]]), self.tp, self.tq)
        self.assertEqual(decisions.tolist(), [True, False])

    def test_ties_go_to_p(self):
        """Test a zero statistic decides p."""
        tp = np.array([0.4, 0.6])
        self.assertTrue(decide_p(np.array([2, 3]), tp, tp))

    def test_impossible_symbols(self):
        """Test a symbol impossible under p forces q and vice versa."""
        tp = np.array([0.5, 0.5, 0.0])
        tq = np.array([0.4, 0.4, 0.2])
        self.assertEqual(decide_p(np.array([[9, 0, 1], [9, 1, 0]]), tp, tq).tolist(), [False, True])
        self.assertTrue(decide_p(np.array([9, 0, 1]), tq, tp))


class TestProtocolSimulator(unittest.TestCase):
    """Test Monte Carlo runs and the sample-size search."""

    def setUp(self):
        """Create a binary pair and randomized response."""
        self.p = Distribution([0.7, 0.3])
        self.q = Distribution([0.4, 0.6])
        self.channel = randomized_response(2, 1.0)

    def test_thread_count_does_not_change_report(self):
        """Test one and three workers give identical reports."""
        config = ProtocolConfig(self.p, self.q, self.channel, n=40, trials=2500, seed=9)
        single = ProtocolSimulator(threads=1).run(config)
        multi = ProtocolSimulator(threads=3).run(config)
        self.assertEqual((single.type_one, single.type_two), (multi.type_one, multi.type_two))
        self.assertEqual(single.half_width, multi.half_width)

    def test_seed_changes_draws(self):
        """Test different seeds are independent streams."""
        first = run_protocol(ProtocolConfig(self.p, self.q, self.channel, n=40, trials=3000, seed=1))
        second = run_protocol(ProtocolConfig(self.p, self.q, self.channel, n=40, trials=3000, seed=2))
        self.assertNotEqual((first.type_one, first.type_two), (second.type_one, second.type_two))

    def test_matches_exact_errors(self):
        """Test simulated errors agree with the binomial computation."""
        trials = 20000
        report = run_protocol(ProtocolConfig(self.p, self.q, self.channel, n=50, trials=trials, seed=4), threads=2)
        exact_one, exact_two = exact_binary_error(self.p, self.q, self.channel, 50)
        for simulated, exact in ((report.type_one, exact_one), (report.type_two, exact_two)):
            margin = 4.0 * math.sqrt(exact * (1.0 - exact) / trials) + 1.0 / trials
            self.assertLessEqual(abs(simulated - exact), margin)

    def test_exact_single_sample(self):
        """Test the exact errors of one sample through the identity channel."""
        type_one, type_two = exact_binary_error([0.7, 0.3], [0.2, 0.8], Channel.identity(2), 1)
        self.assertAlmostEqual(type_one, 0.3, places=15)
        self.assertAlmostEqual(type_two, 0.2, places=15)

    def test_exact_needs_binary_output(self):
        """Test the exact oracle refuses wider channels."""
        with self.assertRaises(DimensionMismatchError):
            exact_binary_error([0.7, 0.3], [0.2, 0.8], Channel.deterministic([0, 2], 3), 5)

    def test_sample_size_is_smallest(self):
        """Test the returned n passes and n - 1 does not."""
        simulator = ProtocolSimulator(threads=2)
        n = simulator.find_sample_size(self.p, self.q, self.channel, target=0.2, trials=2000, seed=3)
        report = simulator.run(ProtocolConfig(self.p, self.q, self.channel, n, 2000, 3))
        self.assertLessEqual(report.error_sum + report.half_width, 0.2)
        if n > 1:
            previous = simulator.run(ProtocolConfig(self.p, self.q, self.channel, n - 1, 2000, 3))
            self.assertGreater(previous.error_sum + previous.half_width, 0.2)

    def test_sample_size_tracks_divergence(self):
        """Test n d_h^2(Tp, Tq) lands in [0.05, 40] at the default error target."""
        cases = (
            (self.p, self.q, self.channel),
            (Distribution([0.5, 0.5]), Distribution([0.2, 0.8]), Channel.identity(2)),
            (Distribution([0.2, 0.3, 0.5]), Distribution([0.3, 0.3, 0.4]), randomized_response(3, 2.0)),
        )
        simulator = ProtocolSimulator(threads=2)
        for p, q, channel in cases:
            n = simulator.find_sample_size(p, q, channel, trials=2000, seed=4)
            h2 = hellinger_sq(channel.matrix @ p.probs, channel.matrix @ q.probs)
            self.assertGreaterEqual(n * h2, 0.05)
            self.assertLessEqual(n * h2, 40.0)

    def test_sample_size_limit(self):
        """Test the search gives up once n passes the configured maximum."""
        with patch("src.simulation.protocol_simulator.MAX_SAMPLE_SIZE", 8):
            with self.assertRaises(LdpOptError):
                find_sample_size(self.p, self.q, self.channel, trials=500, seed=1)

    def test_zero_divergence(self):
        """Test a constant channel has no finite sample size."""
        with self.assertRaises(ZeroDivergenceError):
            find_sample_size(self.p, self.q, Channel.constant(2, 2, 0))

    def test_config_validation(self):
        """Test bad sizes and mismatched channels are refused."""
        with self.assertRaises(ValueError):
            ProtocolConfig(self.p, self.q, self.channel, n=0)
        with self.assertRaises(DimensionMismatchError):
            ProtocolConfig(self.p, self.q, Channel.identity(3), n=5)

    def test_statistics(self):
        """Test run counters and reset."""
        simulator = ProtocolSimulator(threads=1)
        simulator.run(ProtocolConfig(self.p, self.q, self.channel, n=10, trials=100))
        stats = simulator.get_statistics()
        self.assertEqual(stats["total_runs"], 1)
        self.assertEqual(stats["total_trials"], 200)
        simulator.reset_statistics()
        self.assertEqual(simulator.get_statistics()["total_runs"], 0)


if __name__ == "__main__":
    unittest.main()
