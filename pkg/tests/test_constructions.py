"""
Unit tests for closed-form constructions, the reduction and sample-complexity curves.
"""

import math
import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from src.channels.ldp import LpFamily, approx_binary_family, membership
from src.constructions.closed_forms import (
    approx_ldp_channel,
    approx_ldp_sample_complexity_law,
    binary_pair,
    binary_sample_complexity_law,
    minimax_channel,
    minimax_upper_bound_law,
    rr_binary_parameter,
    rr_tv_contraction,
    sdpi_binary,
    worst_case_pair,
    worst_case_sample_complexity_law,
)
from src.constructions.complexity import (
    SampleComplexityEstimate,
    complexity_curve,
    curve_slope,
    estimate_sample_complexity,
    free_privacy_threshold,
    parse_eps_grid,
)
from src.constructions.reduction import (
    comparable_split,
    free_privacy_channel,
    free_privacy_size,
    reduce_channel,
)
from src.errors import AdmissibilityError, DimensionMismatchError
from src.models.distributions import Channel, apply
from src.models.divergences import hellinger_sq, tv
from src.optimization.optimizer import maximize_private
from src.settings import get_reference_pair


class TestRandomizedResponseForms(unittest.TestCase):
    """Test binary randomized response identities."""

    def test_parameter(self):
        """Test eps = 0 gives a fair coin and the map is affine in x."""
        self.assertAlmostEqual(rr_binary_parameter(0.3, 0.0), 0.5, places=15)
        self.assertAlmostEqual(rr_binary_parameter(1.0, math.log(3.0)), 0.75, places=15)

    def test_contraction(self):
        """Test the TV contraction of RR(2, ln 3) is one half."""
        self.assertAlmostEqual(rr_tv_contraction(math.log(3.0)), 0.5, places=15)

    def test_sdpi_total_variation(self):
        """Test randomized response scales TV by its contraction factor."""
        p, q = [0.3, 0.7], [0.6, 0.4]
        for eps in (0.2, 1.0, 4.0):
            channel, value = sdpi_binary(p, q, eps)
            tp, tq = apply(channel, p), apply(channel, q)
            self.assertAlmostEqual(tv(tp, tq), rr_tv_contraction(eps) * tv(p, q), places=14)
            self.assertAlmostEqual(value, hellinger_sq(tp, tq), places=15)

    def test_sdpi_needs_binary_pair(self):
        """Test ternary pairs are refused."""
        with self.assertRaises(DimensionMismatchError):
            sdpi_binary([0.2, 0.3, 0.5], [0.5, 0.3, 0.2], 1.0)


class TestPairs(unittest.TestCase):
    """Test pairs with prescribed Hellinger divergence and total variation."""

    def test_worst_case_pair(self):
        """Test the ternary pair hits both targets."""
        rho, nu = get_reference_pair("moderate")
        p, q = worst_case_pair(rho, nu)
        self.assertEqual(p.probs[0], 0.0)
        self.assertAlmostEqual(tv(p, q), nu, places=14)
        self.assertAlmostEqual(hellinger_sq(p, q), rho, delta=1e-12)

    def test_worst_case_pair_small_values(self):
        """Test precision on the smallest reference pair."""
        rho, nu = get_reference_pair("stagnation")
        p, q = worst_case_pair(rho, nu)
        self.assertAlmostEqual(hellinger_sq(p, q) / rho, 1.0, places=6)

    def test_worst_case_region(self):
        """Test targets outside 2 nu^2 <= rho <= nu are refused."""
        for rho, nu in ((0.2, 0.1), (0.001, 0.1), (0.1, 0.6)):
            with self.assertRaises(AdmissibilityError):
                worst_case_pair(rho, nu)

    def test_ternary_optimum_band(self):
        """Test the l = 3 optimum stays within [1/64, 64] of max(nu^2, e^eps rho^2) for e <= e^eps <= 1/rho."""
        for rho, nu in ((1e-8, 1e-5), (1e-4, 1e-3), (2e-4, 1e-2)):
            p, q = worst_case_pair(rho, nu)
            for e_eps in (math.e, 1e2, 1e4, 1e6, 1.0 / rho):
                if e_eps > 1.0 / rho:
                    continue
                value = maximize_private(p, q, LpFamily.pure(3, 3, math.log(e_eps))).value
                ratio = value / max(nu * nu, e_eps * rho * rho)
                self.assertGreaterEqual(ratio, 1.0 / 64.0)
                self.assertLessEqual(ratio, 64.0)

    def test_binary_pair(self):
        """Test Ber(a), Ber(a + nu) with the requested divergence."""
        p, q = binary_pair(0.05, 0.1)
        self.assertAlmostEqual(tv(p, q), 0.1, places=14)
        self.assertAlmostEqual(hellinger_sq(p, q), 0.05, delta=1e-12)

    def test_binary_pair_unreachable(self):
        """Test divergences outside the reachable band are refused."""
        with self.assertRaises(AdmissibilityError):
            binary_pair(0.5, 0.1)


class TestPrivateChannels(unittest.TestCase):
    """Test the minimax and approximate-LDP channels."""

    def setUp(self):
        """Create a four-element pair."""
        self.p = np.array([0.1, 0.2, 0.3, 0.4])
        self.q = np.array([0.4, 0.3, 0.2, 0.1])

    def test_minimax_is_private(self):
        """Test the minimax channel is eps-LDP with binary output."""
        channel = minimax_channel(self.p, self.q, 1.0)
        self.assertEqual(channel.output_size, 2)
        self.assertTrue(membership(LpFamily.pure(4, 2, 1.0), channel, 1e-12))

    def test_minimax_not_above_optimum(self):
        """Test the minimax channel never beats the exact optimum."""
        channel = minimax_channel(self.p, self.q, 1.0)
        value = hellinger_sq(apply(channel, self.p), apply(channel, self.q))
        best = maximize_private(self.p, self.q, LpFamily.pure(4, 2, 1.0)).value
        self.assertLessEqual(value, best + 1e-12)

    def test_minimax_meets_upper_bound_law(self):
        """Test the minimax channel reaches 1/64 of the inverse three-regime law on worst-case pairs."""
        for rho, nu in ((1e-8, 1e-5), (1e-4, 1e-3), (1e-3, 1e-2), (2e-4, 1e-2)):
            p, q = worst_case_pair(rho, nu)
            for eps in (0.25, 1.0, 3.0, 8.0, 15.0, 25.0):
                channel = minimax_channel(p, q, eps)
                value = hellinger_sq(apply(channel, p), apply(channel, q))
                self.assertGreaterEqual(value * minimax_upper_bound_law(nu, rho, eps), 1.0 / 64.0)

    def test_minimax_needs_positive_eps(self):
        """Test eps = 0 is refused."""
        with self.assertRaises(AdmissibilityError):
            minimax_channel(self.p, self.q, 0.0)

    def test_approx_ldp_divergence_split(self):
        """Test the leak block adds delta d_h^2(p, q)."""
        base = maximize_private(self.p, self.q, LpFamily.pure(4, 2, 1.0)).channel
        delta = 0.05
        channel = approx_ldp_channel(self.p, self.q, 1.0, delta, base=base)
        self.assertEqual(channel.output_size, 8)
        expected = (1 - delta) * hellinger_sq(apply(base, self.p), apply(base, self.q)) + delta * hellinger_sq(self.p, self.q)
        actual = hellinger_sq(apply(channel, self.p), apply(channel, self.q))
        self.assertAlmostEqual(actual, expected, places=14)

    def test_approx_ldp_binary_input(self):
        """Test a binary pair gets 2 + 2 outputs."""
        channel = approx_ldp_channel([0.3, 0.7], [0.6, 0.4], 1.0, 0.1)
        self.assertEqual(channel.output_size, 4)
        assert_allclose(channel.matrix.sum(axis=0), 1.0)

    def test_approx_ldp_rejects_delta(self):
        """Test delta must lie in [0, 1]."""
        with self.assertRaises(AdmissibilityError):
            approx_ldp_channel(self.p, self.q, 1.0, 1.5)

    def test_approx_binary_family_not_above_augmentation(self):
        """Test the augmented channel is at least the binary (eps, delta) optimum up to a constant."""
        delta = 0.1
        binary = maximize_private(self.p, self.q, approx_binary_family(4, 1.0, delta)).value
        augmented = approx_ldp_channel(self.p, self.q, 1.0, delta)
        value = hellinger_sq(apply(augmented, self.p), apply(augmented, self.q))
        self.assertGreaterEqual(value * 8.0, binary)


class TestLaws(unittest.TestCase):
    """Test the piecewise sample-complexity laws."""

    def test_binary_law_regimes(self):
        """Test the three regimes of the binary law."""
        self.assertAlmostEqual(binary_sample_complexity_law(0.1, 0.01, 0.5), 400.0)
        self.assertAlmostEqual(binary_sample_complexity_law(0.1, 0.5, math.log(10.0)), 10.0)
        self.assertAlmostEqual(binary_sample_complexity_law(0.1, 0.02, math.log(10.0)), 50.0)
        self.assertEqual(binary_sample_complexity_law(0.1, 0.01, 0.0), math.inf)

    def test_worst_case_law(self):
        """Test the stagnation at 1 / nu^2 and the final 1 / rho."""
        self.assertAlmostEqual(worst_case_sample_complexity_law(1e-5, 1e-8, math.log(1e4)) / 1e10, 1.0, places=12)
        self.assertAlmostEqual(worst_case_sample_complexity_law(1e-5, 1e-8, math.log(1e9)) / 1e8, 1.0, places=12)

    def test_approx_law(self):
        """Test both ends of the delta range."""
        self.assertEqual(approx_ldp_sample_complexity_law(100.0, 10.0, 0.0), 100.0)
        self.assertEqual(approx_ldp_sample_complexity_law(100.0, 10.0, 1.0), 10.0)
        self.assertAlmostEqual(approx_ldp_sample_complexity_law(100.0, 10.0, 0.5), 20.0)


class TestReduction(unittest.TestCase):
    """Test the small-alphabet reduction and the free-privacy channel."""

    def test_comparable_split(self):
        """Test elements are split by ratio around one."""
        split = comparable_split([0.3, 0.3, 0.2, 0.2], [0.2, 0.2, 0.3, 0.3])
        self.assertEqual(split.upper, (0, 1))
        self.assertEqual(split.lower, (2, 3))
        self.assertAlmostEqual(split.tau, hellinger_sq([0.3, 0.3, 0.2, 0.2], [0.2, 0.2, 0.3, 0.3]))

    def test_identity_branch(self):
        """Test small alphabets are padded with empty outputs."""
        reduction = reduce_channel([0.2, 0.3, 0.5], [0.3, 0.3, 0.4], 4)
        self.assertEqual(reduction.branch, "identity")
        self.assertEqual(reduction.channel.output_size, 4)
        assert_array_equal(reduction.channel.matrix[3], [0.0, 0.0, 0.0])

    def test_binary_branch(self):
        """Test pairs without comparable mass fall back to a binary threshold."""
        reduction = reduce_channel([0.8, 0.15, 0.05], [0.05, 0.15, 0.8], 2)
        self.assertEqual(reduction.branch, "binary")
        self.assertEqual(reduction.channel.output_size, 2)

    def test_bucket_branch(self):
        """Test dyadic buckets keep the comparable contribution."""
        p, q = [0.3, 0.3, 0.2, 0.2], [0.2, 0.2, 0.3, 0.3]
        reduction = reduce_channel(p, q, 3)
        self.assertEqual(reduction.branch, "buckets")
        assert_array_equal(reduction.channel.labels(), [0, 0, 1, 1])
        kept = hellinger_sq(apply(reduction.channel, p), apply(reduction.channel, q))
        self.assertAlmostEqual(kept, hellinger_sq(p, q), places=14)

    def test_rejects_single_output(self):
        """Test l must be at least two."""
        with self.assertRaises(AdmissibilityError):
            reduce_channel([0.5, 0.5], [0.2, 0.8], 1)

    def test_free_privacy_size(self):
        """Test the output size is capped by k and by e^eps."""
        self.assertEqual(free_privacy_size(0.01, 10, math.log(1000.0)), 7)
        self.assertEqual(free_privacy_size(0.01, 4, math.log(1000.0)), 4)
        self.assertEqual(free_privacy_size(0.01, 10, math.log(3.5)), 3)

    def test_free_privacy_channel_is_private(self):
        """Test the composed channel is eps-LDP."""
        rng = np.random.Generator(np.random.Philox(key=8))
        p, q = rng.dirichlet(np.ones(12)), rng.dirichlet(np.ones(12))
        eps = math.log(200.0)
        channel = free_privacy_channel(p, q, eps)
        self.assertTrue(membership(LpFamily.pure(12, channel.output_size, eps), channel, 1e-9))

    def test_free_privacy_needs_large_eps(self):
        """Test eps <= 1 is refused."""
        with self.assertRaises(AdmissibilityError):
            free_privacy_channel([0.5, 0.5], [0.2, 0.8], 1.0)


class TestComplexity(unittest.TestCase):
    """Test sample-complexity estimates and curves."""

    def test_parse_log_grid(self):
        """Test geometric grids in e^eps."""
        assert_allclose(parse_eps_grid("log:1,100,3"), [0.0, math.log(10.0), math.log(100.0)], atol=1e-14)

    def test_parse_list(self):
        """Test plain comma lists."""
        self.assertEqual(parse_eps_grid("0.5, 1,2"), [0.5, 1.0, 2.0])

    def test_parse_errors(self):
        """Test malformed grids are refused."""
        for spec in ("log:0,1,3", "log:1,2", "", "-1,2"):
            with self.assertRaises(ValueError):
                parse_eps_grid(spec)

    def test_binary_estimate(self):
        """Test binary pairs use randomized response."""
        estimate = estimate_sample_complexity([0.3, 0.7], [0.6, 0.4], 1.0)
        self.assertEqual(estimate.certificate, "rr-binary")
        self.assertAlmostEqual(estimate.n_hat, 1.0 / estimate.value)
        self.assertEqual(estimate_sample_complexity([0.3, 0.7], [0.6, 0.4], 0.0).n_hat, math.inf)

    def test_curve_order_and_threads(self):
        """Test the curve follows the grid regardless of workers."""
        p, q = [0.2, 0.3, 0.5], [0.5, 0.3, 0.2]
        grid = [2.0, 0.5, 1.0]
        single = complexity_curve(p, q, grid, threads=1)
        multi = complexity_curve(p, q, grid, threads=3)
        self.assertEqual([point.eps for point in multi], grid)
        self.assertEqual([point.value for point in single], [point.value for point in multi])

    def test_free_privacy_threshold(self):
        """Test the first grid point within the factor is reported."""
        curve = [SampleComplexityEstimate(eps, 2, 1.0 / n, Channel.identity(2), "x") for eps, n in ((1.0, 500.0), (2.0, 90.0), (3.0, 20.0))]
        self.assertEqual(free_privacy_threshold(curve, 10.0), 2.0)
        self.assertIsNone(free_privacy_threshold(curve, 1.0))

    def test_curve_slope(self):
        """Test n = 1 / eps^2 has slope -2."""
        curve = [SampleComplexityEstimate(eps, 2, eps * eps, Channel.identity(2), "x") for eps in (0.1, 0.2, 0.4, 0.8)]
        self.assertAlmostEqual(curve_slope(curve, 0.0, 1.0), -2.0, places=10)
        with self.assertRaises(ValueError):
            curve_slope(curve, 0.15, 0.3)

    def test_binary_reference_curve(self):
        """Test the binary reference pair at e^eps = 1e4."""
        rho, nu = get_reference_pair("stagnation")
        p, q = binary_pair(rho, nu)
        estimate = estimate_sample_complexity(p, q, math.log(1e4))
        self.assertGreater(estimate.n_hat, 0.9e8)
        self.assertLess(estimate.n_hat, 1.2e8)

    def test_worst_case_stagnation(self):
        """Test the ternary pair stays near 1 / nu^2 for moderate eps and reaches 1 / rho for huge eps."""
        rho, nu = get_reference_pair("stagnation")
        p, q = worst_case_pair(rho, nu)
        middle = estimate_sample_complexity(p, q, math.log(1e3))
        self.assertGreater(middle.n_hat, 0.9 / (nu * nu))
        self.assertLess(middle.n_hat, 2.0 / (nu * nu))
        final = estimate_sample_complexity(p, q, math.log(1e10))
        self.assertGreaterEqual(final.n_hat, 0.999 / rho)
        self.assertLess(final.n_hat, 2.0 / rho)


if __name__ == "__main__":
    unittest.main()
