"""
Unit tests for the verification runner and its report.
"""

import unittest

from src.verification import (
    QUICK_SIZES,
    SUITES,
    SuiteResult,
    VerificationRunner,
    format_suite,
    generate_verification_report,
    summarize,
)
from src.settings import VERIFY_SUITES


class TestSuiteResult(unittest.TestCase):
    """Test check bookkeeping."""

    def test_empty_result_does_not_pass(self):
        """Test a suite with no checks is not a pass."""
        self.assertFalse(SuiteResult("sdpi").passed)

    def test_failures_recorded(self):
        """Test failed checks keep their message."""
        result = SuiteResult("sdpi")
        self.assertTrue(result.check(True, "fine"))
        self.assertFalse(result.check(False, "broken"))
        self.assertEqual(result.checks, 2)
        self.assertEqual(result.failures, ["broken"])
        self.assertFalse(result.passed)


class TestVerificationRunner(unittest.TestCase):
    """Test quick runs of the cheaper suites."""

    def setUp(self):
        """Create a quick single-threaded runner."""
        self.runner = VerificationRunner(seed=7, threads=1, quick=True)

    def test_registry(self):
        """Test every named suite has an implementation and quick sizes."""
        self.assertEqual(set(SUITES), set(VERIFY_SUITES))
        self.assertEqual(set(QUICK_SIZES), set(VERIFY_SUITES))

    def test_worst_case_suite(self):
        """Test the worst-case construction suite passes."""
        result = self.runner.run("worst-case", instances=5)
        self.assertGreater(result.checks, 0)
        self.assertTrue(result.passed, result.failures)

    def test_extreme_comm_suite(self):
        """Test the threshold/witness dichotomy suite passes."""
        result = self.runner.run("extreme-comm", pairs=2, max_k=4)
        self.assertTrue(result.passed, result.failures)

    def test_polytope_suite(self):
        """Test the polytope structure suite passes."""
        result = self.runner.run("polytope", compositions=10)
        self.assertTrue(result.passed, result.failures)

    def test_unknown_suite(self):
        """Test unknown names raise KeyError."""
        with self.assertRaises(KeyError):
            self.runner.run("nonsense")

    def test_all_passed_tracks_results(self):
        """Test all_passed needs at least one result."""
        self.assertFalse(self.runner.all_passed)
        self.runner.run("worst-case", instances=3)
        self.assertTrue(self.runner.all_passed)


class TestReport(unittest.TestCase):
    """Test report formatting."""

    def setUp(self):
        """Create one passing and one failing result."""
        self.passing = SuiteResult("sdpi", checks=10, elapsed=1.5, details={"worst_gap": 1e-13})
        self.failing = SuiteResult("sim", checks=8, failures=[f"instance {i}" for i in range(7)])

    def test_summary(self):
        """Test aggregated totals."""
        summary = summarize([self.passing, self.failing])
        self.assertEqual(summary["suites"], 2)
        self.assertEqual(summary["suites_passed"], 1)
        self.assertEqual(summary["checks"], 18)
        self.assertEqual(summary["failures"], 7)

    def test_failure_listing_is_truncated(self):
        """Test only the first failures are listed."""
        text = format_suite(self.failing, max_failures=5)
        self.assertIn("! instance 4", text)
        self.assertNotIn("! instance 5", text)
        self.assertIn("2 more failures", text)

    def test_details_shown(self):
        """Test measurements appear under the suite line."""
        self.assertIn("worst_gap: 1e-13", format_suite(self.passing))

    def test_conclusion(self):
        """Test the conclusion reflects the verdicts."""
        self.assertIn("All properties verified.", generate_verification_report([self.passing], 3))
        report = generate_verification_report([self.passing, self.failing], 3)
        self.assertIn("Verification FAILED.", report)
        self.assertIn("VERIFICATION REPORT (seed 3)", report)


if __name__ == "__main__":
    unittest.main()
