"""
Plain-text reports for verification runs.
"""

from typing import Dict, List, Sequence

from src.settings import VERIFY_SUITES
from src.verification.suites import SuiteResult


def summarize(results: Sequence[SuiteResult]) -> Dict:
    """
    Aggregate counts over suite results.

    Returns:
        Dictionary with suite and check totals
    """
    return {
        "suites": len(results),
        "suites_passed": sum(1 for result in results if result.passed),
        "checks": sum(result.checks for result in results),
        "failures": sum(len(result.failures) for result in results),
        "elapsed_seconds": sum(result.elapsed for result in results),
    }


def format_suite(result: SuiteResult, max_failures: int = 5) -> str:
    lines: List[str] = [
        f"{result.name:<16}{'PASS' if result.passed else 'FAIL':<8}"
        f"{result.checks - len(result.failures):>8}/{result.checks:<8}{result.elapsed:>8.1f}s",
        f"  {VERIFY_SUITES.get(result.name, '')}",
    ]
    for key, value in sorted(result.details.items()):
        lines.append(f"  {key}: {value:.6g}")
    for message in result.failures[:max_failures]:
        lines.append(f"  ! {message}")
    hidden = len(result.failures) - max_failures
    if hidden > 0:
        lines.append(f"  ! ... {hidden} more failures")
    return "\n".join(lines)


def generate_verification_report(results: Sequence[SuiteResult], seed: int) -> str:
    """
    Generate formatted verification report.

    Args:
        results: Suite results in run order
        seed: Seed the suites ran with

    Returns:
        Formatted report string
    """
    summary = summarize(results)
    body = "\n\n".join(format_suite(result) for result in results)
    passed = summary["suites_passed"] == summary["suites"] and summary["suites"] > 0

    report = f"""
{'='*70}
VERIFICATION REPORT (seed {seed})
{'='*70}

Suite           Verdict   Passed/Checks     Time
-----           -------   -------------     ----
{body}

{'='*70}
Suites passed: {summary['suites_passed']}/{summary['suites']}   Checks failed: {summary['failures']}/{summary['checks']}
CONCLUSION: {'All properties verified.' if passed else 'Verification FAILED.'}
{'='*70}
"""
    return report
