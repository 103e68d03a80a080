"""Verification package initialization."""

from src.verification.report import format_suite, generate_verification_report, summarize
from src.verification.suites import QUICK_SIZES, SUITES, SuiteResult, VerificationRunner

__all__ = [
    "QUICK_SIZES",
    "SUITES",
    "SuiteResult",
    "VerificationRunner",
    "format_suite",
    "generate_verification_report",
    "summarize",
]
