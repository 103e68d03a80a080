"""
Exception hierarchy for the toolkit.

Library code raises these; the command-line interface maps them to exit codes.
"""


class LdpOptError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatchError(LdpOptError, ValueError):
    """Alphabet or channel sizes do not line up."""


class InvalidDistributionError(LdpOptError, ValueError):
    """A probability vector or channel matrix violates its invariants."""


class AdmissibilityError(LdpOptError, ValueError):
    """Parameters lie outside the region where a construction is defined."""


class NotDeterministicError(LdpOptError, ValueError):
    """A deterministic channel was required."""


class IsThresholdError(LdpOptError):
    """A non-extremality witness was requested for a threshold channel."""

    def __init__(self, message: str = "is-threshold"):
        super().__init__(message)


class UnsupportedFamilyError(LdpOptError):
    """The closed-form extreme-point catalog does not cover a family."""


class VertexCapExceededError(LdpOptError):
    """Vertex enumeration requested above the configured size cap."""


class ZeroDivergenceError(LdpOptError):
    """The privatized pair is indistinguishable, so no sample size suffices."""

    def __init__(self, message: str = "zero divergence"):
        super().__init__(message)


class WitnessConstructionError(LdpOptError):
    """A perturbation could not be kept inside its channel family."""


class SerializationError(LdpOptError, ValueError):
    """Malformed JSON or CSV input."""
