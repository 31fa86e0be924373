"""Exception types shared across the package."""


class QTraceError(Exception):
    """Base class for all package errors."""


class DomainError(QTraceError):
    """Argument outside the mathematical domain of an operation."""


class TailTooLarge(QTraceError):
    """A truncated sum or integral cannot meet the requested tolerance."""


class NearPole(QTraceError):
    """Evaluation point too close to a pole divisor."""


class ResonantWeight(QTraceError):
    """A triangular solve hit a (near-)vanishing pivot [mu - j + 1]_q."""


class Divergent(QTraceError):
    """A series was requested outside its region of convergence."""


class NoIntertwiner(QTraceError):
    """The requested finite-dimensional intertwiner does not exist."""


class NotIsolated(QTraceError):
    """Residue extraction detected a non-isolated or enclosed extra singularity."""


class TruncationTooSmall(QTraceError):
    """A truncation order is too small for the requested computation."""
