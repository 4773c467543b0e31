"""
Error hierarchy shared by every sub-package.
"""
from typing import Optional


class MetrologyError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(MetrologyError, ValueError):
    """Inputs that can never produce a valid result."""


class InvalidRange(ConfigurationError):
    """A displacement range with min > max, a non-finite bound, or n < 1."""


class LengthMismatch(ConfigurationError):
    """Parallel lists that must have matching lengths do not."""


class NonPositiveInput(ConfigurationError):
    """A quantity that must be strictly positive is not."""


class SingularParameterization(ConfigurationError):
    """The (A, x_bar) parameterization is undefined at x_bar = 0."""


class BranchMismatch(ConfigurationError):
    """The two branches of a controlled word have different net displacements."""

    def __init__(self, delta: complex):
        self.delta = delta
        super().__init__(
            f"Branches differ in net displacement by |delta alpha| = {abs(delta):.3e}; "
            "control and probe would entangle"
        )


class NumericalFailure(MetrologyError, ArithmeticError):
    """The numerics could not deliver a trustworthy answer."""


class TruncationTooSmall(NumericalFailure):
    """The Fock truncation cannot hold the requested displacement."""

    def __init__(self, alpha: complex, dim: int, suggested_dim: Optional[int] = None):
        self.alpha = alpha
        self.dim = dim
        self.suggested_dim = suggested_dim
        hint = f"; use dim >= {suggested_dim}" if suggested_dim else ""
        super().__init__(f"|alpha|^2 = {abs(alpha) ** 2:.3f} exceeds dim/4 at dim={dim}{hint}")


class SingularFisher(NumericalFailure):
    """The Fisher information is not positive (definite)."""


class OptimizationDiverged(NumericalFailure):
    """The likelihood maximum lies on or outside the search window."""


class DegenerateCounts(NumericalFailure):
    """All control outcomes agree, so the estimate is pinned to a window edge."""


class ZeroMeanWarning(UserWarning):
    """x_bar or p_bar is zero; Fisher-matrix operations will refuse the instance."""
