"""Exception hierarchy for viscofit.

Every error carries the process exit code the CLI reports for it.
"""

from __future__ import annotations


class ViscofitError(Exception):
    """Base class for all viscofit errors."""

    exit_code: int = 1


# --- Exit code 2: configuration ---


class ConfigError(ViscofitError):
    """Invalid configuration, option value or unknown config key."""

    exit_code = 2


class InvalidProgramError(ConfigError):
    """A strain program cannot be built from the given reversals."""


class InvalidTimeGridError(ConfigError):
    """The integration interval or step is not usable."""


class UnsupportedModelError(ConfigError):
    """The requested operation is not defined for this noise model."""


# --- Exit code 3: data ---


class DataError(ViscofitError):
    """Experimental or parameter data is malformed or insufficient."""

    exit_code = 3


class DimensionMismatchError(DataError):
    """Vector and matrix sizes do not agree."""


class DegenerateDataError(DataError):
    """Data cannot carry the requested noise model (e.g. all zeros)."""


class ZeroReferenceParameterError(DataError):
    """A normalizing reference parameter is zero."""


# --- Exit code 4: non-convergence ---


class NonConvergenceError(ViscofitError):
    """An identification run stopped without meeting its tolerances."""

    exit_code = 4


# --- Exit code 5: numerical failures ---


class NumericalError(ViscofitError):
    """A numerical operation failed."""

    exit_code = 5


class NonPositiveDeterminantError(NumericalError):
    """A tensor required to have det > 0 does not."""


class SingularTensorError(NumericalError):
    """A 3x3 tensor is not invertible."""


class NonPositiveDefiniteError(NumericalError):
    """A tensor required to be symmetric positive definite is not."""


class StepFailureError(NumericalError):
    """An integration step could not restore the internal-state invariants."""


class OutOfRangeError(NumericalError, ValueError):
    """A time lies outside the deformation history."""


class FactorizationFailureError(NumericalError):
    """A weighting matrix is not numerically symmetric positive definite."""


class NonFiniteResidualError(NumericalError):
    """The model produced NaN or infinite residuals."""


class NonFiniteJacobianError(NumericalError):
    """The model Jacobian contains NaN or infinite entries."""


class SingularNormalMatrixError(NumericalError):
    """The normal matrix JᵀWJ is singular or too ill-conditioned."""
