"""Exception types shared across the package."""


class ThetaOpsError(Exception):
    """Base class for every error raised by this package."""


class NotSymmetric(ThetaOpsError):
    """Period matrix is not symmetric within tolerance."""


class ImaginaryPartNotPositiveDefinite(ThetaOpsError):
    """Imaginary part of the period matrix has a nonpositive eigenvalue."""


class VarCountMismatch(ThetaOpsError):
    """Jets or operators over different variable counts were combined."""


class IndexOutOfRange(ThetaOpsError):
    """Variable or coefficient index outside the valid range."""


class DimensionMismatch(ThetaOpsError):
    """Array or vector dimensions inconsistent with the ambient dimension."""


class DegenerateMatrix(ThetaOpsError):
    """A multiplier matrix is singular, or the family fails to commute."""


class TolTooSmall(ThetaOpsError):
    """Requested tolerance would push the series cutoff past the hard cap."""


class NearDivisor(ThetaOpsError):
    """Evaluation point too close to the theta divisor for a stable quotient."""


class RankDeficient(ThetaOpsError):
    """A matrix expected to have full rank failed the rank test."""


class NoIntegerSolution(ThetaOpsError):
    """The level-count linear system has no integer solution."""


class GeneralPositionFailure(ThetaOpsError):
    """Random draws failed a general-position witness after all retries."""


class NewtonDivergence(ThetaOpsError):
    """Newton iteration failed to converge for a sample point."""


class InsufficientPoints(ThetaOpsError):
    """Not enough valid sample points could be produced."""


class InsufficientJetOrder(ThetaOpsError):
    """Jet order too low for the requested operation."""


class ShapeMismatch(ThetaOpsError):
    """Operator/operand shapes are incompatible."""


class IllConditioned(ThetaOpsError):
    """Linear solve condition number exceeded the acceptable bound."""


class CalibrationFailure(ThetaOpsError):
    """Two independent computation routes disagree beyond tolerance."""


class ConfigInvalid(ThetaOpsError):
    """Configuration file failed validation."""
