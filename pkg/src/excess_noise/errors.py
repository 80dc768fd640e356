"""Exception hierarchy shared by all modules."""


class ExcessNoiseError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(ExcessNoiseError, ValueError):
    """Malformed input: wrong shape, non-finite entries, mismatched sizes."""


class InvariantViolation(ExcessNoiseError):
    """A physical invariant (reciprocity, gain/loss definiteness) does not hold."""


class NumericalConsistencyError(ExcessNoiseError):
    """A quantity that is exact in theory came out inconsistent beyond tolerance."""


class ThresholdCrossed(ExcessNoiseError):
    """The medium has reached (or passed) the laser threshold.

    The linear scattering description is meaningless beyond this point, so
    generators raise it instead of returning a matrix.
    """


class DomainError(ExcessNoiseError, ValueError):
    """Argument outside the region where a generating function converges.

    Attributes
    ----------
    critical_xi : float or None
        Smallest positive counting variable at which the matrix
        ``1 - alpha*xi*f*D`` becomes singular, when known.
    """

    def __init__(self, message, critical_xi=None):
        super().__init__(message)
        self.critical_xi = critical_xi


class UndefinedSignal(ExcessNoiseError, ZeroDivisionError):
    """No coherent signal reaches the detector, so the noise figure is undefined."""


class AccuracyWarning(UserWarning):
    """A quadrature grid is too coarse for the requested accuracy."""
