"""Exception hierarchy shared by all risfox modules."""


class RisFoxError(Exception):
    """Base class for library errors."""


class PoleError(RisFoxError, ValueError):
    """Gamma function evaluated at (or numerically on) one of its poles."""


class NonConvergence(RisFoxError, ArithmeticError):
    """Quadrature could not reach the requested tolerance within its node budget."""


class PoleOnContour(RisFoxError, ValueError):
    """A requested contour abscissa coincides with a gamma pole."""


class HigherOrderPole(RisFoxError, ValueError):
    """Residue expansion needs a pole of order > 2, which is not supported."""


class ParamError(RisFoxError, ValueError):
    """Out-of-range physical or Fox's H parameters."""


class ArityError(RisFoxError, ValueError):
    """Operation called with the wrong number of elements/blocks."""


class DimensionLimit(RisFoxError, ValueError):
    """Multivariate evaluation refused above the configured dimension cap."""


class DomainError(RisFoxError, ValueError):
    """Argument outside the support of a density."""


class AlternatingSumLoss(RisFoxError, ArithmeticError):
    """An alternating binomial sum lost too many significant digits."""

    def __init__(self, message, value=None, digits_lost=None):
        super().__init__(message)
        self.value = value
        self.digits_lost = digits_lost
