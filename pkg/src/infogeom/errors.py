"""Exception hierarchy shared by all modules."""


class InfoGeomError(Exception):
    """Base class for all errors raised by infogeom."""


class DivergentIntegral(InfoGeomError):
    """Quadrature refinement did not settle (divergence or unresolved tail)."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ZeroDenominator(InfoGeomError):
    pass


class PartitionMismatch(InfoGeomError):
    pass


class SpaceMismatch(InfoGeomError):
    pass


class OutOfDomain(InfoGeomError):
    pass


class NonPositiveDensity(InfoGeomError):
    pass


class SupportViolation(InfoGeomError):
    pass


class ZeroRow(InfoGeomError):
    pass


class NotProbability(InfoGeomError):
    pass


class NotSufficient(InfoGeomError):
    pass


class ZeroMarginal(InfoGeomError):
    pass


class IllConditioned(InfoGeomError):
    pass


class NotInOrliczSpace(InfoGeomError):
    pass


class SingularMetric(InfoGeomError):
    pass


class LeftDomain(InfoGeomError):
    pass


class SpecError(InfoGeomError):
    """Invalid model specification document."""
