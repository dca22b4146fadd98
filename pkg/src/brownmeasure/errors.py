"""Exception hierarchy shared by all modules."""


class BrownMeasureError(Exception):
    """Base class for numerical failures raised by this package."""


class InvalidMeasure(BrownMeasureError, ValueError):
    pass


class NonFiniteInput(BrownMeasureError, ValueError):
    pass


class DivergentIntegral(BrownMeasureError):
    """A kernel integral is infinite (pole on a set of positive mass)."""


class QuadratureError(BrownMeasureError):
    """Adaptive quadrature failed to reach its tolerance."""


class OnSupport(BrownMeasureError):
    """A real evaluation point lies inside the support of the measure."""


class ResolutionTooCoarse(BrownMeasureError):
    pass


class ImaginaryResidual(BrownMeasureError):
    """The subordination boundary value is not real to working accuracy."""


class BracketFailure(BrownMeasureError):
    pass


class OutsideDomain(BrownMeasureError):
    pass


class OutsideLambda(OutsideDomain):
    pass


class OutsideLambdaClosure(OutsideLambda):
    pass


class OutsideOmega(OutsideDomain):
    pass


class BeyondLifetime(BrownMeasureError):
    """Requested time exceeds the lifetime of a characteristic path."""


class NegativeSquare(BrownMeasureError):
    pass


class SingularBrownMeasure(BrownMeasureError):
    """The boundary map ``f`` is not strictly increasing, so the Brown measure has no planar density."""


class UnsupportedSampling(BrownMeasureError):
    pass


class ConvergenceFailure(BrownMeasureError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
