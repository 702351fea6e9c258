"""Exception hierarchy shared by all modules."""


class VortexTubeError(Exception):
    """Base class for every error raised by this package."""


class ZeroSpeed(VortexTubeError):
    """The curve parametrization stops (|gamma'| vanishes)."""


class FlatPoint(VortexTubeError):
    """Curvature vanishes, so the Frenet frame is undefined."""


class ConvergenceFailure(VortexTubeError):
    pass


class DegenerateChart(VortexTubeError):
    """The tube chart is singular (B <= 0)."""


class ResolutionTooLow(VortexTubeError):
    pass


class IncompatibleSource(VortexTubeError):
    """Neumann source does not integrate to zero."""


class NoConvergence(VortexTubeError):
    pass


class AxisEvaluation(VortexTubeError):
    """Polar components requested too close to the tube axis."""


class LambdaTooLarge(VortexTubeError):
    pass


class NonPositiveDenominator(VortexTubeError):
    """The field component along the core is not positive everywhere."""


class StepFailure(VortexTubeError):
    pass


class LeftDomain(VortexTubeError):
    """A trajectory left the closed tube."""


class SmallDivisorBreakdown(VortexTubeError):
    pass


class AdmissibilityLost(VortexTubeError):
    pass


class AtSingularity(VortexTubeError):
    """Green's function evaluated inside the exclusion radius."""


class IllConditioned(VortexTubeError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class MisfitAboveTol(VortexTubeError):
    def __init__(self, message, misfit=None):
        super().__init__(message)
        self.misfit = misfit


class TubesOverlap(VortexTubeError):
    pass


class NotAdmissible(VortexTubeError):
    """A curve/thickness pair fails the admissibility hypotheses; ``report``
    holds the :class:`AdmissibilityReport`."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
