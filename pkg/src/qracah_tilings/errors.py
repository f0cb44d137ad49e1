"""Exception hierarchy shared by all modules."""


class QRTError(Exception):
    """Base class for every error raised by the package."""


class RegimeViolation(QRTError):
    """Parameters fall outside every admissible positivity regime."""


class OutOfRange(QRTError):
    """A lattice coordinate lies outside the support."""


class DegenerateDenominator(QRTError):
    """A recurrence denominator vanishes to working precision."""


class NumericalBreakdown(QRTError):
    """Norms or intermediate quantities underflowed."""


class SingularPoint(QRTError):
    """mu'(x) vanishes, the density formula is singular there."""


class DegenerateInversion(QRTError):
    """The change of variable y(xi) cannot be inverted."""


class ArccosDomain(QRTError):
    """An arccos argument left [-1, 1] by more than the rounding slack."""


class QuadratureNonConvergence(QRTError):
    """Adaptive quadrature exceeded its refinement budget."""


class ComplexLog(QRTError):
    """A logarithm argument is nonpositive in the real regime."""


class TooLarge(QRTError):
    """Exhaustive enumeration would exceed its guard."""


class SignViolation(QRTError):
    """Tiling weights of mixed sign were produced."""


class DeterminantUnderflow(QRTError):
    """A determinantal weight underflowed to zero."""


class WindowTooSmall(QRTError):
    """The banded trace window cannot contain the polynomial's support."""


class OutsideLiquid(QRTError):
    """A point expected inside the liquid region is not."""


class AngleDomain(QRTError):
    """A lozenge angle falls outside [0, pi]."""


class PoleProximity(QRTError):
    """Evaluation point sits on the pole line of the Burgers source."""


class GradientOutsideN(QRTError):
    """A gradient is outside the admissible slope triangle."""


class WeightSingularity(QRTError):
    """A mesh centroid sits on the singular line of the energy weight."""
