"""Exception hierarchy shared by the solver modules."""


class LBMixError(Exception):
    """Base class for every error raised by lbmix."""


class CoefficientError(LBMixError, ValueError):
    """Coefficient strings could not be decoded into a valid tuple."""


class QuadratureError(LBMixError):
    """Panel refinement budget exhausted before the sine integral converged."""

    def __init__(self, message, s=None, k=None, which=None):
        super().__init__(message)
        self.s = s
        self.k = k
        self.which = which


class NumericalBreakdown(LBMixError):
    """A factorization failed or its condition estimate overflowed."""


class DegenerateModeError(LBMixError):
    """The mode system is singular to working precision."""

    def __init__(self, message, ks=()):
        super().__init__(message)
        self.ks = list(ks)


class DegenerateUnsolvable(DegenerateModeError):
    """Singular mode with boundary data not orthogonal to it: no classical solution."""


class NotDegenerate(LBMixError):
    """A homogeneous mode was requested for a regular frequency."""


class CapExceeded(LBMixError):
    """The truncation tail bound could not be met below ``k_cap``."""


class AllZero(LBMixError):
    """Every scanned value of the oscillatory determinant vanished."""


class RegimeMismatch(LBMixError):
    """An exact-arithmetic routine received floating coefficients."""


class MatchingSingular(LBMixError):
    """The interface block of the mode system is numerically singular."""


class GridError(LBMixError, ValueError):
    """Finite-difference grid incompatible with the stencil footprint."""
