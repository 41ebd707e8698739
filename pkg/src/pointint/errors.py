"""Exception types raised by the numerical routines.

Input/shape problems raise plain ValueError; everything that can only be
detected while computing (singular matrices, branch-cut hits, truncation
failures) derives from NumericalError so callers can map it to a single
failure mode.
"""


class NumericalError(Exception):
    """Base class for runtime numerical failures."""


class SingularExtension(NumericalError):
    """1 + V/(2m) vanishes: the point interaction has no resolvent formula."""


class SingularU(NumericalError):
    """The coupling matrix U is numerically singular."""


class SingularDet(NumericalError):
    """A required determinant is numerically zero."""


class BranchAmbiguity(NumericalError):
    """Determinant landed on the negative real axis; the principal square
    root is ambiguous there and we refuse to pick a side silently."""


class DegenerateMu(NumericalError):
    """1 + mu is numerically zero; the parameter triple is degenerate."""


class AlphaZero(NumericalError):
    """SL(2) element with alpha = 0 has no normal-ordered parameter triple."""


class FusionSingular(NumericalError):
    """Product of two operators hits the 1 - nu1*lambda2 = 0 singularity."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class Overflow(NumericalError):
    """Requested form factor exceeds the stable floating-point range."""


class TruncationNotConverged(NumericalError):
    """Fock-space truncation did not stabilize under dimension doubling."""


class NotTransverse(NumericalError):
    """Two half-dimensional subspaces fail to span; projection undefined."""


class SingularInput(NumericalError):
    """A matrix that must be invertible is numerically singular."""


class NotPositiveDefinite(NumericalError):
    """Sampling requires a positive definite (block) matrix."""


class ZeroWronskian(NumericalError):
    """The two decaying solutions are linearly dependent: E is in the
    point spectrum."""
