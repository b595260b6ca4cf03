"""Exception types used across the toolkit.

Errors that the CLI maps to exit codes derive from the three base classes
ValidationFailed (exit 2), SizeCap (exit 3) and ParseError (exit 4).
"""


class SpkError(Exception):
    """Base class for all toolkit errors."""


class ValidationFailed(SpkError):
    """An input or invariant check failed."""


class ParseError(SpkError):
    """An input file or argument could not be parsed."""


class SizeCap(SpkError):
    """A size limit (enumeration cap, dense-pipeline cap) was exceeded."""


# -- chain construction ------------------------------------------------------

class NotStochastic(ValidationFailed):
    """A kernel row does not sum to one (or has negative entries)."""


class Reducible(ValidationFailed):
    """The kernel's support digraph has more than one closed class."""


class ZeroStationaryMass(ValidationFailed):
    """The solved stationary distribution has a non-positive component."""


class DimensionMismatch(ValidationFailed):
    """Vector/matrix sizes do not agree."""


class ToleranceTooLoose(ValidationFailed):
    """A truncation tolerance >= 1 was requested."""


class AlphaExceedsHolding(ValidationFailed):
    """Laziness removal asked for more holding than the kernel has."""


# -- subsets and profiles ----------------------------------------------------

class EmptySubset(ValidationFailed):
    """Operations on subsets require a non-empty index set."""


class FullSpace(ValidationFailed):
    """The bracket is undefined when the subset carries all the mass."""


class EigensolveFailure(SpkError):
    """The symmetric eigensolver did not converge."""


class DidNotConverge(SpkError):
    """An iterative minimizer hit its iteration limit; best value attached."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class TooLarge(SizeCap):
    """Exhaustive enumeration requested past the subset cap."""


# -- bounds ------------------------------------------------------------------

class NonpositiveProfile(ValidationFailed):
    """Profile inversion needs strictly positive step values."""


class EpsilonTooLarge(ValidationFailed):
    """Accuracy target makes the bound's integration range empty."""


class ZeroHolding(ValidationFailed):
    """The holding-probability route needs min_x K(x,x) > 0."""


class ReducibleSymmetrization(ValidationFailed):
    """KK* or K*K is reducible; the symmetrization route does not apply."""


class AlphaOutOfRange(ValidationFailed):
    """Discrete conductance bounds need 0 < alpha < 1."""


class NotReversible(ValidationFailed):
    """The operation is only valid for reversible chains."""


class RegularityFailed(SpkError):
    """The growth inverse is not delta-regular on the requested window."""


class GridTooCoarse(ValidationFailed):
    """The regularity checker needs at least 32 grid points per decade."""


# -- exact mixing ------------------------------------------------------------

class Periodic(SpkError):
    """Discrete-time distances do not converge for periodic chains."""


class NoConvergenceInWindow(SpkError):
    """The distance never dropped below the target within the scan window."""


class InvalidBlock(ValidationFailed):
    """The requested Viscek block does not belong to the graph."""


class DegenerateGenerators(ValidationFailed):
    """Torus side lengths below 3 collapse the four generators."""
