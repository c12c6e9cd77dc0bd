"""Exception types raised across the package.

Everything derives from :class:`Error` so callers can catch the whole
family at once.  The CLI maps these onto exit codes: input problems give
1, solver failures give 2.
"""


class Error(Exception):
    """Base class for all package-specific errors."""


# ---- input / structure problems ----------------------------------------

class ParseError(Error):
    """Malformed or semantically invalid input file."""


class DimensionMismatch(Error):
    """A vertex function has the wrong length for its graph."""


class NonFiniteValue(Error):
    """NaN or infinity where a finite real was required."""


class AsymmetricWeights(Error):
    """Edge weights with w_xy != w_yx."""


class NegativeWeight(Error):
    """A negative edge weight."""


class NonpositiveMeasure(Error):
    """A vertex measure mu_x <= 0."""


class SelfLoop(Error):
    """A nonzero diagonal weight w_xx."""


class DuplicateEdge(Error):
    """The same unordered vertex pair listed twice in an edge list."""


class Disconnected(Error):
    """The graph is not connected."""


class NoEdges(Error):
    """An operation needing at least one edge got an edgeless graph."""


class SingleVertex(Error):
    """An operation needing at least two vertices got one."""


# ---- solver failures -----------------------------------------------------

class Overflow(Error):
    """An iterate left the range where exp() is finite (|u| > 700)."""


class SingularJacobian(Error):
    """Newton hit a Jacobian it could not factor."""


class NoConvergence(Error):
    """Newton ran out of iterations or the line search stalled."""


class Diverged(Error):
    """Newton iterates ran away from the search region."""


class NotSubsolution(Error):
    """The proposed lower function has a positive residual component."""


class NotSupersolution(Error):
    """The proposed upper function has a negative residual component."""


class NotSubsolutionAfterAll(Error):
    """The constant-subsolution formula failed its verification."""


class PreconditionFailed(Error):
    """A hypothesis an operation requires does not hold."""


class BoxEmpty(Error):
    """lower > upper at some vertex."""


class BranchLost(Error):
    """Continuation could not track the branch past some parameter value."""

    def __init__(self, message: str, last_t: float = 0.0):
        super().__init__(message)
        self.last_t = last_t


class NotTwoVertex(Error):
    """The brute-force scan only works on two-vertex graphs."""


# ---- degree-specific -----------------------------------------------------

class BothZero(Error):
    """h+ and h- both vanish identically; the degree is undefined."""


class ZeroH(Error):
    """h vanishes identically in a Kazdan-Warner problem."""


class EmptyV0(Error):
    """An empty vertex subset where a nonempty one is required."""


class SingularSystem(Error):
    """A linear system for extension/reduction could not be solved."""


class RadiusUnstable(Error):
    """The radius sweep never produced two agreeing solution sets."""


class UnknownExample(Error):
    """Unrecognized built-in example name."""
