"""Exception types shared across the package."""


class DimerlabError(Exception):
    """Base class for all package-specific failures."""


class EndpointSingularity(DimerlabError):
    """Raised when an operation needs the (z, theta) chart at |z| ~ 1.

    The phase chart is singular at the poles z = +-1; callers should switch
    to the amplitude chart there.
    """


class DomainError(DimerlabError):
    """Input is outside the mathematical domain of the requested quantity."""


class ConvergenceFailure(DimerlabError):
    """An iterative scheme did not reach its tolerance within its budget."""


class NotStationary(DimerlabError):
    """A point handed to the stability classifier is not a fixed point."""


class BranchMatchingAmbiguous(DimerlabError):
    """Two branch continuations are too close to distinguish reliably."""


class StepUnderflow(DimerlabError):
    """Adaptive step size fell below the hard floor (1e-14)."""


class NoDoubletGap(DimerlabError):
    """Third eigenvalue is not separated from the doublet; the two-level
    picture is invalid for this potential/hbar."""


class GridCapExceeded(DimerlabError):
    """Grid refinement or domain widening hit its cap before converging."""


class SymmetryViolation(DimerlabError):
    """Mirror-symmetry cross-check between left/right quantities failed."""


class ConfigError(DimerlabError):
    """A run configuration file is malformed or violates a precondition."""
