"""Exception hierarchy shared by all modules."""


class TwoSpinonError(Exception):
    """Base class for every error raised by this package."""


class DomainError(TwoSpinonError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class OutsideBand(DomainError):
    """The kinematic point is not strictly inside the two-spinon continuum."""


class DegenerateWindow(DomainError):
    """The two-spinon window has zero width (k = 0 or k = 2*pi)."""


class QuadratureFailure(TwoSpinonError, ArithmeticError):
    """Numerical integration did not reach the requested tolerance."""


class DivergentWeight(QuadratureFailure):
    """The requested integral does not exist (non-integrable endpoint)."""


class ConvergenceFailure(TwoSpinonError, ArithmeticError):
    """An iterative solver exhausted its budget."""


class SizeError(DomainError):
    """Finite chain is too large (or malformed) for dense diagonalization."""
