"""Exception hierarchy shared by all modules."""


class PlanarPotError(Exception):
    """Base class for errors raised by this package."""


class DomainError(PlanarPotError, ValueError):
    """A point lies outside the region where an operation is defined."""


class PreconditionError(PlanarPotError, ValueError):
    """Inputs violate a documented precondition (clearance, boundary membership)."""


class ConfigurationError(PlanarPotError, ValueError):
    """Invalid parameters or an inconsistent configuration."""


class NumericError(PlanarPotError, RuntimeError):
    """An iterative method failed to reach its target.

    Attributes
    ----------
    residual : float
        Last residual observed before giving up.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class PolarSetError(PlanarPotError, ValueError):
    """The set has zero logarithmic capacity, so no equilibrium measure exists."""
