"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConvergenceError(ArithmeticError):
    """An iterative or adaptive procedure did not reach its tolerance.

    ``value`` is the best estimate available when the procedure gave up and
    ``residual`` the achieved error estimate.
    """

    def __init__(self, message, value=None, residual=None):
        super().__init__(message)
        self.value = value
        self.residual = residual


class QuadratureError(ConvergenceError):
    """Adaptive quadrature exhausted its subdivision budget."""


class IntegrandError(ValueError):
    """The integrand produced NaN or infinity at a quadrature node."""


class GridResolutionError(ConvergenceError):
    """A discretisation grid is too coarse for the requested accuracy."""
