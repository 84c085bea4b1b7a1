"""Moments, overlaps and consistency checks for three families of relativistic coherent states.

Submodules
----------
specfun     Bessel K, erf, Pochhammer symbols and Tricomi's U.
quad        Adaptive Gauss-Kronrod quadrature on finite and infinite ranges.
canonical   Gaussian (canonical) coherent states with relativistic kinematics.
lorentzian  Lorentzian coherent states labelled by mean velocity.
poincare    Coherent states built on the invariant measure of the mass shell.
checks      Registry of oracle checks used by ``relcoh verify``.
cli         The ``relcoh`` command.
"""

from . import canonical, lorentzian, poincare, quad, specfun
from .errors import ConvergenceError, DomainError, GridResolutionError, IntegrandError, QuadratureError

__version__ = "0.1.0"

__all__ = [
    "canonical",
    "lorentzian",
    "poincare",
    "quad",
    "specfun",
    "ConvergenceError",
    "DomainError",
    "GridResolutionError",
    "IntegrandError",
    "QuadratureError",
]
