"""Lorentzian coherent states: eigenvectors of the relativistic complexifier.

The momentum variable is ``u = p / mc`` with the flat measure ``du``; since
``sigma p / hbar = r u`` the position operator in units of sigma is
``(i / r) d/du`` and the velocity operator is ``u / sqrt(1 + u^2)`` (units of c).
The complexifier

    b = (x / sigma + i r v / c) / sqrt(2)

has the normalised eigenfunctions

    phi(u) = C exp(-r^2 sqrt(1 + u^2) + r^2 beta u - i xbar r u),
    C^2 = sqrt(1 - beta^2) / (2 K1(w)),   w = 2 r^2 sqrt(1 - beta^2),

with eigenvalue ``zeta = (xbar + i r beta) / sqrt(2)``; ``xbar`` and
``beta`` are the mean position (sigma) and mean velocity (c).  Every
moment is a ratio of Macdonald functions at ``w``, formed from scaled values.

All variances share the factor

    Q(beta, r) = 1 - beta^2 - (w / K1(w)) int_1^inf K0(2 r^2 sqrt(xi^2 - beta^2)) dxi,

which is the velocity variance; the position variance is ``r^2 Q`` and
|<[x, v]>| is ``2 r Q`` (units of sigma c), so the Robertson bound for x and
v is saturated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .canonical import Scale, flat_variances
from .errors import DomainError
from .momentum import MOMENT_CFG, MomentReport, MomentumGrid, MomentumWavefunction, check_grid
from .quad import QuadratureConfig, integrate_half_line
from .specfun import bessel_k_scaled

SUPERLUMINAL_MSG = "|beta| < 1 required (mean velocity must be subluminal)"


def _check(beta, r):
    if not (math.isfinite(r) and r > 0):
        raise DomainError(f"r = sigma/lambda_c must be positive, got {r!r}")
    if not (math.isfinite(beta) and abs(beta) < 1):
        raise DomainError(f"{SUPERLUMINAL_MSG}; got beta = {beta!r}")


def _w(beta, r):
    return 2.0 * r * r * math.sqrt((1.0 - beta) * (1.0 + beta))


def bessel_ratio(beta: float, r: float) -> float:
    """K2(w) / K1(w) at w = 2 r^2 sqrt(1 - beta^2)."""
    w = _w(beta, r)
    return bessel_k_scaled(2, w) / bessel_k_scaled(1, w)


@dataclass(frozen=True)
class LorentzianState:
    xbar: float
    beta: float
    r: float
    zeta: complex = field(init=False)
    norm_const: float = field(init=False, repr=False)

    def __post_init__(self):
        _check(self.beta, self.r)
        if not math.isfinite(self.xbar):
            raise DomainError("xbar must be finite")
        object.__setattr__(self, "zeta", complex(self.xbar, self.r * self.beta) / math.sqrt(2.0))
        # C with the factor exp(w / 2) split off (see _log_scale)
        w = _w(self.beta, self.r)
        c2 = math.sqrt((1 - self.beta) * (1 + self.beta)) / (2.0 * bessel_k_scaled(1, w))
        object.__setattr__(self, "norm_const", math.sqrt(c2))

    @classmethod
    def from_scale(cls, xbar: float, beta: float, scale: Scale) -> "LorentzianState":
        if scale.regime != "massive":
            raise DomainError("Lorentzian states need a massive particle (a Compton wavelength)")
        return cls(xbar, beta, scale.r)

    @property
    def w(self) -> float:
        return _w(self.beta, self.r)

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt((1 - self.beta) * (1 + self.beta))


def wavefunction(state: LorentzianState) -> MomentumWavefunction:
    r2 = state.r**2
    beta, xr = state.beta, state.xbar * state.r
    c = state.norm_const
    half_w = 0.5 * state.w

    def amp(u):
        return c * np.exp(-r2 * np.sqrt(1 + u * u) + r2 * beta * u + half_w - 1j * xr * u)

    def dlog(u):
        return -r2 * u / np.sqrt(1 + u * u) + r2 * beta - 1j * xr

    g = state.gamma
    return MomentumWavefunction(
        amp, dlog, "flat",
        center=beta * g,
        width=g**1.5 / (math.sqrt(2.0) * state.r),
        variable="p / mc",
        scale=state.r,
    )


# --- the shared variance factor ------------------------------------------

_Q_CFG = QuadratureConfig(rel_tol=1e-13, abs_tol=1e-300, max_subdivisions=4000)


def variance_factor(beta: float, r: float, cfg: QuadratureConfig | None = None) -> float:
    """Q(beta, r), the velocity variance in units of c^2."""
    _check(beta, r)
    r2 = 2.0 * r * r
    w = _w(beta, r)
    b2 = beta * beta

    def f(xi):
        # sqrt(xi^2 - beta^2) without cancellation near xi = 1, beta -> 1
        s = np.sqrt((xi - 1.0) * (xi + 1.0) + (1.0 - b2))
        a = r2 * s
        return bessel_k_scaled(0, a) * np.exp(-(a - w))

    # the integrand decays like exp(-2 r^2 (xi - 1)) for xi >> 1
    width = min(1.0, 1.0 / r2 + math.sqrt(1.0 - b2) / r2 * 10)
    integral = integrate_half_line(f, 1.0, cfg or _Q_CFG, width=width).value
    return (1.0 - b2) - w / bessel_k_scaled(1, w) * integral


def commutator_average(beta: float, r: float) -> float:
    """|<[x, v]>| in units of sigma c; equals (lambda_c / sigma) <gamma^-3> = 2 r Q."""
    return 2.0 * r * variance_factor(beta, r)


def variances_xv(beta: float, r: float):
    """((Delta x / sigma)^2, (Delta v / c)^2, product in sigma^2 c^2)."""
    q = variance_factor(beta, r)
    var_x = r * r * q
    return var_x, q, var_x * q


# --- relativistic averages -----------------------------------------------


def mean_momentum(beta: float, r: float) -> float:
    """<p> in units of mc."""
    _check(beta, r)
    return beta / math.sqrt((1 - beta) * (1 + beta)) * bessel_ratio(beta, r)


def mean_energy(beta: float, r: float) -> float:
    """<sqrt(p^2 c^2 + m^2 c^4)> in units of mc^2."""
    _check(beta, r)
    return bessel_ratio(beta, r) / math.sqrt((1 - beta) * (1 + beta)) - 0.5 / (r * r)


def momentum_variance(beta: float, r: float) -> float:
    """(Delta p / mc)^2.  Multiply by r^2 for (sigma Delta p / hbar)^2."""
    _check(beta, r)
    rat = bessel_ratio(beta, r)
    one_minus = (1 - beta) * (1 + beta)
    bg2 = beta * beta / one_minus
    return bg2 * (1.0 - rat * rat) + 0.5 / (r * r) * (1 + 3 * beta * beta) / one_minus**1.5 * rat


def beta_for_momentum(pbar: float, r: float) -> float:
    """The label beta whose state has mean momentum ``pbar`` (units of mc)."""
    if not math.isfinite(pbar):
        raise DomainError("pbar must be finite")
    if pbar == 0:
        return 0.0
    # mean momentum is increasing in the rapidity; bracket in rapidity space
    f = lambda t: mean_momentum(math.tanh(t), r) - pbar  # noqa: E731
    hi = math.asinh(abs(pbar)) + 1.0
    while f(math.copysign(hi, pbar)) * math.copysign(1, pbar) < 0:
        hi *= 2.0
    lo, hi = (0.0, hi) if pbar > 0 else (-hi, 0.0)
    return math.tanh(brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))


# --- overlap -------------------------------------------------------------


def overlap(a: LorentzianState, b: LorentzianState, method: str = "quadrature",
            cfg: QuadratureConfig | None = None) -> complex:
    """<a|b>.

    ``quadrature`` integrates the product of the two wavefunctions and is
    valid for every pair.  ``closed_form`` is the Macdonald-function
    expression, available here only on the real slice ``a.xbar == b.xbar``.
    """
    if a.r != b.r:
        raise DomainError("states live in different Hilbert spaces (different r)")
    if abs(a.beta + b.beta) >= 2:
        raise DomainError("overlap requires |beta + beta'| < 2")
    if method == "quadrature":
        return wavefunction(a).inner(wavefunction(b), cfg)
    if method == "closed_form":
        if a.xbar != b.xbar:
            raise DomainError("closed-form overlap implemented on the real slice xbar == xbar' only")
        r2 = 2.0 * a.r**2
        bm = 0.5 * (a.beta + b.beta)
        s = math.sqrt((1 - bm) * (1 + bm))
        log_exp = 0.5 * (a.w + b.w) - r2 * s
        return complex(2.0 * a.norm_const * b.norm_const * bessel_k_scaled(1, r2 * s) / s * math.exp(log_exp))
    raise ValueError(f"unknown method {method!r}")


# --- oracles ---------------------------------------------------------------


def default_grid(state: LorentzianState, points: int = 4001) -> MomentumGrid:
    return MomentumGrid.around(wavefunction(state), points=points)


def eigen_residual(state: LorentzianState, grid: MomentumGrid | None = None) -> float:
    """||b phi - zeta phi|| / ||phi|| with b applied by finite differences on ``grid``."""
    wf = wavefunction(state)
    grid = grid or default_grid(state)
    check_grid(grid, wf)
    u = grid.nodes
    phi = wf(u)
    x_phi = (1j / state.r) * grid.derivative(phi)
    v = u / np.sqrt(1 + u * u)
    b_phi = (x_phi + 1j * state.r * v * phi) / math.sqrt(2.0)
    res = b_phi - state.zeta * phi
    # exclude the low-order edge stencils, where phi is negligible anyway
    return math.sqrt(grid.integrate(np.abs(res) ** 2) / grid.integrate(np.abs(phi) ** 2))


@dataclass(frozen=True)
class GridMoments:
    mean_x: float
    var_x: float
    mean_v: float
    var_v: float
    commutator: float


def grid_moments(state: LorentzianState, grid: MomentumGrid | None = None) -> GridMoments:
    """Position and velocity moments with x applied by finite differences.

    ``commutator`` is |<[x, v]>| = |2 Im <x phi | v phi>| in units of sigma c.
    """
    wf = wavefunction(state)
    grid = grid or default_grid(state)
    check_grid(grid, wf)
    u = grid.nodes
    phi = wf(u)
    x_phi = (1j / state.r) * grid.derivative(phi)
    v = u / np.sqrt(1 + u * u)
    rho = np.abs(phi) ** 2
    norm = grid.integrate(rho)
    mean_x = grid.integrate(np.real(np.conj(phi) * x_phi)) / norm
    x2 = grid.integrate(np.abs(x_phi) ** 2) / norm
    mean_v = grid.integrate(v * rho) / norm
    v2 = grid.integrate(v * v * rho) / norm
    comm = 2.0 * grid.integrate(np.imag(np.conj(x_phi) * v * phi)) / norm
    return GridMoments(mean_x, x2 - mean_x**2, mean_v, v2 - mean_v**2, abs(comm))


@dataclass(frozen=True)
class QuadratureMoments:
    norm: float
    mean_p: float
    var_p: float
    energy: float
    mean_v: float
    var_v: float
    var_x: float
    inv_gamma3: float


def quadrature_moments(state: LorentzianState, cfg: QuadratureConfig | None = None) -> QuadratureMoments:
    """Brute-force moments of the wavefunction in the momentum representation."""
    cfg = cfg or MOMENT_CFG
    wf = wavefunction(state)
    e = lambda g: wf.expectation(g, cfg)  # noqa: E731
    p1 = e(lambda u: u)
    p2 = e(lambda u: u * u)
    v1 = e(lambda u: u / np.sqrt(1 + u * u))
    v2 = e(lambda u: u * u / (1 + u * u))
    var_x, _, _ = flat_variances(wf, cfg)
    return QuadratureMoments(
        norm=wf.norm(cfg),
        mean_p=p1,
        var_p=p2 - p1 * p1,
        energy=e(lambda u: np.sqrt(1 + u * u)),
        mean_v=v1,
        var_v=v2 - v1 * v1,
        var_x=var_x,
        inv_gamma3=e(lambda u: (1 + u * u) ** -1.5),
    )


def moment_report(state: LorentzianState) -> MomentReport:
    b, r = state.beta, state.r
    var_x, var_v, prod_xv = variances_xv(b, r)
    var_p = momentum_variance(b, r) * r * r
    rep = MomentReport()
    rep.set("energy", mean_energy(b, r), "closed_form")
    rep.set("momentum", mean_momentum(b, r), "closed_form")
    rep.set("velocity", b, "closed_form")
    rep.set("var_x", var_x, "quadrature")
    rep.set("var_v", var_v, "quadrature")
    rep.set("var_p", var_p, "closed_form")
    rep.set("product_xp", var_x * var_p, "quadrature")
    rep.set("product_xv", prod_xv, "quadrature")
    return rep
