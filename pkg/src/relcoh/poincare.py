"""Poincare coherent states (the Kaiser form, built by a Lorentz-group section).

The momentum variable is ``u = p / mc`` with the invariant scalar product
``int du / sqrt(1 + u^2)``.  With ``r = sigma / lambda_c`` and
``rho = K0(2 r^2) / K1(2 r^2)`` the state labelled by the mean position
``xbar`` (sigma) and mean momentum ``P`` (mc) is

    phi(u) = exp(-b0 sqrt(1 + u^2) + b u - i xbar r u) / sqrt(2 K0(2 r^2)),
    b = r^2 P rho,   b0 = sqrt(r^4 + b^2) = r^2 sqrt(1 + P^2 rho^2).

The Newton-Wigner position operator is ``(i/r)(d/du - u / (2 (1 + u^2)))``
in units of sigma.  Group-theoretic objects (:class:`BoostSection`,
:func:`generate_from_section`, :func:`kaiser_amplitude`) use natural units
hbar = c = 1 and an explicit mass ``m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .canonical import flat_variances
from .errors import DomainError, GridResolutionError
from .momentum import (
    MOMENT_CFG,
    MomentReport,
    MomentumGrid,
    MomentumWavefunction,
    PhaseSpaceGrid,
    check_grid,
    measure_weight,
    phase_space_sum,
)
from .quad import QuadratureConfig, integrate_half_line, integrate_line
from .specfun import bessel_k_scaled


def _check_r(r):
    if not (math.isfinite(r) and r > 0):
        raise DomainError(f"r = sigma/lambda_c must be positive, got {r!r}")


def rho(r: float) -> float:
    """K0(2 r^2) / K1(2 r^2); lies in (0, 1)."""
    _check_r(r)
    x = 2.0 * r * r
    return bessel_k_scaled(0, x) / bessel_k_scaled(1, x)


def effective_mass(r: float) -> float:
    """K1(2 r^2) / K0(2 r^2) = 1 / rho, in units of m."""
    return 1.0 / rho(r)


@dataclass(frozen=True)
class PoincareState:
    xbar: float
    pbar: float
    r: float
    rho: float = field(init=False)
    eta: float = field(init=False)
    b: float = field(init=False)
    b0: float = field(init=False)

    def __post_init__(self):
        _check_r(self.r)
        if not (math.isfinite(self.xbar) and math.isfinite(self.pbar)):
            raise DomainError("phase-space label must be finite")
        rh = rho(self.r)
        r2 = self.r**2
        object.__setattr__(self, "rho", rh)
        object.__setattr__(self, "eta", r2)
        object.__setattr__(self, "b", r2 * self.pbar * rh)
        object.__setattr__(self, "b0", r2 * math.hypot(1.0, self.pbar * rh))

    @property
    def a(self) -> float:
        """Position label in units of 1 / mc (the Kaiser ``a``)."""
        return self.xbar * self.r

    @property
    def boost(self) -> float:
        """B0 = b0 / eta."""
        return math.hypot(1.0, self.pbar * self.rho)

    @property
    def log_norm(self) -> float:
        """log C with the Bessel exponential absorbed: C = exp(r^2) / sqrt(2 K0s(2 r^2))."""
        return self.r**2 - 0.5 * math.log(2.0 * bessel_k_scaled(0, 2.0 * self.r**2))


def wavefunction(state: PoincareState) -> MomentumWavefunction:
    b0, b, xr = state.b0, state.b, state.a
    ln = state.log_norm

    def amp(u):
        return np.exp(-b0 * np.sqrt(1 + u * u) + b * u + ln - 1j * xr * u)

    def dlog(u):
        return -b0 * u / np.sqrt(1 + u * u) + b - 1j * xr

    return MomentumWavefunction(
        amp, dlog, "invariant",
        center=state.pbar * state.rho,
        width=state.boost / (math.sqrt(2.0) * state.r),
        variable="p / mc",
        scale=state.r,
    )


def flat_wavefunction(state: PoincareState) -> MomentumWavefunction:
    """The same state in the flat-measure representation, phi / (1 + u^2)^(1/4).

    At ``xbar = pbar = 0`` this is the Bakke-Wergeland packet
    ``C exp(-alpha p0) / p0^(1/2)`` with ``alpha = r^2``; the ordinary
    derivative ``(i/r) d/du`` here is the Newton-Wigner operator there.
    """
    wf = wavefunction(state)

    def amp(u):
        return wf.amplitude(u) * (1 + u * u) ** -0.25

    def dlog(u):
        return wf.log_derivative(u) - 0.5 * u / (1 + u * u)

    return MomentumWavefunction(amp, dlog, "flat", wf.center, wf.width, wf.variable, wf.scale)


def bakke_wergeland(u, alpha: float):
    """Normalised flat-measure packet exp(-alpha sqrt(1+u^2)) / (1+u^2)^(1/4)."""
    u = np.asarray(u, dtype=float)
    p0 = np.sqrt(1 + u * u)
    c = math.exp(alpha) / math.sqrt(2.0 * bessel_k_scaled(0, 2.0 * alpha))
    return c * np.exp(-alpha * p0) / np.sqrt(p0)


# --- moments ---------------------------------------------------------------


def mean_position(state: PoincareState) -> float:
    return state.xbar


def mean_momentum(state: PoincareState) -> float:
    """(b / eta) K1(2 eta) / K0(2 eta) in units of mc; equals ``state.pbar``."""
    return state.b / state.eta / state.rho


def mean_energy(state: PoincareState) -> float:
    return math.hypot(mean_momentum(state), 1.0 / state.rho)


def momentum_variance(state: PoincareState) -> float:
    """(Delta p / mc)^2; multiply by r^2 for (sigma Delta p / hbar)^2."""
    r2 = state.r**2
    rh = state.rho
    # rho K2/K1 = rho^2 + rho / r^2 from the Bessel recurrence
    return 0.5 / (r2 * rh) + state.pbar**2 * (rh * rh + rh / r2 - 1.0)


_VAR_CFG = QuadratureConfig(rel_tol=1e-12, abs_tol=1e-300, max_subdivisions=4000)


def _shifted_velocity(u, boost, prho):
    """B0 u / sqrt(1+u^2) - P rho, avoiding cancellation near the mode u = P rho."""
    p0 = np.sqrt(1 + u * u)
    direct = boost * u - prho * p0
    same_sign = boost * u * prho > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        stable = (u * u - prho * prho) / (boost * u + prho * p0)
    return np.where(same_sign, stable, direct) / p0


def position_variance(state: PoincareState, cfg: QuadratureConfig | None = None) -> float:
    """(Delta x_NW / sigma)^2 by quadrature; there is no closed form."""
    r2 = state.r**2
    boost = state.boost
    prho = state.pbar * state.rho
    wf = wavefunction(state)

    def f(u):
        g = r2 * _shifted_velocity(u, boost, prho) + 0.5 * u / (1 + u * u)
        return g * g * wf.density(u)

    return integrate_line(f, cfg or _VAR_CFG, center=wf.center, width=wf.width).value / r2


_V_CFG = QuadratureConfig(rel_tol=1e-13, abs_tol=1e-300, max_subdivisions=4000)


def mean_velocity(state: PoincareState, cfg: QuadratureConfig | None = None) -> float:
    """<u / sqrt(1 + u^2)> in units of c, from its one-dimensional Bessel integral."""
    if state.pbar == 0:
        return 0.0
    x = 2.0 * state.r**2
    prho = state.pbar * state.rho
    k1 = bessel_k_scaled(1, x)

    def f(t):
        return bessel_k_scaled(1, x * t) * np.exp(-x * (t - 1.0)) / np.sqrt(t * t + prho * prho)

    integral = integrate_half_line(f, 1.0, cfg or _V_CFG, width=min(1.0, 2.0 / x)).value
    return x * state.pbar / k1 * integral


def moment_report(state: PoincareState, cfg: QuadratureConfig | None = None) -> MomentReport:
    r2 = state.r**2
    var_x = position_variance(state, cfg)
    var_p = momentum_variance(state) * r2
    rep = MomentReport()
    rep.set("energy", mean_energy(state), "closed_form")
    rep.set("momentum", mean_momentum(state), "closed_form")
    rep.set("velocity", mean_velocity(state, cfg), "quadrature")
    rep.set("var_x", var_x, "quadrature")
    rep.set("var_p", var_p, "closed_form")
    rep.set("product_xp", var_x * var_p, "quadrature")
    return rep


# --- overlap ---------------------------------------------------------------


def overlap(a: PoincareState, b: PoincareState, method: str = "quadrature",
            cfg: QuadratureConfig | None = None) -> complex:
    """<a|b>; ``closed_form`` only on the real slice ``a.xbar == b.xbar``."""
    if a.r != b.r:
        raise DomainError("states live in different Hilbert spaces (different r)")
    if method == "quadrature":
        return wavefunction(a).inner(wavefunction(b), cfg)
    if method == "closed_form":
        if a.xbar != b.xbar:
            raise DomainError("closed-form overlap implemented on the real slice xbar == xbar' only")
        mu = a.b0 + b.b0
        nu = a.b + b.b
        s = math.sqrt((mu - nu) * (mu + nu))
        x = 2.0 * a.r**2
        return complex(bessel_k_scaled(0, s) / bessel_k_scaled(0, x) * math.exp(x - s))
    raise ValueError(f"unknown method {method!r}")


# --- oracles ---------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureMoments:
    norm: float
    mean_p: float
    var_p: float
    energy: float
    velocity: float
    mean_x: float
    var_x: float


def quadrature_moments(state: PoincareState, cfg: QuadratureConfig | None = None) -> QuadratureMoments:
    """Moments by brute-force quadrature.

    Position moments use the flat-measure image of the state, where the
    Newton-Wigner operator is a plain derivative.
    """
    cfg = cfg or MOMENT_CFG
    wf = wavefunction(state)
    e = lambda g: wf.expectation(g, cfg)  # noqa: E731
    p1 = e(lambda u: u)
    flat = flat_wavefunction(state)
    s = flat.scale
    mean_x = flat._integrate(lambda u: np.real(1j * flat.log_derivative(u)) * flat.density(u), cfg) / s
    var_x, _, _ = flat_variances(flat, cfg)
    return QuadratureMoments(
        norm=wf.norm(cfg),
        mean_p=p1,
        var_p=e(lambda u: u * u) - p1 * p1,
        energy=e(lambda u: np.sqrt(1 + u * u)),
        velocity=e(lambda u: u / np.sqrt(1 + u * u)),
        mean_x=mean_x,
        var_x=var_x,
    )


def default_grid(state: PoincareState, points: int = 4001) -> MomentumGrid:
    return MomentumGrid.around(wavefunction(state), points=points)


def grid_position_moments(state: PoincareState, grid: MomentumGrid | None = None):
    """(<x_NW>, (Delta x_NW)^2) with the Newton-Wigner operator on a grid."""
    wf = wavefunction(state)
    grid = grid or default_grid(state)
    check_grid(grid, wf)
    u = grid.nodes
    phi = wf(u)
    w = measure_weight("invariant", u)
    x_phi = (1j / state.r) * (grid.derivative(phi) - 0.5 * u / (1 + u * u) * phi)
    norm = grid.integrate(np.abs(phi) ** 2 * w)
    mean = grid.integrate(np.real(np.conj(phi) * x_phi) * w) / norm
    x2 = grid.integrate(np.abs(x_phi) ** 2 * w) / norm
    return mean, x2 - mean * mean


# --- resolution of identity --------------------------------------------------


@dataclass(frozen=True)
class ExpProbe:
    """Test function c exp(-gamma sqrt(1+u^2) + delta u), gamma > |delta|."""

    gamma: float
    delta: float = 0.0
    c: float = 1.0

    def __post_init__(self):
        if not self.gamma > abs(self.delta):
            raise DomainError("probe needs gamma > |delta| to be normalisable")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return self.c * np.exp(-self.gamma * np.sqrt(1 + u * u) + self.delta * u)

    def on_rapidity(self, t):
        return self.c * np.exp(-self.gamma * np.cosh(t) + self.delta * np.sinh(t))

    def inner(self, other: "ExpProbe") -> float:
        """Closed form 2 K0(sqrt(G^2 - D^2)) under the invariant measure."""
        g = self.gamma + other.gamma
        d = self.delta + other.delta
        s = math.sqrt((g - d) * (g + d))
        return self.c * other.c * 2.0 * bessel_k_scaled(0, s) * math.exp(-s)

    @classmethod
    def from_state(cls, state: PoincareState) -> "ExpProbe":
        """The xbar = 0 coherent state as a probe (unit norm)."""
        return cls(state.b0, state.b, math.exp(state.log_norm))


def default_identity_grid(r: float) -> PhaseSpaceGrid:
    return PhaseSpaceGrid(
        position=(-30.0 / r, 30.0 / r, 301),
        label=(-7.0, 7.0, 141),
        momentum=(-9.0, 9.0, 721),
    )


def identity_resolution_check(phi: ExpProbe, psi: ExpProbe, r: float,
                              grid: PhaseSpaceGrid | None = None, tol: float = 1e-5,
                              weight: bool = True):
    """Reconstruct <phi|psi> from the phase-space integral with weight rho^2 / 2 pi.

    The integral runs over (xbar, pbar) in units of (sigma, mc); the momentum
    and pbar integrals are done in rapidity variables, u = sinh t and
    P rho = sinh s.  With ``weight=False`` the factor rho^2 is dropped
    (negative control).  Returns ``(reconstructed, direct)``.

    Raises
    ------
    GridResolutionError
        If the fine and half-resolution sums differ by more than ``tol``
        relative to the direct value.
    """
    _check_r(r)
    rh = rho(r)
    r2 = r * r
    grid = grid or default_identity_grid(r)
    t, wt = grid._axis(grid.momentum)
    log_c = r2 - 0.5 * math.log(2.0 * bessel_k_scaled(0, 2.0 * r2))

    def envelope(s):
        return np.exp(-r2 * np.cosh(t[None, :] - s[:, None]) + log_c)

    factor = rh * rh if weight else 1.0

    def density(s):
        # (rho^2 / 2 pi) dxbar dP  with  d(xbar) carrying r (units of 1/mc) and dP = cosh s ds / rho
        return factor * r * np.cosh(s) / (rh * 2.0 * math.pi)

    fine, coarse = phase_space_sum(
        grid, phi.on_rapidity(t), psi.on_rapidity(t), wt, r * np.sinh(t), envelope, density
    )
    direct = phi.inner(psi)
    if abs(fine - coarse) > tol * abs(direct):
        raise GridResolutionError(
            f"phase-space grid too coarse: fine/coarse sums differ by {abs(fine - coarse):.3g}",
            value=fine,
            residual=abs(fine - coarse),
        )
    return fine, direct


# --- group construction ------------------------------------------------------


@dataclass(frozen=True)
class BoostSection:
    """Phase-space point (q, k) and time parameter tau of the section, mass m."""

    k: float
    q: float = 0.0
    tau: float = 0.0
    m: float = 1.0

    def __post_init__(self):
        if not self.m > 0:
            raise DomainError("mass must be positive")

    @property
    def k0(self) -> float:
        return math.hypot(self.k, self.m)

    @property
    def lambda_k(self) -> np.ndarray:
        return boost_matrix(self.k, self.m)

    @property
    def section_matrix(self) -> np.ndarray:
        g = np.eye(3)
        g[:2, :2] = self.lambda_k
        g[0, 2] = self.tau * self.k0 / self.m
        g[1, 2] = (self.tau * self.k + self.m * self.q) / self.m
        return g


def boost_matrix(k: float, m: float = 1.0) -> np.ndarray:
    k0 = math.hypot(k, m)
    return np.array([[k0, k], [k, k0]]) / m


def group_element(lam: np.ndarray, a) -> np.ndarray:
    g = np.eye(3)
    g[:2, :2] = lam
    g[:2, 2] = a
    return g


def factorize(k: float, x, m: float = 1.0) -> tuple[float, float]:
    """(q, tau) with g(Lambda_k, x) = g(Lambda_k, (0, q)) g(I, (tau, 0))."""
    t, x1 = x
    k0 = math.hypot(k, m)
    tau = m * t / k0
    return x1 - t * k / k0, tau


def section_factorization_check(k: float, x, m: float = 1.0) -> float:
    """Max elementwise residual of the factorisation and of the section matrix."""
    lam = boost_matrix(k, m)
    q, tau = factorize(k, x, m)
    lhs = group_element(lam, x)
    rhs = group_element(lam, (0.0, q)) @ group_element(np.eye(2), (tau, 0.0))
    sec = BoostSection(k, q, tau, m).section_matrix
    return float(max(np.max(np.abs(lhs - rhs)), np.max(np.abs(sec - lhs))))


def _probe_log_norm(kappa: float, m: float) -> float:
    x = 2.0 * m / kappa
    return 0.5 * (x - math.log(2.0 * m * bessel_k_scaled(0, x)))


def generate_from_section(section: BoostSection, kappa: float, p) -> np.ndarray:
    """U(sigma_tau(q, k)) psi0 at momenta ``p``, with psi0 = C exp(-p0 / kappa).

    The probe is evaluated at Lambda_k^{-1} p with the inverse boost obtained
    numerically; units hbar = c = 1.
    """
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    m, k, k0 = section.m, section.k, section.k0
    p = np.asarray(p, dtype=float)
    p0 = np.sqrt(p * p + m * m)
    inv = np.linalg.inv(section.lambda_k)
    boosted0 = inv[0, 0] * p0 + inv[0, 1] * p
    phase = (k0 / m) * p0 * section.tau - ((k / m) * p * section.tau + p * section.q)
    return np.exp(1j * phase - boosted0 / kappa + _probe_log_norm(kappa, m))


def section_closed_form(section: BoostSection, kappa: float, p) -> np.ndarray:
    """C exp(-k0 p0 / (kappa m) + k p / (kappa m) - i p q) (time-zero section)."""
    m, k, k0 = section.m, section.k, section.k0
    p = np.asarray(p, dtype=float)
    p0 = np.sqrt(p * p + m * m)
    return np.exp(-(k0 * p0 - k * p) / (kappa * m) - 1j * p * section.q + _probe_log_norm(kappa, m))


def kaiser_amplitude(a: float, b: float, eta: float, p, m: float = 1.0) -> np.ndarray:
    """C exp(-sqrt(b^2 + eta^2) p0 + b p - i a p) with C^2 = 1 / (2 m K0(2 m eta))."""
    p = np.asarray(p, dtype=float)
    p0 = np.sqrt(p * p + m * m)
    log_c = 0.5 * (2.0 * m * eta - math.log(2.0 * m * bessel_k_scaled(0, 2.0 * m * eta)))
    return np.exp(-math.hypot(b, eta) * p0 + b * p - 1j * a * p + log_c)


def kaiser_from_section(section: BoostSection, kappa: float) -> tuple[float, float, float]:
    """(a, b, eta) of the Kaiser form describing the same state as the section."""
    km = kappa * section.m
    return section.q, section.k / km, 1.0 / kappa


def section_for_state(state: PoincareState) -> tuple[BoostSection, float]:
    """The time-zero section (m = 1) and probe constant kappa generating ``state``."""
    return BoostSection(k=state.pbar * state.rho, q=state.a, tau=0.0, m=1.0), 1.0 / state.eta
