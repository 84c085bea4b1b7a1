"""Canonical (Gaussian) coherent states and their relativistic averages.

Conventions: positions in units of sigma, the momentum variable is
``k = sigma p / hbar`` with the flat scalar product ``int dk``, and
``r = sigma / lambda_c`` is the width in Compton wavelengths, so that
``p / mc = k / r``.  Energies are returned in mc^2 (massive) or
c hbar / sigma (massless), velocities in c.

The states are

    phi(k) = pi^(-1/4) exp(-(k - pbar)^2 / 2 - i xbar k + i xbar pbar / 2),

i.e. the z-labelled form; the constant phase ``exp(i xbar pbar / 2)`` makes
:func:`overlap` come out as ``exp(-(|z|^2 + |w|^2 - 2 conj(z) w) / 2)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ConvergenceError, DomainError, GridResolutionError
from .momentum import (
    MOMENT_CFG,
    MomentReport,
    MomentumWavefunction,
    PhaseSpaceGrid,
    phase_space_sum,
)
from .quad import QuadratureConfig, integrate_line
from .specfun import confluent_u, erf

SQRT_PI = math.sqrt(math.pi)
N_MAX = 400
SERIES_TOL = 1e-12

Method = Literal["series", "quadrature"]


@dataclass(frozen=True)
class Scale:
    """Width ratio ``r = sigma / lambda_c`` and the mass regime.

    A massless scale has no Compton wavelength; its energies are measured in
    c hbar / sigma and ``r`` is ``None``.
    """

    r: float | None
    regime: Literal["massive", "massless"] = "massive"

    def __post_init__(self):
        if self.regime == "massive":
            if self.r is None or not (math.isfinite(self.r) and self.r > 0):
                raise DomainError(f"massive scale needs finite r > 0, got {self.r!r}")
        elif self.regime == "massless":
            if self.r is not None:
                raise DomainError("a massless scale has no Compton wavelength; pass r=None")
        else:
            raise DomainError(f"unknown regime {self.regime!r}")

    @classmethod
    def massless(cls) -> "Scale":
        return cls(None, "massless")


@dataclass(frozen=True)
class CanonicalState:
    xbar: float
    pbar: float
    z: complex = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.xbar) and math.isfinite(self.pbar)):
            raise DomainError("phase-space label must be finite")
        object.__setattr__(self, "z", complex(self.xbar, self.pbar) / math.sqrt(2.0))

    @classmethod
    def from_z(cls, z: complex) -> "CanonicalState":
        return cls(math.sqrt(2.0) * z.real, math.sqrt(2.0) * z.imag)


def wavefunction(state: CanonicalState) -> MomentumWavefunction:
    x, p = state.xbar, state.pbar
    norm = math.pi ** -0.25
    phase = x * p / 2.0

    def amp(k):
        return norm * np.exp(-0.5 * (k - p) ** 2 - 1j * (x * k - phase))

    def dlog(k):
        return -(k - p) - 1j * x

    return MomentumWavefunction(amp, dlog, "flat", center=p, width=1.0, variable="sigma p / hbar")


def overlap(a: CanonicalState, b: CanonicalState) -> complex:
    z, w = a.z, b.z
    # exp(-(|z|^2 + |w|^2 - 2 conj(z) w) / 2), arranged so that |<a|b>| <= 1 exactly
    return cmath.exp(complex(-0.5 * abs(z - w) ** 2, (z.conjugate() * w).imag))


def _check_r(r):
    if not (math.isfinite(r) and r > 0):
        raise DomainError(f"r = sigma/lambda_c must be positive, got {r!r}")


def _poisson_series(lam, term, what):
    """sum_n e^-lam lam^n / n! * term(n), summed with fsum until converged."""
    terms = []
    log_lam = math.log(lam) if lam > 0 else -math.inf
    for n in range(N_MAX + 1):
        if lam == 0:
            logw = 0.0 if n == 0 else -math.inf
        else:
            logw = -lam + n * log_lam - math.lgamma(n + 1.0)
        if logw == -math.inf:
            break
        t = math.exp(logw) * term(n)
        terms.append(t)
        if n > lam and abs(t) < SERIES_TOL * abs(math.fsum(terms)):
            break
    else:
        total = math.fsum(terms)
        raise ConvergenceError(
            f"{what} series not converged after {N_MAX} terms",
            value=total,
            residual=abs(terms[-1]),
        )
    return math.fsum(terms)


def _expect(pbar, g, cfg):
    def f(k):
        return np.exp(-(k - pbar) ** 2) * g(k) / SQRT_PI

    return integrate_line(f, cfg or MOMENT_CFG, center=pbar, width=1.0).value


def mean_energy_massive(pbar: float, r: float, method: Method = "series",
                        cfg: QuadratureConfig | None = None) -> float:
    """Mean of sqrt(p^2 c^2 + m^2 c^4) in units of mc^2.

    Parameters
    ----------
    pbar : float
        sigma pbar / hbar.
    r : float
        sigma / lambda_c.
    method : {"series", "quadrature"}
        Poisson-weighted series of Tricomi functions, or direct quadrature.
    """
    _check_r(r)
    if method == "series":
        z = r * r
        return _poisson_series(pbar * pbar, lambda n: confluent_u(-0.5, -n, z), "energy") / r
    if method == "quadrature":
        return _expect(pbar, lambda k: np.sqrt(1.0 + (k / r) ** 2), cfg)
    raise ValueError(f"unknown method {method!r}")


def mean_energy_massless(sbar: float) -> float:
    """Mean of c|p| in units of c hbar / sigma; ``sbar = sigma pbar / hbar``."""
    s = abs(sbar)
    return s * erf(s) + math.exp(-s * s) / SQRT_PI


def mean_energy_massless_quadrature(sbar: float, cfg: QuadratureConfig | None = None) -> float:
    return _expect(sbar, np.abs, cfg)


def mean_velocity(pbar: float, r: float, method: Method = "series",
                  cfg: QuadratureConfig | None = None) -> float:
    """Mean of c p / sqrt(p^2 + m^2 c^2) in units of c."""
    _check_r(r)
    if method == "series":
        if pbar == 0:
            return 0.0
        z = r * r
        return pbar * _poisson_series(pbar * pbar, lambda n: confluent_u(0.5, -n, z), "velocity")
    if method == "quadrature":
        return _expect(pbar, lambda k: (k / r) / np.sqrt(1.0 + (k / r) ** 2), cfg)
    raise ValueError(f"unknown method {method!r}")


def uncertainty_product(state: CanonicalState, cfg: QuadratureConfig | None = None):
    """Position and momentum variances by quadrature over the wavefunction.

    Returns ``(var_x, var_p, product)`` in sigma^2, (hbar/sigma)^2 and hbar^2.
    """
    wf = wavefunction(state)
    return flat_variances(wf, cfg)


def flat_variances(wf: MomentumWavefunction, cfg: QuadratureConfig | None = None):
    """(var_x, var_p, product) for a flat-measure wavefunction, x = (i/scale) d/dk."""
    cfg = cfg or MOMENT_CFG
    s = wf.scale
    rho = wf.density
    k1 = wf.expectation(lambda k: k, cfg)
    k2 = wf.expectation(lambda k: k * k, cfg)
    # <x> = Re int i L |phi|^2 / s ;  <x^2> = int |L|^2 |phi|^2 / s^2
    x1 = wf._integrate(lambda k: np.real(1j * wf.log_derivative(k)) * rho(k), cfg) / s
    x2 = wf._integrate(lambda k: np.abs(wf.log_derivative(k)) ** 2 * rho(k), cfg) / s**2
    var_x = x2 - x1 * x1
    var_p = (k2 - k1 * k1) * s * s
    return var_x, var_p, var_x * var_p


# --- resolution of identity ----------------------------------------------


@dataclass(frozen=True)
class GaussianProbe:
    """Unnormalised test function exp(-(k - center)^2 / (2 width^2) - i offset k)."""

    center: float = 0.0
    width: float = 1.0
    offset: float = 0.0

    def __call__(self, k):
        return np.exp(-((k - self.center) ** 2) / (2 * self.width**2) - 1j * self.offset * k)

    def inner(self, other: "GaussianProbe") -> complex:
        """Closed-form flat inner product <self|other>."""
        a = 0.5 / self.width**2 + 0.5 / other.width**2
        b = self.center / self.width**2 + other.center / other.width**2 + 1j * (self.offset - other.offset)
        c = 0.5 * self.center**2 / self.width**2 + 0.5 * other.center**2 / other.width**2
        return math.sqrt(math.pi / a) * cmath.exp(b * b / (4 * a) - c)


def default_grid(phi: GaussianProbe, psi: GaussianProbe) -> PhaseSpaceGrid:
    xc = 0.5 * (phi.offset + psi.offset)
    kc = 0.5 * (phi.center + psi.center)
    wmax = max(phi.width, psi.width, 1.0)
    xs = 14.0 + 0.5 * abs(phi.offset - psi.offset)
    ks = 14.0 * wmax + 0.5 * abs(phi.center - psi.center)
    kspan = 12.0 * wmax + 0.5 * abs(phi.center - psi.center)
    return PhaseSpaceGrid(
        position=(xc - xs, xc + xs, 141),
        label=(kc - ks, kc + ks, 141),
        momentum=(kc - kspan, kc + kspan, 961),
    )


def identity_resolution_check(phi: GaussianProbe, psi: GaussianProbe,
                              grid: PhaseSpaceGrid | None = None, tol: float = 1e-6) -> float:
    """|(2 pi)^-1 sum dx dp <phi|x,p><x,p|psi> - <phi|psi>| on a phase-space grid.

    Raises
    ------
    GridResolutionError
        If the fine and half-resolution sums differ by more than ``tol``.
    """
    grid = grid or default_grid(phi, psi)
    k, wk = grid._axis(grid.momentum)
    norm = math.pi ** -0.25

    def envelope(labels):
        return norm * np.exp(-0.5 * (k[None, :] - labels[:, None]) ** 2)

    fine, coarse = phase_space_sum(
        grid, phi(k), psi(k), wk, k, envelope, lambda labels: np.full_like(labels, 1 / (2 * math.pi))
    )
    if abs(fine - coarse) > tol:
        raise GridResolutionError(
            f"phase-space grid too coarse: fine/coarse sums differ by {abs(fine - coarse):.3g}",
            value=fine,
            residual=abs(fine - coarse),
        )
    return abs(fine - phi.inner(psi))


# --- thresholds and reports -----------------------------------------------


def relative_energy_excess(value: float, regime: str = "massive") -> float:
    """(E - E_classical) / E at pbar = 0 (massive, in r) or at sbar (massless)."""
    if regime == "massive":
        e = mean_energy_massive(0.0, value)
        return (e - 1.0) / e
    if regime == "massless":
        s = abs(value)
        # E - s = exp(-s^2)/sqrt(pi) - s erfc(s), free of the cancellation in E - s
        return (math.exp(-s * s) / SQRT_PI - s * math.erfc(s)) / mean_energy_massless(s)
    raise ValueError(f"unknown regime {regime!r}")


def threshold_scan(target: float, regime: str = "massive", lo: float = 0.05, hi: float = 100.0,
                   resolution: float = 1e-3) -> float:
    """Smallest scale whose relative energy excess is at most ``target``.

    For ``massive`` the scale is r = sigma/lambda_c at pbar = 0; for
    ``massless`` it is sbar = sigma pbar / hbar.  Bisection relies on the excess
    decreasing monotonically in the scale.
    """
    if not 0 < target < 1:
        raise DomainError("target must lie in (0, 1)")
    f = lambda v: relative_energy_excess(v, regime) - target  # noqa: E731
    if f(hi) > 0:
        raise ConvergenceError(f"target {target} not reached below {hi}", value=hi)
    if f(lo) <= 0:
        return lo
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def moment_report(state: CanonicalState, scale: Scale, method: Method = "series") -> MomentReport:
    rep = MomentReport()
    rep.set("var_x", 0.5, "closed_form")
    rep.set("var_p", 0.5, "closed_form")
    rep.set("product_xp", 0.25, "closed_form")
    if scale.regime == "massless":
        rep.set("energy", mean_energy_massless(state.pbar), "closed_form")
        rep.set("velocity", float(np.sign(state.pbar)) * erf(abs(state.pbar)), "closed_form")
        return rep
    r = scale.r
    for name, fn in (("energy", mean_energy_massive), ("velocity", mean_velocity)):
        try:
            rep.set(name, fn(state.pbar, r, method), method)
        except ConvergenceError:
            # the Poisson weights peak near n = pbar^2, beyond N_MAX for |pbar| > ~17
            rep.set(name, fn(state.pbar, r, "quadrature"), "quadrature")
    rep.set("momentum", state.pbar / r, "closed_form")
    return rep
