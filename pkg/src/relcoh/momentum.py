"""Momentum-space wavefunctions, finite-difference grids and phase-space sums.

Two scalar products appear:

``flat``
    :math:`\\langle\\phi|\\psi\\rangle = \\int dk\\, \\phi^*\\psi` in the
    dimensionless momentum variable of the state.
``invariant``
    :math:`\\int du/\\sqrt{1+u^2}\\, \\phi^*\\psi` with :math:`u = p/mc`, the
    Lorentz-invariant measure on the mass shell.

Position operators act as ``(i / scale) d/dk`` where ``scale`` converts the
momentum variable to units of hbar/sigma (``scale = 1`` when the variable is
already sigma p / hbar, ``scale = r`` when it is p / mc).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .errors import GridResolutionError
from .quad import QuadratureConfig, integrate_line

Measure = Literal["flat", "invariant"]

# moments are O(1); an absolute floor lets odd integrands with zero mean terminate
MOMENT_CFG = QuadratureConfig(rel_tol=1e-12, abs_tol=1e-15, max_subdivisions=4000)


def measure_weight(measure: Measure, k):
    k = np.asarray(k, dtype=float)
    if measure == "flat":
        return np.ones_like(k)
    if measure == "invariant":
        return 1.0 / np.sqrt(1.0 + k * k)
    raise ValueError(f"unknown measure {measure!r}")


@dataclass(frozen=True)
class MomentumWavefunction:
    """Closed-form normalised amplitude in a dimensionless momentum variable.

    ``amplitude`` maps an array of momenta to complex amplitudes and
    ``log_derivative`` to d(log amplitude)/dk, so that position moments can be
    integrated without numerical differentiation.  ``center`` and ``width``
    describe where the probability density lives and steer quadrature.
    """

    amplitude: Callable[[np.ndarray], np.ndarray]
    log_derivative: Callable[[np.ndarray], np.ndarray]
    measure: Measure
    center: float
    width: float
    variable: str
    scale: float = 1.0

    def __call__(self, k):
        return self.amplitude(np.asarray(k, dtype=float))

    def derivative(self, k):
        k = np.asarray(k, dtype=float)
        return self.log_derivative(k) * self.amplitude(k)

    def density(self, k):
        """|phi|^2 times the measure weight, i.e. the probability density in k."""
        k = np.asarray(k, dtype=float)
        return np.abs(self.amplitude(k)) ** 2 * measure_weight(self.measure, k)

    def _integrate(self, f, cfg):
        return integrate_line(f, cfg or MOMENT_CFG, center=self.center, width=self.width).value

    def inner(self, other: "MomentumWavefunction", cfg: QuadratureConfig | None = None) -> complex:
        if other.measure != self.measure:
            raise ValueError("scalar product between different measures")

        def f(k):
            return np.conj(self.amplitude(k)) * other.amplitude(k) * measure_weight(self.measure, k)

        center = 0.5 * (self.center + other.center)
        width = max(self.width, other.width, 0.5 * abs(self.center - other.center))
        return complex(integrate_line(f, cfg or MOMENT_CFG, center=center, width=width).value)

    def norm(self, cfg: QuadratureConfig | None = None) -> float:
        return float(self._integrate(self.density, cfg))

    def expectation(self, g: Callable, cfg: QuadratureConfig | None = None) -> float:
        """<g(k)> for a real multiplication operator g."""
        return float(self._integrate(lambda k: g(k) * self.density(k), cfg))


# --- finite differences --------------------------------------------------

# central first-derivative stencils, keyed by order of accuracy
_STENCILS = {
    2: np.array([-1 / 2, 0, 1 / 2]),
    4: np.array([1 / 12, -2 / 3, 0, 2 / 3, -1 / 12]),
    6: np.array([-1 / 60, 3 / 20, -3 / 4, 0, 3 / 4, -3 / 20, 1 / 60]),
    8: np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105, -1 / 280]),
}


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform grid on [lo, hi] with ``points`` nodes."""

    lo: float
    hi: float
    points: int = 2001
    order: int = 8
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("grid needs hi > lo")
        if self.points < 2 * self.order + 3:
            raise ValueError(f"grid needs at least {2 * self.order + 3} points")
        if self.order not in _STENCILS:
            raise ValueError(f"finite-difference order must be one of {sorted(_STENCILS)}")
        object.__setattr__(self, "nodes", np.linspace(self.lo, self.hi, self.points))

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.points - 1)

    def derivative(self, values):
        """Central finite-difference derivative; the edges fall back to 2nd order."""
        values = np.asarray(values)
        stencil = _STENCILS[self.order]
        half = len(stencil) // 2
        out = np.gradient(values, self.spacing, edge_order=2)
        core = np.zeros(values.shape[0] - 2 * half, dtype=np.result_type(values, float))
        for j, c in enumerate(stencil):
            if c:
                core = core + c * values[j:j + len(core)]
        out[half:-half] = core / self.spacing
        return out

    def integrate(self, values):
        """Trapezoid rule; spectrally accurate for smooth data decaying at the edges."""
        values = np.asarray(values)
        h = self.spacing
        return h * (values.sum() - 0.5 * (values[0] + values[-1]))

    @classmethod
    def around(cls, wf: MomentumWavefunction, points: int = 2001, order: int = 8,
               log_floor: float = -80.0) -> "MomentumGrid":
        """Grid covering the region where log(density / peak) > ``log_floor``."""
        peak = float(wf.density(np.array([wf.center]))[0])

        def edge(direction):
            d = wf.width
            for _ in range(200):
                rho = float(wf.density(np.array([wf.center + direction * d]))[0])
                if rho <= 0 or np.log(rho / peak) < log_floor:
                    return wf.center + direction * d
                d *= 1.2
            raise GridResolutionError("density does not decay; cannot size the grid")

        return cls(edge(-1.0), edge(+1.0), points, order)


def check_grid(grid: MomentumGrid, wf: MomentumWavefunction, tol: float = 1e-10) -> float:
    """Norm on the grid versus its half-resolution subgrid.

    Raises :class:`GridResolutionError` if they differ by more than ``tol`` or
    the density does not vanish at the grid edges.
    """
    rho = wf.density(grid.nodes)
    fine = grid.integrate(rho)
    coarse_vals = rho[::2]
    h = 2 * grid.spacing
    coarse = h * (coarse_vals.sum() - 0.5 * (coarse_vals[0] + coarse_vals[-1]))
    edge = max(rho[0], rho[-1]) * grid.spacing
    if abs(fine - coarse) > tol or edge > tol:
        raise GridResolutionError(
            f"grid [{grid.lo:.4g}, {grid.hi:.4g}] x {grid.points} under-resolves the state: "
            f"norm change {abs(fine - coarse):.3g}, edge mass {edge:.3g}",
            value=fine,
            residual=max(abs(fine - coarse), edge),
        )
    return abs(fine - coarse)


# --- phase-space reconstruction -------------------------------------------


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform grid over phase-space labels plus the momentum quadrature grid.

    ``position`` and ``label`` are ``(lo, hi, points)`` triples; ``points`` must
    be odd so the every-other-node subgrid spans the same range.
    """

    position: tuple[float, float, int]
    label: tuple[float, float, int]
    momentum: tuple[float, float, int]

    def __post_init__(self):
        for name in ("position", "label"):
            lo, hi, n = getattr(self, name)
            if not hi > lo or n < 5 or n % 2 == 0:
                raise ValueError(f"{name} grid needs hi > lo and an odd count >= 5")
        lo, hi, n = self.momentum
        if not hi > lo or n < 3:
            raise ValueError("momentum grid needs hi > lo and at least 3 points")

    @staticmethod
    def _axis(spec):
        lo, hi, n = spec
        x = np.linspace(lo, hi, n)
        return x, trapezoid_weights(n, (hi - lo) / (n - 1))


def reconstruct(
    phi_vals,
    psi_vals,
    momentum_weights,
    envelopes,
    positions,
    position_weights,
    label_weights,
    frequencies,
):
    r"""Evaluate :math:`\sum_{x, l} w_x w_l \langle\phi|x,l\rangle\langle x,l|\psi\rangle`.

    The states are ``envelope[l, j] * exp(-i x * frequencies[j])`` on the
    momentum nodes ``j``; ``momentum_weights`` already include the measure.
    """
    phase = np.exp(1j * np.outer(positions, frequencies))          # (X, J)
    a_phi = envelopes * (momentum_weights * np.conj(phi_vals))     # (L, J)
    a_psi = envelopes * (momentum_weights * psi_vals)
    # <x,l|psi> = sum_j env * e^{+i x f} w psi ;  <phi|x,l> = its analogue conjugated
    c_psi = a_psi @ phase.T                                         # (L, X)
    c_phi = np.conj(np.conj(a_phi) @ phase.T)
    return np.einsum("lx,l,x->", c_phi * c_psi, label_weights, position_weights)


def phase_space_sum(grid: PhaseSpaceGrid, phi_vals, psi_vals, momentum_weights, frequencies,
                    envelope: Callable, label_density: Callable):
    """Phase-space reconstruction on ``grid`` and on its every-other-node subgrid.

    ``envelope(labels)`` returns the ``(L, J)`` state envelopes on the momentum
    nodes and ``label_density(labels)`` the resolution-of-identity weight per
    unit label and unit position.  Returns ``(fine, coarse)``; for the smooth
    integrands used here the trapezoid rule converges faster than any power, so
    ``|fine - coarse|`` bounds the error of ``coarse`` and, generously, of ``fine``.
    """
    x, wx = grid._axis(grid.position)
    lab, wl = grid._axis(grid.label)
    env = envelope(lab)
    dens = label_density(lab)
    fine = reconstruct(phi_vals, psi_vals, momentum_weights, env, x, wx, wl * dens, frequencies)
    hx = 2 * (x[1] - x[0])
    hl = 2 * (lab[1] - lab[0])
    coarse = reconstruct(
        phi_vals, psi_vals, momentum_weights, env[::2], x[::2],
        trapezoid_weights(len(x[::2]), hx),
        trapezoid_weights(len(lab[::2]), hl) * dens[::2],
        frequencies,
    )
    return complex(fine), complex(coarse)


# --- reports ----------------------------------------------------------------


@dataclass
class MomentReport:
    """Dimensionless moments of one state.

    Units: energy in mc^2 (c hbar / sigma for massless states), momentum in mc,
    velocity in c, ``var_x`` in sigma^2, ``var_p`` in (hbar/sigma)^2, ``var_v``
    in c^2; ``product_xp`` in hbar^2.  ``methods`` maps each filled field to
    how it was obtained (``closed_form``, ``series``, ``quadrature`` or
    ``oracle``).
    """

    energy: float | None = None
    momentum: float | None = None
    velocity: float | None = None
    var_x: float | None = None
    var_p: float | None = None
    var_v: float | None = None
    product_xp: float | None = None
    product_xv: float | None = None
    methods: dict[str, str] = field(default_factory=dict)

    FIELDS = ("energy", "momentum", "velocity", "var_x", "var_p", "var_v",
              "product_xp", "product_xv")

    def set(self, name: str, value: float, method: str) -> None:
        if name not in self.FIELDS:
            raise KeyError(name)
        setattr(self, name, float(value))
        self.methods[name] = method

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.FIELDS if getattr(self, k) is not None}
        out["methods"] = dict(self.methods)
        return out
