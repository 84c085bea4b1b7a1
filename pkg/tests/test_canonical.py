import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from relcoh import canonical
from relcoh.canonical import (
    CanonicalState,
    GaussianProbe,
    Scale,
    identity_resolution_check,
    mean_energy_massive,
    mean_energy_massless,
    mean_energy_massless_quadrature,
    mean_velocity,
    overlap,
    threshold_scan,
    uncertainty_product,
)
from relcoh.errors import DomainError, GridResolutionError
from relcoh.momentum import PhaseSpaceGrid

# frozen values from 30-digit mpmath quadrature of the momentum density
ENERGY_REF = {
    (0.0, 5.0): 1.0098569150483731,
    (0.0, 1.0): 1.2003469347909477,
    (1.0, 2.0): 1.1622528404634892,
    (4.0, 8.0): 1.1208288834070339,
    (2.0, 1.0): 2.2646238690399632,
}
VELOCITY_REF = {
    (1.0, 2.0): 0.40278652992737306,
    (4.0, 8.0): 0.44390120754238668,
    (2.0, 1.0): 0.8581216138299866,
}
MASSLESS_REF = 1.3365372422071727  # at sbar = 2 pi * 0.21

labels = st.floats(-4.0, 4.0, allow_nan=False)
scales = st.floats(0.5, 20.0)


@pytest.mark.parametrize("key", sorted(ENERGY_REF))
@pytest.mark.parametrize("method", ["series", "quadrature"])
def test_energy_frozen(key, method):
    p, r = key
    assert mean_energy_massive(p, r, method) == pytest.approx(ENERGY_REF[key], rel=1e-11)


@pytest.mark.parametrize("key", sorted(VELOCITY_REF))
@pytest.mark.parametrize("method", ["series", "quadrature"])
def test_velocity_frozen(key, method):
    p, r = key
    assert mean_velocity(p, r, method) == pytest.approx(VELOCITY_REF[key], rel=1e-10)


def test_massless_frozen():
    s = 2 * math.pi * 0.21
    assert mean_energy_massless(s) == pytest.approx(MASSLESS_REF, rel=1e-14)
    assert mean_energy_massless_quadrature(s) == pytest.approx(MASSLESS_REF, rel=1e-11)


def test_energy_at_r5_is_about_one_percent_high():
    e = mean_energy_massive(0.0, 5.0)
    assert 0.005 <= (e - 1) / e <= 0.015


def test_threshold_scan_finds_r_near_5():
    r = threshold_scan(0.01)
    assert 4.9 < r < 5.0
    assert canonical.relative_energy_excess(r) <= 0.01


@given(labels, scales)
def test_energy_parity(p, r):
    assert mean_energy_massive(-p, r) == mean_energy_massive(p, r)


@given(labels, scales)
def test_velocity_odd_and_subluminal(p, r):
    v = mean_velocity(p, r)
    assert abs(v) < 1
    assert mean_velocity(-p, r) == pytest.approx(-v, abs=1e-15)


@given(labels, scales)
def test_energy_exceeds_rest_and_kinetic(p, r):
    # Jensen: <sqrt(1+u^2)> >= sqrt(1 + <u>^2)
    assert mean_energy_massive(p, r) >= math.hypot(1.0, p / r) * (1 - 1e-14)


@given(st.floats(-3, 3), st.floats(0.7, 10.0))
def test_velocity_is_energy_slope(p, r):
    h = 1e-4
    slope = (mean_energy_massive(p + h, r) - mean_energy_massive(p - h, r)) / (2 * h)
    assert mean_velocity(p, r) == pytest.approx(r * slope, rel=1e-6, abs=1e-9)


@given(st.floats(0.0, 8.0))
def test_massless_energy_above_classical(s):
    # the excess is ~ exp(-s^2) and drops below one ulp of s near s = 6
    assert mean_energy_massless(s) >= s
    if s < 4:
        assert mean_energy_massless(s) > s


@given(st.floats(0.0, 9.0))
def test_massless_excess_accurate(s):
    import mpmath as mp

    ref = (mp.exp(-s * s) / mp.sqrt(mp.pi) - s * mp.erfc(s)) / (s * mp.erf(s) + mp.exp(-s * s) / mp.sqrt(mp.pi))
    assert canonical.relative_energy_excess(s, "massless") == pytest.approx(float(ref), rel=1e-12, abs=1e-300)


def test_massless_limit_of_massive():
    # r -> 0 with sbar fixed: E (in mc^2) * r -> massless energy (in c hbar / sigma)
    s = 1.1
    assert mean_energy_massive(s, 1e-3) * 1e-3 == pytest.approx(mean_energy_massless(s), rel=1e-5)


@pytest.mark.parametrize("p", [0.0, 0.5, 1.0, 2.0])
def test_nonrelativistic_limit(p):
    r = 50.0
    kinetic = (p * p + 0.5) / (2 * r * r)
    assert (mean_energy_massive(p, r) - 1.0) == pytest.approx(kinetic, rel=1e-3)


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_minimum_uncertainty(x, p):
    vx, vp, prod = uncertainty_product(CanonicalState(x, p))
    assert vx == pytest.approx(0.5, abs=1e-9)
    assert vp == pytest.approx(0.5, abs=1e-9)
    assert prod == pytest.approx(0.25, abs=1e-9)


@given(labels, labels)
def test_norm_and_mean(x, p):
    wf = canonical.wavefunction(CanonicalState(x, p))
    assert wf.norm() == pytest.approx(1.0, rel=1e-12)
    assert wf.expectation(lambda k: k) == pytest.approx(p, abs=1e-10)


@given(labels, labels, labels, labels)
def test_overlap_properties(x1, p1, x2, p2):
    a, b = CanonicalState(x1, p1), CanonicalState(x2, p2)
    ab = overlap(a, b)
    assert abs(ab) <= 1 + 1e-15
    assert overlap(b, a) == pytest.approx(ab.conjugate(), abs=1e-15)
    assert abs(ab) ** 2 == pytest.approx(math.exp(-0.5 * ((x1 - x2) ** 2 + (p1 - p2) ** 2)), rel=1e-12)


@pytest.mark.parametrize("pair", [((0.3, -0.4), (1.0, 0.8)), ((-2.0, 1.5), (0.0, 0.0)), ((1.0, 1.0), (1.0, 1.0))])
def test_overlap_matches_quadrature(pair):
    a, b = CanonicalState(*pair[0]), CanonicalState(*pair[1])
    ref = canonical.wavefunction(a).inner(canonical.wavefunction(b))
    assert overlap(a, b) == pytest.approx(ref, abs=1e-12)


def test_from_z_round_trip():
    s = CanonicalState(0.7, -1.9)
    t = CanonicalState.from_z(s.z)
    assert (t.xbar, t.pbar) == pytest.approx((0.7, -1.9), abs=1e-15)


def test_resolution_of_identity():
    phi = GaussianProbe(center=0.4, width=1.3, offset=-0.5)
    psi = GaussianProbe(center=-0.2, width=0.8, offset=0.9)
    assert identity_resolution_check(phi, psi) < 1e-6


def test_resolution_coarse_grid_detected():
    phi, psi = GaussianProbe(0.0, 1.0, 0.0), GaussianProbe(1.0, 1.0, 2.0)
    coarse = PhaseSpaceGrid(position=(-3, 3, 7), label=(-3, 3, 7), momentum=(-8, 8, 101))
    with pytest.raises(GridResolutionError):
        identity_resolution_check(phi, psi, coarse)


def test_massless_scale_rules():
    assert Scale.massless().r is None
    with pytest.raises(DomainError):
        Scale(None)
    with pytest.raises(DomainError):
        Scale(2.0, "massless")


@pytest.mark.parametrize("r", [0.0, -1.0, math.inf, math.nan])
def test_bad_r(r):
    with pytest.raises(DomainError):
        mean_energy_massive(0.0, r)


def test_bad_label():
    with pytest.raises(DomainError):
        CanonicalState(math.nan, 0.0)


def test_unknown_method():
    with pytest.raises(ValueError):
        mean_energy_massive(0.0, 1.0, method="magic")


def test_moment_report_massless():
    rep = canonical.moment_report(CanonicalState(0.0, 1.3), Scale.massless())
    assert rep.momentum is None
    assert rep.velocity == pytest.approx(math.erf(1.3))
    assert rep.methods["energy"] == "closed_form"


def test_series_is_fast():
    import time

    t0 = time.perf_counter()
    for p in np.linspace(0, 4, 20):
        mean_energy_massive(p, 2.0)
    assert time.perf_counter() - t0 < 5.0


def test_large_pbar_falls_back_to_quadrature():
    with pytest.raises(canonical.ConvergenceError):
        mean_energy_massive(60.0, 2.0)
    rep = canonical.moment_report(CanonicalState(0.0, 60.0), Scale(2.0))
    assert rep.methods["energy"] == "quadrature"
    assert rep.energy == pytest.approx(math.sqrt(1 + 30.0**2), rel=1e-3)
