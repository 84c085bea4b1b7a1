import math

import pytest
from hypothesis import given, strategies as st

from relcoh import lorentzian
from relcoh.canonical import Scale
from relcoh.errors import DomainError
from relcoh.lorentzian import (
    LorentzianState,
    beta_for_momentum,
    eigen_residual,
    grid_moments,
    mean_energy,
    mean_momentum,
    momentum_variance,
    overlap,
    quadrature_moments,
    variance_factor,
    variances_xv,
)

# (beta, r) -> (Q, (Delta p / mc)^2) from 30-digit mpmath quadrature with the
# peak resolved by explicit breakpoints
FROZEN = {
    (0.0, 8.0): (0.0077225173811975065, 0.007904230165461385),
    (0.5, 2.0): (0.072727075967607665, 0.24647397942675845),
    (0.8, 8.0): (0.00169616669204894, 0.037332676514689011),
    (-0.95, 1.0): (0.022664635050997704, 106.90097567731018),
    (0.4, 2.0): (0.084476285173367421, 0.20219837347318884),
}
# mean momentum (mc) and energy (mc^2) at r = 8
AVERAGES_R8 = {
    0.2: (0.206570379776344, 1.02503939888172),
    0.5: (0.585180231429259, 1.16254796285852),
    0.8: (1.3594586857148, 1.6915108571435),
}

betas = st.floats(-0.95, 0.95)
rs = st.floats(0.7, 10.0)


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_frozen_variances(key):
    beta, r = key
    q, vp = FROZEN[key]
    assert variance_factor(beta, r) == pytest.approx(q, rel=1e-10)
    assert momentum_variance(beta, r) == pytest.approx(vp, rel=1e-12)
    vx, vv, prod = variances_xv(beta, r)
    assert vx == pytest.approx(r * r * q, rel=1e-10)
    assert prod == pytest.approx(vx * vv, rel=1e-15)


def test_position_variance_at_rest_r8():
    assert variances_xv(0.0, 8.0)[0] == pytest.approx(0.49424111239664042, rel=1e-10)


@pytest.mark.parametrize("beta", sorted(AVERAGES_R8))
def test_frozen_averages(beta):
    p, e = AVERAGES_R8[beta]
    assert mean_momentum(beta, 8.0) == pytest.approx(p, rel=1e-13)
    assert mean_energy(beta, 8.0) == pytest.approx(e, rel=1e-13)


@pytest.mark.parametrize("beta,r", [(0.0, 1.0), (0.3, 2.0), (-0.7, 8.0), (0.95, 2.0)])
def test_closed_forms_against_quadrature(beta, r):
    q = quadrature_moments(LorentzianState(0.4, beta, r))
    assert q.norm == pytest.approx(1.0, rel=1e-11)
    assert q.mean_p == pytest.approx(mean_momentum(beta, r), rel=1e-9, abs=1e-12)
    assert q.energy == pytest.approx(mean_energy(beta, r), rel=1e-10)
    assert q.var_p == pytest.approx(momentum_variance(beta, r), rel=1e-8)
    assert q.mean_v == pytest.approx(beta, abs=1e-11)
    assert q.var_v == pytest.approx(variance_factor(beta, r), rel=1e-8)
    assert q.var_x == pytest.approx(variances_xv(beta, r)[0], rel=1e-8)
    # <gamma^-3> = 2 r^2 Q
    assert q.inv_gamma3 == pytest.approx(2 * r * r * variance_factor(beta, r), rel=1e-8)
    assert lorentzian.commutator_average(beta, r) == pytest.approx(q.inv_gamma3 / r, rel=1e-8)


@pytest.mark.parametrize("beta", [0.0, 0.4, 0.8])
@pytest.mark.parametrize("r", [2.0, 8.0])
def test_robertson_saturation_on_grid(beta, r):
    st_ = LorentzianState(0.0, beta, r)
    g = grid_moments(st_)
    lhs = g.var_x * g.var_v
    rhs = 0.25 * g.commutator**2
    assert lhs == pytest.approx(rhs, rel=1e-6)
    assert g.commutator == pytest.approx(lorentzian.commutator_average(beta, r), rel=1e-6)
    assert eigen_residual(st_) < 1e-6


@given(betas, rs)
def test_velocity_label_is_mean_velocity_and_saturates(beta, r):
    q = variance_factor(beta, r)
    assert 0 < q < 1
    vx, vv, prod = variances_xv(beta, r)
    assert prod == pytest.approx(0.25 * lorentzian.commutator_average(beta, r) ** 2, rel=1e-12)


@given(betas, rs)
def test_parity(beta, r):
    assert mean_momentum(-beta, r) == pytest.approx(-mean_momentum(beta, r), rel=1e-14, abs=1e-300)
    assert mean_energy(-beta, r) == mean_energy(beta, r)
    assert momentum_variance(-beta, r) == momentum_variance(beta, r)


@given(betas, rs)
def test_energy_exceeds_mass_shell_of_mean(beta, r):
    p = mean_momentum(beta, r)
    assert mean_energy(beta, r) >= math.hypot(1.0, p) * (1 - 1e-13)


@given(st.floats(0.0, 0.94), rs)
def test_momentum_increasing_in_beta(beta, r):
    assert mean_momentum(beta + 0.01, r) > mean_momentum(beta, r)


@given(st.floats(-5.0, 5.0), st.floats(1.0, 10.0))
def test_beta_for_momentum_inverts(p, r):
    b = beta_for_momentum(p, r)
    assert abs(b) < 1
    assert mean_momentum(b, r) == pytest.approx(p, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("k", [0.0, 0.5, 1.0, 2.0])
def test_nonrelativistic_limit(k):
    # at fixed sigma pbar / hbar the state approaches the canonical one
    r = 30.0
    b = beta_for_momentum(k / r, r)
    vx = variances_xv(b, r)[0]
    vp = momentum_variance(b, r) * r * r
    assert abs(vx - 0.5) < 5e-3 and abs(vp - 0.5) < 5e-3


def test_real_slice_overlap():
    a, b = LorentzianState(0.3, 0.2, 2.0), LorentzianState(0.3, -0.5, 2.0)
    closed = overlap(a, b, "closed_form")
    assert closed == pytest.approx(overlap(a, b), rel=1e-10)
    assert abs(closed) < 1


@given(st.floats(-2, 2), st.floats(-0.9, 0.9), st.floats(-2, 2), st.floats(-0.9, 0.9))
def test_overlap_bounded_and_hermitian(x1, b1, x2, b2):
    a, b = LorentzianState(x1, b1, 1.5), LorentzianState(x2, b2, 1.5)
    ab = overlap(a, b)
    assert abs(ab) <= 1 + 1e-10
    assert overlap(b, a) == pytest.approx(ab.conjugate(), abs=1e-12)


def test_overlap_off_slice_closed_form_refused():
    with pytest.raises(DomainError):
        overlap(LorentzianState(0.0, 0.1, 2.0), LorentzianState(1.0, 0.1, 2.0), "closed_form")


def test_overlap_needs_same_r():
    with pytest.raises(DomainError):
        overlap(LorentzianState(0.0, 0.1, 2.0), LorentzianState(0.0, 0.1, 3.0))


@pytest.mark.parametrize("beta", [1.0, -1.0, 1.5, math.nan])
def test_superluminal_rejected(beta):
    with pytest.raises(DomainError, match="subluminal"):
        LorentzianState(0.0, beta, 2.0)


def test_massless_scale_rejected():
    with pytest.raises(DomainError):
        LorentzianState.from_scale(0.0, 0.1, Scale.massless())


def test_extreme_scale_no_overflow():
    # the Bessel arguments here are ~ 2e4; unscaled K1 would underflow
    assert math.isfinite(mean_energy(0.99, 100.0))
    assert 0 < variance_factor(0.0, 100.0) < 1e-4


def test_moment_report_methods():
    rep = lorentzian.moment_report(LorentzianState(0.0, 0.5, 8.0))
    assert rep.methods["energy"] == "closed_form"
    assert rep.methods["var_x"] == "quadrature"
    assert rep.velocity == 0.5
