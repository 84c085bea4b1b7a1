import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from relcoh import canonical, lorentzian
from relcoh.errors import GridResolutionError
from relcoh.momentum import MomentReport, MomentumGrid, check_grid, measure_weight


@pytest.mark.parametrize("order,expected", [(2, 4.0), (4, 16.0), (6, 64.0)])
def test_stencil_convergence_order(order, expected):
    f, df = np.sin, np.cos
    errs = []
    for n in (41, 81):  # coarse enough that truncation, not rounding, dominates
        g = MomentumGrid(0.0, 2.0, n, order)
        d = g.derivative(f(g.nodes))
        half = order // 2
        errs.append(np.max(np.abs(d[half + 1:-half - 1] - df(g.nodes[half + 1:-half - 1]))))
    assert errs[0] / errs[1] == pytest.approx(expected, rel=0.05)


def test_trapezoid_spectral_for_gaussian():
    g = MomentumGrid(-10, 10, 201)
    assert g.integrate(np.exp(-g.nodes**2)) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def test_grid_validation():
    with pytest.raises(ValueError):
        MomentumGrid(1.0, 0.0)
    with pytest.raises(ValueError):
        MomentumGrid(0.0, 1.0, 11, 8)
    with pytest.raises(ValueError):
        MomentumGrid(0.0, 1.0, 101, 3)


def test_check_grid_flags_truncation():
    wf = canonical.wavefunction(canonical.CanonicalState(0.0, 0.0))
    with pytest.raises(GridResolutionError):
        check_grid(MomentumGrid(-2.0, 2.0, 101), wf)
    assert check_grid(MomentumGrid.around(wf), wf) < 1e-10


@given(st.floats(-0.9, 0.9), st.floats(1.0, 8.0))
def test_grid_around_covers_state(beta, r):
    wf = lorentzian.wavefunction(lorentzian.LorentzianState(0.0, beta, r))
    g = MomentumGrid.around(wf)
    assert g.lo < wf.center < g.hi
    assert g.integrate(wf.density(g.nodes)) == pytest.approx(1.0, rel=1e-10)


def test_measure_weights():
    u = np.array([0.0, 1.0, 3.0])
    assert np.allclose(measure_weight("flat", u), 1.0)
    assert np.allclose(measure_weight("invariant", u), 1 / np.sqrt(1 + u * u))


def test_moment_report_rejects_unknown_field():
    rep = MomentReport()
    rep.set("energy", 1.5, "closed_form")
    assert rep.as_dict() == {"energy": 1.5, "methods": {"energy": "closed_form"}}
    with pytest.raises(KeyError):
        rep.set("spin", 0.5, "closed_form")
