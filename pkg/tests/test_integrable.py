import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multisoliton.errors import InvalidParameterError
from multisoliton.grid import Grid1D
from multisoliton.integrable import (HighPrecisionResidual, KdvNSolitonSpec,
                                     asymptotic_soliton_params, kdv_nsoliton,
                                     kdv_nsoliton_derivatives, kdv_nsoliton_field,
                                     kdv_nsoliton_values, tau_matrix)
from multisoliton.profiles import ground_state_scaled
from multisoliton.solver import conserved_quantities


def test_trace_route_against_oracle(frozen, kdv2):
    for row in frozen["kdv2"]:
        u = float(kdv_nsoliton_values(kdv2, row["t"], row["x"])[0])
        assert u == pytest.approx(row["u"], rel=1e-12, abs=1e-14)


def test_cumulant_route_against_oracle(frozen, kdv2):
    for row in frozen["kdv2"]:
        u = float(kdv_nsoliton_derivatives(kdv2, row["t"], [row["x"]], 0)[0, 0])
        assert u == pytest.approx(row["u"], rel=1e-12, abs=1e-14)


def test_shifted_spec_against_oracle(frozen):
    spec = KdvNSolitonSpec((0.5, 2.0), (1.0, -2.0))
    for row in frozen["kdv2_shifted"]:
        assert float(kdv_nsoliton(spec, row["t"], row["x"])) == pytest.approx(row["u"], rel=1e-12)


def test_peak_of_initial_collision():
    # zero shifts: the crests coincide at t = 0; sympy gives u(0, 0) = 459/98
    spec = KdvNSolitonSpec((1.0, 4.0))
    assert float(kdv_nsoliton(spec, 0.0, 0.0)) == pytest.approx(459.0 / 98.0, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(c1=st.floats(0.2, 2.0), gap=st.floats(0.3, 4.0), t=st.floats(-20, 20),
       x=st.floats(-60, 60), s1=st.floats(-3, 3))
def test_two_routes_agree(c1, gap, t, x, s1):
    spec = KdvNSolitonSpec((c1, c1 + gap), (s1, 0.0))
    a = float(kdv_nsoliton_values(spec, t, x)[0])
    b = float(kdv_nsoliton_derivatives(spec, t, [x], 0)[0, 0])
    assert a == pytest.approx(b, rel=1e-9, abs=1e-13)


def test_single_soliton_reduces_to_profile():
    spec = KdvNSolitonSpec((2.25,), (0.9,))
    (c, x0), = asymptotic_soliton_params(spec)
    x = np.linspace(-30, 60, 500)
    u = kdv_nsoliton_values(spec, 3.0, x)
    assert np.allclose(u, ground_state_scaled(2, c, x - c * 3.0 - x0), rtol=1e-12, atol=1e-15)
    assert x0 == pytest.approx(-0.9 / 1.5)


def test_phase_shifts_against_measured_crests(frozen, kdv2):
    plus = [x0 for _, x0 in asymptotic_soliton_params(kdv2, +1)]
    minus = [x0 for _, x0 in asymptotic_soliton_params(kdv2, -1)]
    assert np.allclose(plus, frozen["crest_offsets_t30"], atol=1e-10)
    assert np.allclose(minus, frozen["crest_offsets_tm30"], atol=1e-10)
    # fast soliton forward by ln 3, slow one back by 2 ln 3
    assert plus[1] - minus[1] == pytest.approx(math.log(3.0), rel=1e-12)
    assert plus[0] - minus[0] == pytest.approx(-2 * math.log(3.0), rel=1e-12)


def test_mass_and_energy_of_two_soliton(kdv2, exact_grid):
    q0 = conserved_quantities(kdv_nsoliton_field(kdv2, 0.0, exact_grid), "gkdv", 2)
    q1 = conserved_quantities(kdv_nsoliton_field(kdv2, 12.0, exact_grid), "gkdv", 2)
    assert q0["mass"] == pytest.approx(54.0, rel=1e-12)
    assert q1["mass"] == pytest.approx(54.0, rel=1e-12)
    assert q1["energy"] == pytest.approx(q0["energy"], rel=1e-11)


def test_solution_satisfies_kdv(kdv2):
    # u_t + u_xxx + (u^2)_x = 0 with u_t by a fourth-order time stencil
    x = np.linspace(-10, 30, 81)
    t, h = 1.3, 1e-3
    ut = (-kdv_nsoliton_values(kdv2, t + 2 * h, x) + 8 * kdv_nsoliton_values(kdv2, t + h, x)
          - 8 * kdv_nsoliton_values(kdv2, t - h, x) + kdv_nsoliton_values(kdv2, t - 2 * h, x)) / (12 * h)
    d = kdv_nsoliton_derivatives(kdv2, t, x, 3)
    res = ut + d[3] + 2 * d[0] * d[1]
    assert np.max(np.abs(res)) < 1e-8


def test_derivatives_against_finite_differences(kdv2):
    x = np.linspace(-5, 15, 41)
    h = 1e-4
    d = kdv_nsoliton_derivatives(kdv2, 0.7, x, 1)
    fd = (kdv_nsoliton_values(kdv2, 0.7, x + h) - kdv_nsoliton_values(kdv2, 0.7, x - h)) / (2 * h)
    assert np.max(np.abs(d[1] - fd)) < 1e-7


def test_no_overflow_far_right(kdv2):
    # raw entries overflow; the rescaled evaluation does not
    assert tau_matrix(kdv2, 0.0, 500.0).overflow
    u = kdv_nsoliton_values(kdv2, 0.0, np.array([500.0, 800.0, -800.0]))
    assert np.all(np.isfinite(u)) and np.all(u >= 0)


def test_high_precision_residual_matches_double_where_resolved(kdv2):
    res = HighPrecisionResidual(kdv2)
    x = np.linspace(-5, 25, 13)
    t = 2.0
    z_hp = res.values(t, x, 1)
    sols = res.solitons
    r = sum(ground_state_scaled(2, c, x - c * t - x0) for c, x0 in sols)
    z_dp = kdv_nsoliton_values(kdv2, t, x) - r
    assert np.max(np.abs(z_hp[0] - z_dp)) < 1e-12


def test_high_precision_residual_decays(kdv2):
    res = HighPrecisionResidual(kdv2)
    z20 = abs(res.point(20.0, 20.0)[0])
    z40 = abs(res.point(40.0, 40.0)[0])
    assert 0 < z40 < z20 < 1e-10


@pytest.mark.parametrize("speeds", [(1.0, 1.0), (2.0, 1.0), (-1.0, 2.0)])
def test_speed_ordering_enforced(speeds):
    with pytest.raises(InvalidParameterError):
        KdvNSolitonSpec(speeds)


def test_field_has_grid(kdv2):
    g = Grid1D(-50.0, 50.0, 256)
    f = kdv_nsoliton_field(kdv2, 0.0, g)
    assert f.grid is g and f.values.shape == (256,)
