import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multisoliton.errors import InvalidParameterError, ResolutionError
from multisoliton.grid import Field, Grid1D
from multisoliton.profiles import (GroundStateSpec, NlsSolitonParams, SolitonParams,
                                   ground_state, ground_state_derivative,
                                   ground_state_scaled, hs_growth_ratios, hs_norm,
                                   hs_norm_squared, hs_recursion_residual,
                                   nls_ground_state, nls_soliton_field,
                                   profile_derivative, soliton_derivative,
                                   soliton_field)
from multisoliton.spectral import spectral_derivative as derivative

GRID = Grid1D(-40.0, 40.0, 1024)


def test_kdv_ground_state_peak():
    assert float(ground_state(2, 0.0)) == pytest.approx(1.5, rel=1e-15)


def test_ground_state_tail_against_oracle(frozen):
    assert float(ground_state(2, 10.0)) == pytest.approx(frozen["ground_state_2_10"], rel=1e-13)


def test_ground_state_far_tail_has_no_underflow_artifacts():
    # log-domain evaluation keeps relative accuracy at 1e-130
    q = float(ground_state(2, 600.0))
    assert q == pytest.approx(6.0 * math.exp(-600.0), rel=1e-12)


def test_kdv_mass_of_ground_state():
    q = Field(GRID, ground_state(2, GRID.x))
    assert hs_norm_squared(q, 0) == pytest.approx(6.0, rel=1e-12)
    assert hs_norm(q, 0) == pytest.approx(math.sqrt(6.0), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(p=st.integers(2, 6), x=st.floats(-12.0, 12.0))
def test_profile_solves_ground_state_equation(p, x):
    q = profile_derivative(p, 1.0, x, 0)
    q2 = profile_derivative(p, 1.0, x, 2)
    assert abs(q2 + q ** p - q) <= 1e-12 * max(1.0, abs(q))


@settings(max_examples=40, deadline=None)
@given(p=st.integers(2, 5), c=st.floats(0.1, 9.0), x=st.floats(-8.0, 8.0))
def test_scaling_relation(p, c, x):
    lhs = float(ground_state_scaled(p, c, x))
    rhs = c ** (1.0 / (p - 1)) * float(ground_state(p, math.sqrt(c) * x))
    assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-300)


@pytest.mark.parametrize("p", [2, 3, 5])
@pytest.mark.parametrize("s", [1, 2, 3, 4])
def test_closed_form_derivatives_match_spectral(p, s):
    q = Field(GRID, ground_state(p, GRID.x))
    spec = derivative(q, s).values
    exact = ground_state_derivative(p, GRID.x, s)
    # roundoff of the transform is amplified by k^s
    assert np.max(np.abs(spec - exact)) < 1e-14 * GRID.k_max ** s


def test_nls_cubic_ground_state_is_sech():
    x = np.linspace(-15, 15, 301)
    for om in (0.5, 1.0, 2.0):
        ref = math.sqrt(2 * om) / np.cosh(math.sqrt(om) * x)
        assert np.allclose(nls_ground_state(3, om, x), ref, rtol=1e-13, atol=0)


def test_soliton_field_is_translated_profile():
    sp = SolitonParams(3, 2.0, -4.0)
    f = soliton_field(sp, 1.5, GRID)
    assert np.allclose(f.values, ground_state_scaled(3, 2.0, GRID.x - 3.0 + 4.0), rtol=1e-14)
    d = soliton_derivative(sp, 1.5, GRID, 2)
    assert np.max(np.abs(d.values - derivative(f, 2).values)) < 1e-9


def test_nls_soliton_modulus_and_phase():
    sp = NlsSolitonParams(3, 1.0, 1.0, 0.3, -5.0)
    f = nls_soliton_field(sp, 2.0, GRID)
    assert np.allclose(np.abs(f.values), nls_ground_state(3, 1.0, GRID.x + 3.0), rtol=1e-13)
    i = int(np.argmax(np.abs(f.values)))
    x = GRID.x[i]
    phase = 0.5 * x + (1.0 - 0.25) * 2.0 + 0.3
    assert np.angle(f.values[i] / np.exp(1j * phase)) == pytest.approx(0.0, abs=1e-13)


def test_ground_state_spec_dispatch():
    g = GroundStateSpec("gkdv", 2, 4.0)
    assert float(g.evaluate(0.0)) == pytest.approx(6.0)
    with pytest.raises(InvalidParameterError):
        GroundStateSpec("kdv", 2)
    with pytest.raises(InvalidParameterError):
        GroundStateSpec("gkdv", 2.5)


@pytest.mark.parametrize("bad", [1, 0, 2.5])
def test_invalid_power(bad):
    with pytest.raises(InvalidParameterError):
        ground_state(bad, 0.0)


def test_invalid_speed():
    with pytest.raises(InvalidParameterError):
        SolitonParams(2, 0.0)
    with pytest.raises(InvalidParameterError):
        NlsSolitonParams(3, -1.0)


def test_recursion_residual_small():
    for p in (2, 3):
        for s in (0, 2, 4, 6):
            assert hs_recursion_residual(p, s, GRID) <= 1e-6


def test_growth_ratio_bounded():
    r = hs_growth_ratios(2, 8, GRID)
    assert np.all(np.isfinite(r)) and np.all(r > 0)
    assert r.max() < 10.0


def test_underresolved_derivative_raises():
    coarse = Grid1D(-40.0, 40.0, 64)
    q = Field(coarse, ground_state(4, 3.0 * coarse.x))
    with pytest.raises(ResolutionError):
        hs_norm(q, 6)
