import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multisoliton.diagnostics import (FunctionalSeries, ResidualSampler, Samples, fit_exponential,
                                      fs_functional, i_functional, i_functional_rate,
                                      interaction_integral, interaction_series,
                                      j_functional, kappa_alpha_beta, make_nls_rate_params,
                                      make_rate_params, pointwise_decay_fit, residual,
                                      solution_samples, theta, weighted_sup)
from multisoliton.errors import (DegenerateFitError, InvalidParameterError,
                                 WindowEmptyError)
from multisoliton.grid import Field, Grid1D
from multisoliton.integrable import KdvNSolitonSpec
from multisoliton.profiles import NlsSolitonParams, SolitonParams, soliton_field
from multisoliton.solver import exact_kdv_run
from multisoliton.weights import LeftArctan, RightArctan, WeightFamily

speeds_st = st.lists(st.floats(0.05, 20.0), min_size=1, max_size=5, unique=True).map(sorted) \
    .filter(lambda c: all(b - a > 1e-3 for a, b in zip(c, c[1:])))


# ------------------------------------------------------------------- rates

def test_theta_examples():
    assert theta([1.0, 4.0]) == 0.03125
    assert theta([0.25, 1.0]) == 0.00390625
    assert theta([4.0]) == pytest.approx(8.0 / 32.0)


def test_kappa_alpha_beta_example():
    assert kappa_alpha_beta([1.0, 4.0], 0.5, 5.0) == pytest.approx(0.03125 / 3.0, rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(c=speeds_st, fa=st.floats(0.05, 0.95), gap=st.floats(0.1, 5.0))
def test_rate_properties(c, fa, gap):
    th = theta(c)
    assert th > 0
    k = kappa_alpha_beta(c, fa * c[0], c[-1] + gap)
    assert 0 < k <= math.sqrt(c[0])


def test_rate_defaults(kdv2):
    p = make_rate_params(kdv2.speeds)
    assert (p.alpha, p.beta, p.eta) == (0.5, 5.0, 0.5)
    assert p.kappa_alpha == pytest.approx(math.sqrt(0.5) / 4)
    assert p.kappa == pytest.approx(2 * p.kappa_alpha)
    assert p.delta == pytest.approx((0.5 - p.kappa ** 2) / 2)


def test_rate_constraint_messages():
    with pytest.raises(InvalidParameterError, match="alpha"):
        make_rate_params([1.0, 4.0], alpha=1.0)
    with pytest.raises(InvalidParameterError, match="beta"):
        make_rate_params([1.0, 4.0], beta=4.0)
    with pytest.raises(InvalidParameterError, match=r"c\[1\]"):
        make_rate_params([1.0, 1.0])
    with pytest.raises(InvalidParameterError):
        make_nls_rate_params([1.0, 1.0], [-1.0, 1.0], beta=1.0)
    assert make_nls_rate_params([1.0], [0.5]).beta == 1.5


# -------------------------------------------------------------------- fits

def test_fit_recovers_pure_exponential():
    t = np.linspace(0, 10, 11)
    f = fit_exponential(t, 3.0 * np.exp(-0.7 * t))
    assert f.rate == pytest.approx(0.7, rel=1e-12)
    assert f.C == pytest.approx(3.0, rel=1e-12)
    assert f.r2 == pytest.approx(1.0)


def test_fit_excludes_values_below_floor():
    t = np.arange(6.0)
    v = np.array([1.0, 0.5, 0.25, 0.125, 1e-40, 0.0])
    f = fit_exponential(t, v, floor=1e-28)
    assert f.n_used == 4 and f.excluded == (4.0, 5.0)
    with pytest.raises(DegenerateFitError):
        fit_exponential(t[:2], v[:2])


def test_series_validation():
    with pytest.raises(InvalidParameterError):
        FunctionalSeries("x", {}, [1.0, 0.5], [1.0, 2.0])
    with pytest.raises(InvalidParameterError):
        FunctionalSeries("x", {}, [0.0, 1.0], [1.0, np.nan])
    s = FunctionalSeries("x", {"s": 1}, [0.0, 1.0, 2.0], [1.0, 0.5, 0.25])
    assert s.smallest_constant(math.log(2.0)) == pytest.approx(1.0)
    assert list(s.rows())[0] == ("x", 1, "", "", 0.0, 1.0)


# ------------------------------------------------------------- pointwise decay

@pytest.fixture(scope="module")
def single_run():
    spec = KdvNSolitonSpec((2.25,))
    return spec, exact_kdv_run(spec, Grid1D(-60.0, 100.0, 2048), [0.0, 5.0])


@pytest.mark.parametrize("flank", ["left", "right"])
def test_single_soliton_decay_self_calibration(single_run, flank):
    spec, run = single_run
    p = make_rate_params(spec.speeds)
    r = pointwise_decay_fit(solution_samples(run, 5.0, 1), 5.0, p, "soliton_1", 0, flank=flank)
    assert r.rate == pytest.approx(1.5, rel=0.02)
    assert r.r2 > 0.999


def test_derivative_decays_at_same_rate(single_run):
    spec, run = single_run
    p = make_rate_params(spec.speeds)
    r = pointwise_decay_fit(solution_samples(run, 5.0, 2), 5.0, p, "left", 2)
    assert r.rate == pytest.approx(1.5, rel=0.02)


def test_spectral_and_closed_form_samples_agree(single_run):
    spec, run = single_run
    p = make_rate_params(spec.speeds)
    a = pointwise_decay_fit(run.snapshot(5.0), 5.0, p, "soliton_1", 1, flank="right")
    b = pointwise_decay_fit(solution_samples(run, 5.0, 1), 5.0, p, "soliton_1", 1, flank="right")
    assert a.rate == pytest.approx(b.rate, rel=1e-3)


def test_empty_window_raises(single_run):
    spec, run = single_run
    p = make_rate_params(spec.speeds, beta=20.0)
    with pytest.raises(WindowEmptyError):
        pointwise_decay_fit(run.snapshot(5.0), 5.0, p, "right", 0)
    with pytest.raises(InvalidParameterError):
        pointwise_decay_fit(run.snapshot(5.0), 5.0, p, "soliton_3", 0)


def test_algebraic_model_on_power_law():
    g = Grid1D(-50.0, 500.0, 8192)
    x = g.x
    u = np.where(x > 10, (x - 5.0 + 1e-30) ** -3.0, 1.0)
    smp = Samples(0.0, x, u[None, :], np.full(x.size, g.dx))
    p = make_rate_params([1.0], beta=5.0)
    r = pointwise_decay_fit(smp, 1.0, p, "right", 0, model="algebraic", floor=1e-9, cap=1e-3)
    assert r.rate == pytest.approx(3.0, rel=0.05)


def test_weighted_sup_basic(single_run):
    spec, run = single_run
    smp = solution_samples(run, 5.0, 0)
    mask = smp.x > 15.0
    assert weighted_sup(smp, 5.0, 3.0, 0, 0) == pytest.approx(np.max(smp.derivs[0][mask]))


# -------------------------------------------------------------- I functional

def test_i_functional_below_mass_and_flux_formula(kdv2, exact_grid, rate_params):
    h = 1e-3
    t = 5.0
    run = exact_kdv_run(kdv2, exact_grid, [t - 2 * h, t - h, t, t + h, t + 2 * h])
    for x0 in (-20.0, 0.0):
        vals = [i_functional(run, s, 10.0, x0, rate_params) for s in run.times]
        assert max(vals) <= 54.0
        fd = (vals[0] - 8 * vals[1] + 8 * vals[3] - vals[4]) / (12 * h)
        assert i_functional_rate(run, t, 10.0, x0, rate_params) == pytest.approx(fd, rel=1e-8)


# -------------------------------------------------------------- J functional

@settings(max_examples=30, deadline=None)
@given(a=st.floats(-30, 30), b=st.floats(-30, 30), s=st.integers(0, 1))
def test_j_monotone_in_x0(a, b, s):
    g = Grid1D(-60.0, 60.0, 1024)
    z = Field(g, 0.1 * np.exp(-0.1 * g.x ** 2), {"t": 1.0})
    w = WeightFamily(RightArctan(0.5))
    lo, hi = min(a, b), max(a, b)
    j_lo = j_functional(z, s, lo, 2.0, w)
    j_hi = j_functional(z, s, hi, 2.0, w)
    assert j_hi <= j_lo * (1 + 1e-13)


def test_j_bounded_by_norm_and_radial_symmetric():
    g = Grid1D(-60.0, 60.0, 1024)
    z = Field(g, np.exp(-0.2 * g.x ** 2) + 0j, {"t": 0.0})
    w = WeightFamily(RightArctan(0.5))
    full = float(np.sum(np.abs(z.values) ** 2) * g.dx)
    j = j_functional(z, 0, -100.0, 0.0, w)
    assert j == pytest.approx(full, rel=1e-10)
    # radial weight sees |x|: mirrored data gives the same value
    zm = Field(g, np.exp(-0.2 * (g.x - 5) ** 2) + 0j, {"t": 0.0})
    zp = Field(g, np.exp(-0.2 * (g.x + 5) ** 2) + 0j, {"t": 0.0})
    a = j_functional(zm, 0, 1.0, 0.0, w, radial=True)
    b = j_functional(zp, 0, 1.0, 0.0, w, radial=True)
    assert a == pytest.approx(b, rel=1e-12)


def test_j_rejects_bare_field_without_time():
    g = Grid1D(-10.0, 10.0, 128)
    with pytest.raises(InvalidParameterError):
        j_functional(Field(g, np.zeros(128)), 0, 0.0, 1.0, WeightFamily(RightArctan(0.5)))


# -------------------------------------------------------------- F_s and z

def test_fs_vanishes_for_zero_residual(single_run):
    spec, run = single_run
    smp = ResidualSampler(run, spec, 2, pad=20.0, dx=0.5)
    ser = fs_functional(run, spec, 2, 2, sampler=smp, times=[5.0])
    assert abs(ser.values[0]) <= 1e-40


def test_residual_of_soliton_snapshot_is_zero():
    g = Grid1D(-50.0, 50.0, 512)
    sp = SolitonParams(2, 1.0, -3.0)
    z = residual(soliton_field(sp, 2.0, g), [sp], 2.0)
    assert np.max(np.abs(z.values)) == 0.0


def test_exact_residual_sampler_floor(kdv2, exact_run):
    smp = ResidualSampler(exact_run, kdv2, 0, pad=10.0, dx=1.0)
    assert smp.exact and smp.floor == 1e-300
    z = smp.whole(20.0)
    assert 0 < np.max(np.abs(z.derivs[0])) < 1e-20


# ----------------------------------------------------------- interactions

def test_interaction_gkdv_against_oracle(frozen):
    for row in frozen["interaction_gkdv"]:
        v = interaction_integral(SolitonParams(row["p"], row["c"]), row["s"], row["eta"],
                                 row["beta"], row["t"])
        assert v == pytest.approx(row["value"], rel=1e-12)


def test_interaction_nls_against_oracle(frozen):
    for row in frozen["interaction_nls"]:
        sp = NlsSolitonParams(row["p"], row["omega"], row["v"], 0.0, row["x0"])
        v = interaction_integral(sp, row["s"], row["eta"], row["beta"], row["t"])
        assert v == pytest.approx(row["value"], rel=1e-12)


def test_interaction_gkdv_decays_exactly_exponentially():
    sp = SolitonParams(2, 1.0, 0.0)
    ser = interaction_series(sp, 1, 0.5, 2.0, np.linspace(0, 20, 11))
    assert ser.fit().rate == pytest.approx(math.sqrt(0.5) * (2.0 - 1.0), rel=1e-12)


def test_interaction_parameter_guards():
    with pytest.raises(InvalidParameterError):
        interaction_integral(SolitonParams(2, 1.0), 0, 1.0, 2.0, 0.0)
    with pytest.raises(InvalidParameterError):
        interaction_integral(SolitonParams(2, 1.0), 0, 0.5, 1.0, 0.0)
    # eta = omega makes the NLS integral diverge
    with pytest.raises(InvalidParameterError):
        interaction_integral(NlsSolitonParams(3, 1.0, 1.0), 0, 1.0, 2.0, 0.0)
