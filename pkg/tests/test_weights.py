import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multisoliton.errors import InvalidParameterError
from multisoliton.weights import (LeftArctan, RightArctan, WeightFamily, build_ladder,
                                  certify_ladder, certify_left_weight,
                                  certify_right_weight, cumulative_quad4, ladder_eval,
                                  superpolynomial_weight, weight_eval)


@pytest.fixture(scope="module")
def ladder_05():
    return build_ladder(WeightFamily(RightArctan(0.5)), 10)


@pytest.fixture(scope="module")
def ladder_025():
    return build_ladder(WeightFamily(RightArctan(0.25)), 10)


def test_weight_values_at_origin():
    assert float(weight_eval(LeftArctan(1.0), 0.0)) == pytest.approx(0.25, rel=1e-15)
    assert float(weight_eval(RightArctan(0.5), 0.0)) == pytest.approx(0.5, rel=1e-15)


@pytest.mark.parametrize("kind", [LeftArctan(0.7), RightArctan(0.3)])
@pytest.mark.parametrize("order", [1, 2, 3])
def test_derivatives_against_mpmath(kind, order):
    mp.mp.dps = 40
    r = mp.mpf(kind.rate)
    if isinstance(kind, LeftArctan):
        f = lambda y: mp.mpf(1) / 2 - mp.atan(mp.exp(r * y)) / mp.pi
    else:
        f = lambda y: 2 / mp.pi * mp.atan(mp.exp(r * y))
    for x in (-7.0, -1.0, 0.0, 0.4, 5.0):
        ref = float(mp.diff(f, mp.mpf(x), order))
        assert float(weight_eval(kind, x, order)) == pytest.approx(ref, rel=1e-12, abs=1e-30)


def test_left_weight_keeps_relative_accuracy_in_tail():
    x = 40.0
    ref = math.atan(math.exp(-x)) / math.pi
    assert float(weight_eval(LeftArctan(1.0), x)) == pytest.approx(ref, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(rate=st.floats(0.05, 3.0), a=st.floats(-50, 50), b=st.floats(-50, 50))
def test_weights_monotone_and_bounded(rate, a, b):
    lo, hi = min(a, b), max(a, b)
    left, right = LeftArctan(rate), RightArctan(rate ** 2)
    for w, sign in ((left, -1), (right, 1)):
        vlo, vhi = float(weight_eval(w, lo)), float(weight_eval(w, hi))
        assert 0.0 <= vlo <= 1.0 and 0.0 <= vhi <= 1.0
        assert sign * (vhi - vlo) >= 0


@pytest.mark.parametrize("kappa", [0.25, 1.0])
def test_left_certificate(kappa):
    cert = certify_left_weight(kappa)
    assert cert.passed, cert.failures


@pytest.mark.parametrize("eta", [0.25, 0.5])
def test_right_certificate(eta):
    cert = certify_right_weight(eta)
    assert cert.passed, cert.failures
    k1 = cert.constants["kappa1"]
    # sup of phi' e^{-sqrt(eta) x} is approached at -inf
    assert k1 == pytest.approx(2 * math.sqrt(eta) / math.pi, rel=1e-9)


def test_certificate_csv_columns():
    text = certify_left_weight(1.0).to_csv()
    head = text.splitlines()[0].split(",")
    assert "pass" in head and len(text.splitlines()) == 1 + len(certify_left_weight(1.0).checks)


def test_ladder_against_repeated_integral(frozen, ladder_05, ladder_025):
    lad = {0.5: ladder_05, 0.25: ladder_025}
    for row in frozen["ladder"]:
        v = float(ladder_eval(lad[row["eta"]], row["n"], np.array([row["x"]]))[0])
        assert v == pytest.approx(row["value"], rel=1e-10)


def test_ladder_derivative_relation(ladder_05):
    # phi_[n]' = phi_[n-1] between table nodes
    x = np.linspace(-15.3, 42.7, 37)
    h = 1e-3
    for n in (1, 4, 9):
        d = (ladder_eval(ladder_05, n, x + h) - ladder_eval(ladder_05, n, x - h)) / (2 * h)
        assert np.allclose(d, ladder_eval(ladder_05, n - 1, x), rtol=1e-6)


def test_ladder_certificate(ladder_05, ladder_025):
    for w in (ladder_05, ladder_025):
        checks = certify_ladder(w, 10)
        bad = [c for c in checks if not c.passed]
        assert not bad, bad


def test_ladder_refinement_recorded(ladder_05):
    assert max(ladder_05.ladder.refinement_error) <= 1e-10


def test_ladder_is_continuous_at_table_edges(ladder_05):
    lad = ladder_05.ladder
    for n in (1, 3, 10):
        for edge in (lad.x_cut, lad.x_hi):
            a, b = ladder_eval(ladder_05, n, np.array([edge - 1e-9, edge + 1e-9]))
            assert a == pytest.approx(b, rel=1e-8)


def test_ladder_requires_build():
    with pytest.raises(InvalidParameterError):
        ladder_eval(WeightFamily(RightArctan(0.5)), 2, 0.0)
    with pytest.raises(InvalidParameterError):
        build_ladder(WeightFamily(LeftArctan(0.5)), 3)


def test_cumulative_rule_exact_on_cubics():
    x = np.linspace(0.0, 2.0, 41)
    f = 1 - 2 * x + 3 * x ** 2 - x ** 3
    exact = x - x ** 2 + x ** 3 - x ** 4 / 4
    assert np.allclose(cumulative_quad4(f, x[1] - x[0]), exact, rtol=0, atol=1e-13)


def test_cumulative_rule_fourth_order():
    errs = []
    for n in (41, 81, 161):
        x = np.linspace(0.0, 3.0, n)
        errs.append(np.max(np.abs(cumulative_quad4(np.exp(x), x[1] - x[0]) - (np.exp(x) - 1))))
    rates = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(rates > 3.7)


def test_superpolynomial_against_oracle(frozen):
    row = frozen["superpolynomial"]
    v = superpolynomial_weight(row["mu"], row["s"], row["x"])
    assert v == pytest.approx(row["value"], rel=1e-14)
    assert v == pytest.approx(0.47306825616396964, rel=1e-14)


def test_superpolynomial_at_zero_and_bound():
    assert superpolynomial_weight(2.0, 3, 0.0) == pytest.approx(2.0 ** -8)
    v, bound = superpolynomial_weight(1.5, 0, 50.0, return_bound=True)
    assert 0 <= bound <= 1e-16 * v


@settings(max_examples=30, deadline=None)
@given(mu=st.floats(1.2, 3.0), s=st.integers(0, 3), a=st.floats(0, 30), b=st.floats(0, 30))
def test_superpolynomial_monotone(mu, s, a, b):
    lo, hi = min(a, b), max(a, b)
    assert superpolynomial_weight(mu, s, lo) <= superpolynomial_weight(mu, s, hi) * (1 + 1e-14)


def test_superpolynomial_rejects_bad_inputs():
    with pytest.raises(InvalidParameterError):
        superpolynomial_weight(1.0, 0, 1.0)
    with pytest.raises(InvalidParameterError):
        superpolynomial_weight(2.0, 0, -1.0)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_weight_rate_positive(bad):
    with pytest.raises(InvalidParameterError):
        LeftArctan(bad)
    with pytest.raises(InvalidParameterError):
        RightArctan(bad)
