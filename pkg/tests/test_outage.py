import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from dansan.channel import make_rng
from dansan.config import SystemParams
from dansan.outage import (OutageLaw, build_law, cdf_x, cdf_z, coefficient_b, dan_rate,
                           eve_outage, lambda_pair, log_outage_margin, pdf_y)
from dansan.optimizer import data_power_requirement
from oracles import (convolution_cdf_z, literal_cdf_z, sample_dan_gain,
                     sample_quadratic_form)

DEFAULTS = SystemParams()
TOY = OutageLaw(lambda1=1.0, lambda2=-0.5, b=-0.5, theta=0.5, n_a=2, n_b=2)


def test_eigenvalues_at_defaults():
    lam1, lam2 = lambda_pair(0.5, 4e-4, DEFAULTS)
    assert lam1 == pytest.approx(4e-14, rel=1e-12)
    assert lam2 == pytest.approx(-6.6667e-15, rel=1e-4)


def test_dan_coefficient_at_defaults():
    assert coefficient_b(3e-3, DEFAULTS) == pytest.approx(-1e-13, rel=1e-12)


def test_dan_rate_conventions():
    assert dan_rate(DEFAULTS) == 0.5
    assert dan_rate(DEFAULTS.replace(chi_convention="unit", sigma2_hbe=2.0)) == 0.5


def test_quadratic_form_cdf_value():
    assert cdf_x(1.0, 1.0, -0.5, 2) == pytest.approx(0.754747, abs=1e-6)


def test_quadratic_form_cdf_against_sampling():
    x = sample_quadratic_form(make_rng(11), 1_000_000, 1.0, -0.5, 2)
    se = math.sqrt(0.25 / 1e6)
    assert abs(np.mean(x <= 1.0) - cdf_x(1.0, 1.0, -0.5, 2)) < 4 * se


@pytest.mark.parametrize("n_a", [2, 3, 5])
@pytest.mark.parametrize("xval", [-2.0, -0.3, 0.0, 0.7])
def test_quadratic_form_cdf_both_branches(n_a, xval):
    x = sample_quadratic_form(make_rng(12, n_a), 400_000, 1.3, -0.4, n_a)
    se = math.sqrt(0.25 / 4e5)
    assert abs(np.mean(x <= xval) - cdf_x(xval, 1.3, -0.4, n_a)) < 4 * se


def test_quadratic_form_cdf_continuous_at_zero():
    for n_a in (2, 4, 7):
        left = cdf_x(-1e-12, 2.0, -0.7, n_a)
        assert left == pytest.approx(cdf_x(0.0, 2.0, -0.7, n_a), abs=1e-10)


def test_quadratic_form_cdf_vectorised():
    xs = np.array([-1.0, 0.0, 1.0])
    got = cdf_x(xs, 1.0, -0.5, 3)
    assert got.shape == (3,)
    assert np.all(np.diff(got) > 0)
    assert got[1] == pytest.approx(1 - 1 / 1.5 ** 2)


@pytest.mark.parametrize("n_b", [2, 3, 4, 6])
@pytest.mark.parametrize("theta", [0.5, 1.0, 3.0])
def test_dan_gain_density_normalised(n_b, theta):
    mass, _ = integrate.quad(lambda y: pdf_y(y, n_b, theta), 0, np.inf, epsabs=1e-13)
    assert abs(mass - 1) < 1e-9
    mean, _ = integrate.quad(lambda y: y * pdf_y(y, n_b, theta), 0, np.inf, epsabs=1e-13)
    assert mean == pytest.approx((n_b - 1) / theta, rel=1e-9)


def test_dan_gain_matches_sampling_convention():
    y = sample_dan_gain(make_rng(13), 500_000, 4)
    # paper convention: unit variance per real component, mean 2 per entry
    assert np.mean(y) == pytest.approx(3 / dan_rate(DEFAULTS), rel=0.01)


def test_combined_cdf_value():
    assert cdf_z(1.0, TOY) == pytest.approx(0.877373, abs=1e-6)


def test_combined_cdf_against_sampling():
    rng = make_rng(14)
    n = 1_000_000
    x = sample_quadratic_form(rng, n, 1.0, -0.5, 2)
    y = sample_dan_gain(rng, n, 2)
    se = math.sqrt(0.25 / n)
    assert abs(np.mean(x - 0.5 * y <= 1.0) - cdf_z(1.0, TOY)) < 4 * se


def test_combined_cdf_against_convolution():
    ref = convolution_cdf_z(1.0, 1.0, -0.5, -0.5, 0.5, 2, 2)
    assert cdf_z(1.0, TOY) == pytest.approx(ref, abs=1e-8)


def test_combined_reduces_to_quadratic_form_without_dan():
    law = OutageLaw(1.0, -0.5, 0.0, 0.5, 4, 4)
    for z in (0.0, 0.3, 2.0):
        assert cdf_z(z, law) == pytest.approx(cdf_x(z, 1.0, -0.5, 4), abs=1e-15)


def test_combined_cdf_tail():
    assert cdf_z(1e3, TOY) == 1.0
    assert cdf_z(0.0, OutageLaw(1.0, 0.0, 0.0, 0.5, 2, 2)) == 0.0
    with pytest.raises(ValueError):
        cdf_z(-1.0, TOY)


@pytest.mark.parametrize("n_b", [2, 3, 4, 6])
@pytest.mark.parametrize("n_a", [2, 4, 5])
def test_matches_signed_literal_form(n_a, n_b):
    rng = make_rng(15, n_a, n_b)
    for _ in range(20):
        lam1 = rng.uniform(0.1, 3)
        lam2 = -rng.uniform(0, 3)
        b = -rng.uniform(0, 3)
        z = rng.uniform(0, 4)
        law = OutageLaw(lam1, lam2, b, 0.5, n_a, n_b)
        assert cdf_z(z, law) == pytest.approx(literal_cdf_z(z, lam1, lam2, b, n_a, n_b), abs=1e-12)


def test_convolution_grid():
    for n_a in (2, 4):
        for n_b in (2, 3, 5):
            for lam1 in (0.2, 1.0, 4.0):
                for z in (0.0, 0.5, 3.0):
                    for theta in (0.5, 1.0):
                        law = OutageLaw(lam1, -0.6, -0.8, theta, n_a, n_b)
                        ref = convolution_cdf_z(z, lam1, -0.6, -0.8, theta, n_a, n_b)
                        assert abs(cdf_z(z, law) - ref) < 1e-8


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(1e-5, 1e-1), st.floats(0, 1e-1), st.floats(1.01, 3))
def test_outage_monotone(phi, p_src, p_dan, factor):
    base = eve_outage(phi, p_src, p_dan, DEFAULTS)
    assert 0 <= base <= 1
    assert eve_outage(phi, p_src, p_dan * factor, DEFAULTS) >= base - 1e-15
    # same data power, more SAN
    phi2 = phi / factor
    assert eve_outage(phi2, p_src * factor, p_dan, DEFAULTS) >= base - 1e-15


def test_antenna_count_is_a_power():
    one = eve_outage(0.3, 1e-3, 1e-3, DEFAULTS.replace(n_e=1))
    for n_e in (2, 4, 8):
        assert eve_outage(0.3, 1e-3, 1e-3, DEFAULTS.replace(n_e=n_e)) == pytest.approx(one ** n_e, rel=1e-13)


def test_margin_sign_tracks_constraint():
    p = DEFAULTS.replace(beta=0.6)
    for p_dan in (0.0, 1e-4, 1e-3, 1e-2):
        ok = eve_outage(0.3, 1e-3, p_dan, p) >= p.beta
        assert (log_outage_margin(0.3, 1e-3, p_dan, p) <= 0) == ok


def test_outage_against_full_sampling_at_operating_point():
    """End-to-end check of the per-antenna law with path loss and Eve noise."""
    p = DEFAULTS
    c = data_power_requirement(p, np.ones(4))
    phi, p_src, p_dan = 0.3, 2 * c / 0.6, 1e-3
    law = build_law(phi, p_src, p_dan, p)
    rng = make_rng(16)
    n = 1_000_000
    # X + bY <= sigma2_e  <=>  SNR_E <= gamma_e on one Eve antenna
    x = sample_quadratic_form(rng, n, law.lambda1, law.lambda2, p.n_a)
    y = sample_dan_gain(rng, n, p.n_b)
    hits = np.mean(x + law.b * y <= p.sigma2_e)
    expected = cdf_z(p.sigma2_e, law)
    assert abs(hits - expected) < 4 * math.sqrt(expected * (1 - expected) / n)
