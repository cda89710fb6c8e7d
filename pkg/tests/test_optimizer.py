import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dansan.channel import make_rng, sample_gaussian
from dansan.config import SystemParams
from dansan.optimizer import (InfeasibleError, PowerAllocation, data_power_requirement,
                              golden_section, max_phi_at_dan_power, optimize,
                              optimize_capped, phi_grid, required_dan_power,
                              san_only_allocation, san_only_phi)
from dansan.outage import eve_outage, outage_probability

DEFAULTS = SystemParams()
FLAT = np.ones(4)


def channel(seed, n_a=4):
    return sample_gaussian(make_rng(seed), n_a, 1.0)


def test_data_power_at_defaults():
    assert data_power_requirement(DEFAULTS, FLAT) == pytest.approx(4e-4, rel=1e-12)


def test_allocation_properties():
    a = PowerAllocation(p_dan=1e-3, p_src=4e-3, phi=0.25)
    assert a.data_power == pytest.approx(1e-3)
    assert a.san_power == pytest.approx(3e-3)
    assert a.an_power == pytest.approx(4e-3)
    assert a.total == pytest.approx(5e-3)
    with pytest.raises(ValueError):
        PowerAllocation(p_dan=-1.0, p_src=1.0, phi=0.5)


def test_no_target_needs_no_noise():
    p = DEFAULTS.replace(beta=0.0)
    assert san_only_phi(4e-4, p) == 1.0
    assert np.all(required_dan_power(phi_grid(), 4e-4, p) == 0)
    rep = optimize(p, FLAT)
    assert rep.allocation.phi == 1.0 and rep.allocation.p_dan == 0.0
    assert rep.allocation.total == pytest.approx(4e-4, rel=1e-12)


@pytest.mark.parametrize("beta", [0.3, 0.6, 0.9, 0.999])
@pytest.mark.parametrize("phi", [0.01, 0.1, 0.3, 0.7, 0.95])
def test_inverted_dan_power_meets_target_exactly(beta, phi):
    p = DEFAULTS.replace(beta=beta)
    c = data_power_requirement(p, FLAT)
    p_dan = float(required_dan_power(phi, c, p))
    reached = float(eve_outage(phi, c / phi, p_dan, p))
    if p_dan > 0:
        assert reached == pytest.approx(beta, rel=1e-10)
        smaller = float(eve_outage(phi, c / phi, p_dan * (1 - 1e-6), p))
        assert smaller < beta
    else:
        assert reached >= beta - 1e-12


def test_dan_power_vanishes_at_san_only_boundary():
    p = DEFAULTS.replace(beta=0.9)
    c = data_power_requirement(p, FLAT)
    phi_s = san_only_phi(c, p)
    assert 0 < phi_s < 1
    assert float(eve_outage(phi_s, c / phi_s, 0.0, p)) == pytest.approx(0.9, rel=1e-10)
    assert required_dan_power(phi_s * (1 - 1e-9), c, p) == 0.0
    above = [float(required_dan_power(phi_s * (1 + d), c, p)) for d in (1e-3, 1e-5, 1e-7)]
    assert above[0] > above[1] > above[2] > 0
    assert above[2] < 1e-6 * c


def test_required_power_increases_with_phi():
    p = DEFAULTS.replace(beta=0.9)
    c = data_power_requirement(p, FLAT)
    vals = required_dan_power(phi_grid(), c, p)
    assert np.all(np.diff(vals) >= -1e-18)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("beta", [0.5, 0.9])
def test_joint_never_worse_than_san_only(seed, beta):
    p = DEFAULTS.replace(beta=beta, gamma_b=3.0)
    h = channel(seed)
    joint, base = optimize(p, h), san_only_allocation(p, h)
    assert joint.feasible and base.feasible
    assert joint.allocation.total <= base.allocation.total * (1 + 1e-12)


def test_report_slacks_at_optimum():
    rep = optimize(DEFAULTS.replace(beta=0.9, gamma_b=3.0), channel(1))
    assert abs(rep.constraint_slack_bob) < 1e-9
    assert abs(rep.constraint_slack_eve) < 1e-9
    assert rep.search_trace


def test_optimum_is_local_minimum():
    p = DEFAULTS.replace(beta=0.9, gamma_b=3.0)
    h = channel(2)
    rep = optimize(p, h)
    c = data_power_requirement(p, h)
    phi = rep.allocation.phi

    def g(x):
        return float(required_dan_power(x, c, p)) + c / x

    for d in (1e-3, 1e-2):
        assert g(phi) <= g(phi * (1 + d)) * (1 + 1e-12)
        assert g(phi) <= g(phi * (1 - d)) * (1 + 1e-12)


def test_cap_zero_is_san_only():
    p = DEFAULTS.replace(beta=0.9, gamma_b=3.0)
    h = channel(3)
    assert optimize_capped(p, h, 0.0).allocation == san_only_allocation(p, h).allocation


def test_loose_cap_is_free_optimum():
    p = DEFAULTS.replace(beta=0.9, gamma_b=3.0)
    h = channel(3)
    assert optimize_capped(p, h, 1.0).allocation == optimize(p, h).allocation


@pytest.mark.parametrize("cap", [1e-4, 5e-4, 1e-3, 2e-3])
def test_binding_cap(cap):
    p = DEFAULTS.replace(beta=0.9, gamma_b=3.0)
    h = channel(3)
    free, base = optimize(p, h).allocation, san_only_allocation(p, h).allocation
    assert free.p_dan > cap
    rep = optimize_capped(p, h, cap)
    a = rep.allocation
    assert rep.feasible
    assert a.p_dan <= cap * (1 + 1e-12)
    assert free.total * (1 - 1e-12) <= a.total <= base.total * (1 + 1e-12)
    assert outage_probability(a, p) >= p.beta * (1 - 1e-9)


def test_capped_total_decreases_with_cap():
    p = DEFAULTS.replace(beta=0.9, gamma_b=3.0)
    h = channel(4)
    totals = [optimize_capped(p, h, cap).allocation.total for cap in (0, 2e-4, 1e-3, 3e-3, 1.0)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(totals, totals[1:]))


@pytest.mark.parametrize("p_dan", [1e-5, 1e-4, 1e-3, 1e-2])
def test_phi_at_dan_power_inverts_required_power(p_dan):
    p = DEFAULTS.replace(beta=0.9, gamma_b=3.0)
    c = data_power_requirement(p, FLAT)
    phi = max_phi_at_dan_power(p_dan, c, p)
    assert float(required_dan_power(phi, c, p)) == pytest.approx(p_dan, rel=1e-9)
    assert float(eve_outage(phi, c / phi, p_dan, p)) >= 0.9 * (1 - 1e-12)


def test_phi_at_dan_power_zero_matches_closed_form():
    p = DEFAULTS.replace(beta=0.9)
    c = data_power_requirement(p, FLAT)
    assert max_phi_at_dan_power(0.0, c, p) == pytest.approx(san_only_phi(c, p), rel=1e-11)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, 1e3), st.integers(0, 100))
def test_noise_scale_invariance(k, seed):
    p = DEFAULTS.replace(beta=0.8, gamma_b=2.0)
    q = p.replace(sigma2_b=p.sigma2_b * k, sigma2_e=p.sigma2_e * k)
    h = channel(seed)
    a, b = optimize(p, h).allocation, optimize(q, h).allocation
    assert b.total == pytest.approx(a.total * k, rel=1e-9)
    assert b.phi == pytest.approx(a.phi, rel=1e-6, abs=1e-9)


def test_total_grows_with_targets():
    h = channel(5)
    betas = [optimize(DEFAULTS.replace(beta=b, gamma_b=3.0), h).allocation.total
             for b in (0.1, 0.3, 0.5, 0.7, 0.9, 0.99)]
    assert all(y >= x * (1 - 1e-12) for x, y in zip(betas, betas[1:]))
    gammas = [optimize(DEFAULTS.replace(beta=0.9, gamma_b=g), h).allocation.total
              for g in (0.5, 1.0, 3.0, 10.0)]
    assert all(y > x for x, y in zip(gammas, gammas[1:]))


def test_unattainable_target():
    p = DEFAULTS.replace(beta=1.0)
    with pytest.raises(InfeasibleError):
        optimize(p, FLAT)
    with pytest.raises(InfeasibleError):
        san_only_allocation(p, FLAT)


def test_golden_section():
    trace = []
    x, fx = golden_section(lambda t: abs(t - 0.3) + 1, 0.0, 1.0, tol=1e-9, trace=trace)
    assert x == pytest.approx(0.3, abs=1e-9)
    assert fx == pytest.approx(1.0)
    assert len(trace) > 10


def test_phi_grid():
    g = phi_grid()
    assert g[0] == pytest.approx(1e-4) and g[-1] == 1.0
    assert np.all(np.diff(g) > 0)
    assert len(g) == 1000
    assert math.isclose(1 - g[-2], 1e-8, rel_tol=1e-6)
