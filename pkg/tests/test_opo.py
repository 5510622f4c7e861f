import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wgmopo.errors import DomainError
from wgmopo.opo import (
    CavityMode,
    OperatingPoint,
    conversion_efficiency,
    external_rates,
    lorentzian_response,
    output_power,
    pair_rate_internal,
    threshold,
)
from wgmopo.phasematch import pdc_mismatch

finite = dict(allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("delta, g", [(0.0, 1.0), (0.5, 0.5), (-0.5, 0.5), (1.0, 0.2)])
def test_lorentzian(delta, g):
    assert lorentzian_response(delta) == pytest.approx(g, rel=1e-15)


def test_threshold_examples():
    assert threshold(5e-6, 0.0, 0.0) == 5e-6
    assert threshold(5e-6, 0.5, 1.0) == pytest.approx(20e-6, rel=1e-15)


@given(P0=st.floats(1e-9, 1.0), dp=st.floats(-10, 10), D=st.floats(-100, 100))
def test_threshold_minimum(P0, dp, D):
    P = threshold(P0, dp, D)
    assert P >= P0
    if dp != 0 or D != 0:
        assert P > P0 or P == pytest.approx(P0, rel=1e-12)


def test_threshold_rejects_nonpositive():
    with pytest.raises(DomainError):
        threshold(0.0, 0, 0)


def test_operating_point_oscillation_condition():
    op = OperatingPoint(P_pump=1e-5, P_0=2e-6, delta_p=0.5, Delta=3.0)
    assert op.delta_si == 1.5
    assert op.P_th == threshold(2e-6, 0.5, 3.0)
    with pytest.raises(DomainError):
        OperatingPoint(1.0, 0.0)


def test_rate_suppression_at_reference_mismatch():
    s = CavityMode(0.0, 3.3e6, 3.3e6)
    i = CavityMode(0.0, 3.3e6, 3.3e6)
    Delta = pdc_mismatch(224e6, s, i)
    r0 = pair_rate_internal(6.6e6, 6.6e6, 1e-7, threshold(5e-6, 0, 0)).rate
    r1 = pair_rate_internal(6.6e6, 6.6e6, 1e-7, threshold(5e-6, 0, Delta)).rate
    assert r0 / r1 == pytest.approx(1 + Delta**2, rel=1e-12)
    assert r0 / r1 == pytest.approx(1152.9, rel=1e-3)


@settings(max_examples=50)
@given(g=st.floats(1e3, 1e9), P=st.floats(1e-12, 1e-6))
def test_pair_rate_linear_and_equal_bandwidth_prefactor(g, P):
    a = pair_rate_internal(g, g, P, 1e-4).rate
    b = pair_rate_internal(g, g, 2 * P, 1e-4).rate
    assert b == pytest.approx(2 * a, rel=1e-14)
    assert a == pytest.approx(np.pi * g * P / 1e-4, rel=1e-14)


@given(gs=st.floats(1e3, 1e9), gi=st.floats(1e3, 1e9))
def test_pair_rate_symmetric(gs, gi):
    assert pair_rate_internal(gs, gi, 1e-7, 1e-5).rate == pair_rate_internal(gi, gs, 1e-7, 1e-5).rate


def test_pair_rate_low_gain_flag():
    assert not pair_rate_internal(1e6, 1e6, 0.05, 1.0).beyond_low_gain
    flagged = pair_rate_internal(1e6, 1e6, 0.5, 1.0)
    assert flagged.beyond_low_gain and flagged.pump_fraction == 0.5


@pytest.mark.parametrize("gs, gi", [(0.0, 1.0), (1.0, -1.0)])
def test_pair_rate_rejects_bandwidths(gs, gi):
    with pytest.raises(DomainError):
        pair_rate_internal(gs, gi, 1.0, 2.0)


def test_external_rates_example():
    assert external_rates(1000.0, 0.5, 0.5) == (500.0, 500.0, 250.0)


def test_external_rates_unity_limit():
    k = 1 - 1e-12
    assert external_rates(1000.0, k, k)[2] == pytest.approx(1000.0, rel=1e-9)


@given(r=st.floats(0, 1e9), ks=st.floats(1e-6, 1 - 1e-6), ki=st.floats(1e-6, 1 - 1e-6))
def test_external_pair_rate_bounded(r, ks, ki):
    R_s, R_i, R_si = external_rates(r, ks, ki)
    assert R_si <= min(R_s, R_i)


@pytest.mark.parametrize("k", [0.0, 1.0, -0.1, 1.5])
def test_external_rates_reject_kappa(k):
    with pytest.raises(DomainError):
        external_rates(1.0, k, 0.5)


def test_cavity_mode_coupling_ratio():
    m = CavityMode(1e14, 3e6, 1e6)
    assert m.gamma == 4e6 and m.kappa == 0.75
    with pytest.raises(DomainError):
        CavityMode(1e14, 1e6, 0.0)


def test_output_zero_at_threshold():
    out = output_power(5e-6, 5e-6, 0.0, 0.0, 0.5, 0.5, 2e14, 5e14)
    assert out.power == 0.0


def test_output_below_threshold_flagged():
    out = output_power(1e-6, 5e-6, 0.0, 0.0, 0.5, 0.5, 2e14, 5e14)
    assert out.power == 0.0 and out.below_threshold
    neg = output_power(5e-6, 5e-6, 0.0, 3.0, 0.5, 0.5, 2e14, 5e14)
    assert neg.power == 0.0 and neg.below_threshold


def test_output_continuous_at_threshold():
    P_th = threshold(5e-6, 0.2, 0.7)
    above = output_power(P_th * (1 + 1e-10), 5e-6, 0.2, 0.7, 0.5, 0.5, 2e14, 5e14).power
    assert 0.0 <= above < 1e-14


def test_output_closed_form():
    P = output_power(40e-6, 5e-6, 0.1, 0.4, 0.6, 0.3, 2e14, 5e14).power
    ref = 4 * 0.6 * 0.3 * 5e-6 * (2e14 / 5e14) * (np.sqrt(8 - 0.6**2) - 1 + 2 * 0.1 * 0.4)
    assert P == pytest.approx(ref, rel=1e-14)


def test_efficiency_maximum_at_four_times_p0():
    P0 = 5e-6
    grid = np.linspace(1.01 * P0, 20 * P0, 200001)
    eff = np.array([conversion_efficiency(p, P0) for p in grid[::100]])
    coarse = grid[::100][np.argmax(eff)]
    fine = np.linspace(coarse - 0.02 * P0, coarse + 0.02 * P0, 4001)
    best = fine[np.argmax([conversion_efficiency(p, P0) for p in fine])]
    assert best == pytest.approx(4 * P0, rel=1e-4)


def test_photon_number_balance():
    nu_p, nu_s = 5.6e14, 3.35e14
    nu_i = nu_p - nu_s
    P_s = output_power(30e-6, 5e-6, 0.1, 0.3, 0.5, 0.4, nu_s, nu_p).power
    P_i = output_power(30e-6, 5e-6, 0.1, 0.3, 0.5, 0.4, nu_i, nu_p).power
    assert P_s / nu_s == pytest.approx(P_i / nu_i, rel=1e-14)


@given(D=st.floats(0, 50, **finite), P=st.floats(1e-6, 1e-3))
def test_output_even_in_mismatch(D, P):
    a = output_power(P, 5e-6, 0.0, D, 0.5, 0.5, 2e14, 5e14).power
    b = output_power(P, 5e-6, 0.0, -D, 0.5, 0.5, 2e14, 5e14).power
    assert a == b
