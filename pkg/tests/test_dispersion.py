import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import C
from wgmopo import dispersion
from wgmopo.dispersion import (
    ModeIndex,
    ResonatorGeometry,
    airy_root,
    effective_index,
    eigenfrequency,
    find_azimuthal_number,
    free_spectral_range,
    mode_frequency,
)
from wgmopo.errors import DomainError, NumericalError


def test_airy_closed_form_values():
    assert airy_root(1) == pytest.approx(2.3203, abs=5e-5)
    assert airy_root(2) == pytest.approx(4.0818, abs=5e-5)


def test_airy_model_error_against_exact_zero():
    exact = airy_root(1, exact=True)
    assert exact == pytest.approx(2.33811, abs=1e-5)
    assert (exact - airy_root(1)) / exact == pytest.approx(0.0076, abs=5e-4)


def test_airy_increasing():
    a = [airy_root(q) for q in range(1, 12)]
    assert all(x < y for x, y in zip(a, a[1:]))


@pytest.mark.parametrize("q", [0, -1, 1.5])
def test_airy_rejects_bad_q(q):
    with pytest.raises(DomainError):
        airy_root(q)


@pytest.mark.parametrize("bad", [dict(R=0, rho=1e-3), dict(R=1e-3, rho=2e-3), dict(R=1e-3, rho=1e-4, h=0)])
def test_geometry_invariants(bad):
    with pytest.raises(DomainError):
        ResonatorGeometry(**bad)


def test_mode_index_invariants():
    assert ModeIndex(100, 1, 2).ell == 102
    for kw in (dict(m=0), dict(m=5, q=0), dict(m=5, p=-1), dict(m=5, pol="TX")):
        with pytest.raises(DomainError):
            ModeIndex(**kw)


@pytest.mark.parametrize(
    "m, q, p, pol, T",
    [(64000, 1, 0, "TE", 100.0), (38000, 1, 0, "TM", 140.0), (26000, 3, 1, "TM", 30.0), (50000, 2, 2, "TE", 220.0)],
)
def test_matches_term_by_term_oracle(geom, mat, m, q, p, pol, T):
    got = mode_frequency(geom, mat, ModeIndex(m, q, p, pol), T)
    ref = oracles.frequency(geom.R, geom.rho, geom.T_ref, m, q, p, pol, T)
    assert got == pytest.approx(ref, rel=1e-12)


def test_mode_number_at_pump(geom, mat):
    m, _ = find_azimuthal_number(geom, mat, C / 532e-9, 1, 0, "TE", 100.0)
    assert m == pytest.approx(64756, rel=5e-3)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(20000, 90000), q=st.integers(1, 4), p=st.integers(0, 3), pol=st.sampled_from(["TE", "TM"]))
def test_frequency_increases_with_m(geom, mat, m, q, p, pol):
    nu = eigenfrequency(geom, mat, [m, m + 1], q, p, pol, 80.0)
    assert nu[1] > nu[0]


def test_te_and_tm_differ(geom, mat):
    te = mode_frequency(geom, mat, ModeIndex(40000, 1, 0, "TE"), 100.0)
    tm = mode_frequency(geom, mat, ModeIndex(40000, 1, 0, "TM"), 100.0)
    assert abs(te - tm) > 1e12


def test_round_trip_random_indices(geom, mat, rng):
    for _ in range(100):
        idx = ModeIndex(int(rng.integers(25000, 80000)), int(rng.integers(1, 5)), int(rng.integers(0, 4)),
                        str(rng.choice(["TE", "TM"])))
        T = float(rng.uniform(25, 240))
        nu = mode_frequency(geom, mat, idx, T)
        m, res = find_azimuthal_number(geom, mat, nu, idx.q, idx.p, idx.pol, T)
        assert m == idx.m
        assert abs(res) < 1e3


def test_residual_below_half_fsr(geom, mat, rng):
    for nu in rng.uniform(C / 1.5e-6, C / 0.6e-6, 20):
        m, res = find_azimuthal_number(geom, mat, nu, 1, 0, "TM", 90.0)
        assert abs(res) <= 0.5 * free_spectral_range(geom, mat, ModeIndex(m, 1, 0, "TM"), 90.0) * 1.0001


def test_mode_drift_over_70_kelvin(geom, mat):
    m95, _ = find_azimuthal_number(geom, mat, C / 532e-9, 1, 0, "TE", 95.0)
    m165, _ = find_azimuthal_number(geom, mat, C / 532e-9, 1, 0, "TE", 165.0)
    assert m165 - m95 == pytest.approx(250, rel=0.15)


def _fsr_near(geom, mat, lam, pol, T):
    m, _ = find_azimuthal_number(geom, mat, C / lam, 1, 0, pol, T)
    return free_spectral_range(geom, mat, ModeIndex(m, 1, 0, pol), T)


def test_pump_fsr_within_sweep_window(geom, mat):
    f = _fsr_near(geom, mat, 532e-9, "TE", 100.0)
    assert 1e9 < f < 20e9


@pytest.mark.parametrize("lam, expected", [(895e-9, 8.2e9), (1312e-9, 8.4e9)])
def test_parametric_fsr(geom, mat, lam, expected):
    assert _fsr_near(geom, mat, lam, "TM", 140.0) == pytest.approx(expected, rel=0.10)


def test_fsr_decreases_with_radius(mat):
    small = ResonatorGeometry(1e-3, 0.25e-3)
    large = ResonatorGeometry(2e-3, 0.5e-3)
    idx_s = ModeIndex(find_azimuthal_number(small, mat, C / 1e-6, 1, 0, "TM", 50)[0], 1, 0, "TM")
    idx_l = ModeIndex(find_azimuthal_number(large, mat, C / 1e-6, 1, 0, "TM", 50)[0], 1, 0, "TM")
    assert free_spectral_range(large, mat, idx_l, 50) < free_spectral_range(small, mat, idx_s, 50)


def test_effective_index_definitional():
    R, n, nu = 1.3e-3, 2.17, 3.1e14
    m = 2 * math.pi * R * n * nu / C
    assert effective_index(m, nu, R) == pytest.approx(n, rel=1e-15)
    assert effective_index(m, 2 * nu, R) == pytest.approx(n / 2, rel=1e-15)


def test_effective_index_at_pump_anchor():
    n = effective_index(64756, C / 532e-9, 2.5e-3)
    assert n == pytest.approx(64756 * 532e-9 / (2 * math.pi * 2.5e-3), rel=1e-14)
    assert n == pytest.approx(2.19, abs=5e-3)


def test_effective_index_rejects_nonpositive():
    with pytest.raises(DomainError):
        effective_index(10, 0.0, 1e-3)


@pytest.mark.parametrize("m", [16000, 40000, 90000])
def test_leading_order_scaling(geom, mat, m):
    T = 60.0
    nu = mode_frequency(geom, mat, ModeIndex(m), T)
    n = oracles.index("e", C / nu * 1e6, T)
    R = oracles.radius(geom.R, geom.T_ref, T)
    assert 0.999 < nu / (m * C / (2 * math.pi * R * n)) < 1.01


def test_vectorized_matches_scalar(geom, mat):
    ms = np.array([30000, 45000, 60000])
    Ts = np.array([[40.0], [120.0]])
    grid = eigenfrequency(geom, mat, ms, 1, 0, "TE", Ts)
    assert grid.shape == (2, 3)
    assert grid[1, 2] == mode_frequency(geom, mat, ModeIndex(60000), 120.0)


def test_out_of_range_wavelength_rejected(geom, mat):
    with pytest.raises(DomainError, match="wavelength"):
        mode_frequency(geom, mat, ModeIndex(2000), 50.0)


def test_nonconvergence_reports_residual(geom, mat, monkeypatch):
    monkeypatch.setattr(dispersion, "_MAX_ITER", 1)
    with pytest.raises(NumericalError) as err:
        mode_frequency(geom, mat, ModeIndex(64000), 100.0)
    assert err.value.detail["last_residual_Hz"] > 1e3
