import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from wgmopo.errors import DomainError
from wgmopo.material import (
    EXTRAORDINARY,
    ORDINARY,
    calibrate_temperature,
    electrooptic_index_shift,
    index_derivatives,
    load_material,
    parse_material,
    radius_at_temperature,
    refractive_index,
    uncalibrate_temperature,
)

# Independent transcription of the bundled coefficient sets, evaluated with math only.
ZELMON_E = ((2.2454, 0.01242), (1.3005, 0.05313), (6.8972, 331.33))
EDWARDS_E = dict(A1=4.5820, A2=0.09921, A3=0.21090, A4=0.021940, B1=5.2716e-8, B2=-4.9143e-8, B3=2.2971e-7)


def _oracle_ne(lam_um, T):
    base = math.sqrt(1 + sum(b * lam_um**2 / (lam_um**2 - c) for b, c in ZELMON_E))

    def ed(t):
        k = EDWARDS_E
        F = (t - 24.5) * (t + 24.5 + 546)
        return math.sqrt(
            k["A1"] + (k["A2"] + k["B1"] * F) / (lam_um**2 - (k["A3"] + k["B2"] * F) ** 2)
            + k["B3"] * F - k["A4"] * lam_um**2
        )

    return base + ed(T) - ed(21.0)


def _five_point(f, x, h):
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


wavelengths = st.floats(0.4e-6, 2.6e-6)
temperatures = st.floats(20.0, 250.0)


def test_negative_birefringence_at_532(mat):
    assert refractive_index(mat, ORDINARY, 532e-9, 25.0) > refractive_index(mat, EXTRAORDINARY, 532e-9, 25.0)


def test_extraordinary_532_100_matches_transcription(mat):
    n = refractive_index(mat, EXTRAORDINARY, 532e-9, 100.0)
    assert n == pytest.approx(_oracle_ne(0.532, 100.0), rel=1e-14)
    # room-temperature 5 % MgO:LN tables put n_e(532 nm) near 2.22-2.23
    assert 2.20 < n < 2.25


def test_thermo_optic_positive_at_pump(mat):
    assert index_derivatives(mat, EXTRAORDINARY, 532e-9, 100.0)[2] > 0


@pytest.mark.parametrize("axis", [ORDINARY, EXTRAORDINARY])
def test_window_invariants(mat, axis):
    lam = np.linspace(0.4e-6, 2.6e-6, 120)[:, None]
    T = np.linspace(20, 250, 60)[None, :]
    n, _, dndT = index_derivatives(mat, axis, lam, T)
    assert np.all((n > 1) & (n < 3))
    assert np.all(dndT > 0)


def test_birefringence_whole_window(mat):
    lam = np.linspace(0.4e-6, 2.6e-6, 120)[:, None]
    T = np.linspace(20, 250, 60)[None, :]
    assert np.all(refractive_index(mat, ORDINARY, lam, T) > refractive_index(mat, EXTRAORDINARY, lam, T))


def test_expansion_positive(mat):
    assert np.all(mat.expansion.coefficient(np.linspace(20, 250, 50)) > 0)


@pytest.mark.parametrize("axis", [ORDINARY, EXTRAORDINARY])
@settings(max_examples=60, deadline=None)
@given(lam=st.floats(0.45e-6, 2.5e-6), T=st.floats(25.0, 245.0))
def test_derivatives_match_central_differences(mat, axis, lam, T):
    n, dl, dT = index_derivatives(mat, axis, lam, T)
    h_l, h_T = 1e-9, 1e-2  # 1e-3 um and 1e-2 K
    # five-point central stencil; the three-point one has O(h^2) error near 2e-6 here
    fd_l = _five_point(lambda x: refractive_index(mat, axis, x, T), lam, h_l)
    fd_T = _five_point(lambda x: refractive_index(mat, axis, lam, x), T, h_T)
    assert fd_l == pytest.approx(dl, rel=1e-6)
    assert fd_T == pytest.approx(dT, rel=1e-6)


def test_derivatives_match_symbolic(mat):
    lam, T = sp.symbols("lam T", positive=True)
    base = sp.sqrt(1 + sum(b * lam**2 / (lam**2 - c) for b, c in ZELMON_E))
    k = {key: sp.Float(v) for key, v in EDWARDS_E.items()}

    def ed(t):
        F = (t - sp.Float(24.5)) * (t + sp.Float(24.5 + 546))
        return sp.sqrt(k["A1"] + (k["A2"] + k["B1"] * F) / (lam**2 - (k["A3"] + k["B2"] * F) ** 2)
                       + k["B3"] * F - k["A4"] * lam**2)

    n = base + ed(T) - ed(sp.Float(21))
    for lv, tv in [(0.532, 100.0), (1.064, 40.0), (2.0, 220.0)]:
        sub = {lam: lv, T: tv}
        _, dl, dT = index_derivatives(mat, EXTRAORDINARY, lv * 1e-6, tv)
        assert float(sp.diff(n, lam).subs(sub)) * 1e6 == pytest.approx(dl, rel=1e-10)
        assert float(sp.diff(n, T).subs(sub)) == pytest.approx(dT, rel=1e-10)


@pytest.mark.parametrize(
    "lam, T, bound",
    [(0.39e-6, 25.0, "lower bound 400.0 nm"), (2.7e-6, 25.0, "upper bound 2600.0 nm"),
     (1e-6, 19.0, "lower bound 20.0 C"), (1e-6, 251.0, "upper bound 250.0 C")],
)
def test_out_of_range_names_bound(mat, lam, T, bound):
    with pytest.raises(DomainError, match=bound):
        refractive_index(mat, ORDINARY, lam, T)


def test_radius_identity_at_reference(mat):
    assert radius_at_temperature(mat, 2.5e-3, 100.0, 100.0) == pytest.approx(2.5e-3, rel=1e-15)


def test_radius_expansion_25_to_95(mat):
    R = radius_at_temperature(mat, 2.5e-3, 25.0, 95.0)
    a, b = 1.54e-5, 5.3e-9
    assert R == pytest.approx(2.5e-3 * (1 + a * 70 + b * 70**2), rel=1e-14)
    assert R == pytest.approx(2.5e-3 * (1 + a * 70), rel=3e-5)


@settings(max_examples=50, deadline=None)
@given(T1=temperatures, T2=temperatures)
def test_radius_monotone_and_optical_length_grows(mat, T1, T2):
    if T1 == T2:
        return
    lo, hi = sorted((T1, T2))
    assert radius_at_temperature(mat, 1e-3, 25, hi) > radius_at_temperature(mat, 1e-3, 25, lo)
    for axis in (ORDINARY, EXTRAORDINARY):
        nR = [radius_at_temperature(mat, 1e-3, 25, t) * refractive_index(mat, axis, 1e-6, t) for t in (lo, hi)]
        assert nR[1] > nR[0]


def test_electrooptic_zero_bias(mat):
    assert electrooptic_index_shift(mat, EXTRAORDINARY, 532e-9, 25.0, 0.0, 0.5e-3) == 0.0


@settings(max_examples=40, deadline=None)
@given(U=st.floats(-500, 500), f=st.floats(0.01, 1.0))
def test_electrooptic_odd_and_linear(mat, U, f):
    a = electrooptic_index_shift(mat, ORDINARY, 1064e-9, 60.0, U, 0.5e-3, f)
    b = electrooptic_index_shift(mat, ORDINARY, 1064e-9, 60.0, -U, 0.5e-3, f)
    one = electrooptic_index_shift(mat, ORDINARY, 1064e-9, 60.0, 1.0, 0.5e-3, f)
    assert a == pytest.approx(-b, rel=1e-14, abs=1e-300)
    assert a == pytest.approx(U * one, rel=1e-12, abs=1e-300)


def test_electrooptic_closed_form(mat):
    n = refractive_index(mat, EXTRAORDINARY, 532e-9, 25.0)
    dn = electrooptic_index_shift(mat, EXTRAORDINARY, 532e-9, 25.0, 10.0, 0.5e-3)
    assert dn == pytest.approx(-0.5 * 31e-12 * n**3 * 10.0 / 0.5e-3, rel=1e-14)


@pytest.mark.parametrize("h, f", [(0.0, 1.0), (-1e-3, 1.0), (1e-3, 0.0), (1e-3, 1.5)])
def test_electrooptic_rejects_bad_geometry(mat, h, f):
    with pytest.raises(DomainError):
        electrooptic_index_shift(mat, EXTRAORDINARY, 532e-9, 25.0, 1.0, h, f)


def test_calibration_examples(mat):
    assert calibrate_temperature(mat, 100.0) == pytest.approx(133.0)
    assert calibrate_temperature(mat, 0.0) == pytest.approx(11.0)
    assert uncalibrate_temperature(mat, calibrate_temperature(mat, 120.0)) == pytest.approx(120.0, rel=1e-15)


@given(a=st.floats(-100, 400), b=st.floats(-100, 400))
def test_calibration_strictly_increasing(a, b):
    m = load_material()
    if b - a > 1e-9:
        assert calibrate_temperature(m, a) < calibrate_temperature(m, b)


def test_asset_header_records_sources(mat):
    assert "Zelmon" in mat.source and "Edwards" in mat.source
    assert mat.mgo_fraction == 5.0
    assert mat.r_extraordinary == pytest.approx(31e-12)
    assert mat.r_ordinary == pytest.approx(8e-12)


def test_alternative_asset_loads():
    from importlib import resources

    text = resources.files("wgmopo.data").joinpath("mgo_ln_gayer2008.ini").read_text()
    alt = parse_material(text, "gayer")
    n_o = refractive_index(alt, ORDINARY, 1.064e-6, 25.0)
    n_e = refractive_index(alt, EXTRAORDINARY, 1.064e-6, 25.0)
    assert 2.1 < n_e < n_o < 2.3


def test_override_asset_from_file(tmp_path):
    from importlib import resources

    text = resources.files("wgmopo.data").joinpath("mgo_ln_5mol.ini").read_text()
    p = tmp_path / "m.ini"
    p.write_text(text.replace("r_extraordinary_m_per_V = 31e-12", "r_extraordinary_m_per_V = 30e-12"))
    assert load_material(p).r_extraordinary == pytest.approx(30e-12)


def test_asset_missing_section_rejected():
    with pytest.raises(DomainError, match="expansion"):
        parse_material("[sellmeier.ordinary]\nform=sellmeier\nB=1\nC_um2=0.01\n"
                       "[sellmeier.extraordinary]\nform=sellmeier\nB=1\nC_um2=0.01\n"
                       "[electrooptic]\nr_extraordinary_m_per_V=1\nr_ordinary_m_per_V=1\n")
