"""Optical and thermal properties of the resonator host crystal.

The host is uniaxial lithium niobate cut so that its optic axis coincides
with the resonator symmetry axis. TE whispering-gallery modes see the
extraordinary index and TM modes the ordinary index.

Material data live in a small INI asset (see ``data/mgo_ln_5mol.ini``) so the
coefficients can be swapped without touching code. Three dispersion forms are
understood:

``sellmeier``
    n^2 = 1 + sum_k B_k lam^2 / (lam^2 - C_k), temperature independent.
``edwards``
    n^2 = A1 + (A2 + B1 F) / (lam^2 - (A3 + B2 F)^2) + B3 F - A4 lam^2,
    F = (T - T0)(T + T0 + F_offset).
``gayer``
    n^2 = a1 + b1 f + (a2 + b2 f) / (lam^2 - (a3 + b3 f)^2)
          + (a4 + b4 f) / (lam^2 - a5^2) - a6 lam^2,
    f = (T - T0)(T + T0 + f_offset).

Wavelengths inside these formulas are in micrometres and temperatures in
degrees Celsius. An axis may combine a room-temperature base form with a
temperature increment taken from a second form, n(lam, T) = n_base(lam, T) +
n_inc(lam, T) - n_inc(lam, T_ref).
"""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DomainError

EXTRAORDINARY = "extraordinary"
ORDINARY = "ordinary"
_AXES = (EXTRAORDINARY, ORDINARY)

_FORM_KEYS = {
    "sellmeier": None,  # variable length B1..Bk / C1..Ck
    "edwards": ("A1", "A2", "A3", "A4", "B1", "B2", "B3", "T0_C", "F_offset"),
    "gayer": ("a1", "a2", "a3", "a4", "a5", "a6", "b1", "b2", "b3", "b4", "T0_C", "f_offset"),
}


def axis_for_polarization(pol):
    """Crystal axis seen by a TE or TM mode of a z-cut resonator."""
    pol = pol.upper()
    if pol == "TE":
        return EXTRAORDINARY
    if pol == "TM":
        return ORDINARY
    raise DomainError(f"polarization must be 'TE' or 'TM', got {pol!r}")


@dataclass(frozen=True)
class DispersionForm:
    """One closed-form n^2(lam, T) expression with its coefficients."""

    form: str
    coefficients: tuple

    def __post_init__(self):
        if self.form not in _FORM_KEYS:
            raise DomainError(f"unknown dispersion form {self.form!r}")

    def n2(self, lam_um, T):
        return self._evaluate(lam_um, T)[0]

    def n2_with_derivatives(self, lam_um, T):
        """Return (n^2, d n^2/d lam [1/um], d n^2/d T [1/K])."""
        return self._evaluate(lam_um, T)

    def _evaluate(self, lam, T):
        lam = np.asarray(lam, dtype=float)
        T = np.asarray(T, dtype=float)
        l2 = lam * lam
        if self.form == "sellmeier":
            half = len(self.coefficients) // 2
            B, C = self.coefficients[:half], self.coefficients[half:]
            n2 = np.ones(np.broadcast(lam, T).shape)
            dl = np.zeros_like(n2)
            for b, c in zip(B, C):
                d = l2 - c
                n2 = n2 + b * l2 / d
                dl = dl - 2.0 * b * c * lam / (d * d)
            return n2, dl, np.zeros_like(n2)

        if self.form == "edwards":
            A1, A2, A3, A4, B1, B2, B3, T0, off = self.coefficients
            F = (T - T0) * (T + T0 + off)
            dF = 2.0 * T + off
            num = A2 + B1 * F
            a = A3 + B2 * F
            den = l2 - a * a
            n2 = A1 + num / den + B3 * F - A4 * l2
            dl = -2.0 * lam * num / (den * den) - 2.0 * A4 * lam
            dT = (B1 / den + num * 2.0 * a * B2 / (den * den) + B3) * dF
            return n2, dl, dT

        a1, a2, a3, a4, a5, a6, b1, b2, b3, b4, T0, off = self.coefficients
        f = (T - T0) * (T + T0 + off)
        df = 2.0 * T + off
        num1 = a2 + b2 * f
        p1 = a3 + b3 * f
        den1 = l2 - p1 * p1
        num2 = a4 + b4 * f
        den2 = l2 - a5 * a5
        n2 = a1 + b1 * f + num1 / den1 + num2 / den2 - a6 * l2
        dl = -2.0 * lam * num1 / (den1 * den1) - 2.0 * lam * num2 / (den2 * den2) - 2.0 * a6 * lam
        dT = (b1 + b2 / den1 + num1 * 2.0 * p1 * b3 / (den1 * den1) + b4 / den2) * df
        return n2, dl, dT


@dataclass(frozen=True)
class AxisIndex:
    """Refractive index model for one crystal axis."""

    base: DispersionForm
    increment: DispersionForm | None = None
    increment_T_ref: float = 21.0

    def index_with_derivatives(self, lam_um, T):
        """Return (n, dn/d lam [1/um], dn/dT [1/K])."""
        n2, dl2, dT2 = self.base.n2_with_derivatives(lam_um, T)
        n = np.sqrt(n2)
        dl = dl2 / (2.0 * n)
        dT = dT2 / (2.0 * n)
        if self.increment is not None:
            m2, ml2, mT2 = self.increment.n2_with_derivatives(lam_um, T)
            r2 = self.increment.n2(lam_um, self.increment_T_ref)
            m = np.sqrt(m2)
            n = n + m - np.sqrt(r2)
            dl = dl + ml2 / (2.0 * m) - self.increment.n2_with_derivatives(lam_um, self.increment_T_ref)[1] / (
                2.0 * np.sqrt(r2)
            )
            dT = dT + mT2 / (2.0 * m)
        return n, dl, dT

    def index(self, lam_um, T):
        n2 = self.base.n2(lam_um, T)
        n = np.sqrt(n2)
        if self.increment is not None:
            n = n + np.sqrt(self.increment.n2(lam_um, T)) - np.sqrt(
                self.increment.n2(lam_um, self.increment_T_ref)
            )
        return n


@dataclass(frozen=True)
class ThermalExpansion:
    """Relative length L(T)/L(T0) = 1 + alpha (T - T0) + beta (T - T0)^2."""

    alpha: float
    beta: float = 0.0
    T0: float = 25.0

    def relative_length(self, T):
        d = np.asarray(T, dtype=float) - self.T0
        return 1.0 + self.alpha * d + self.beta * d * d

    def coefficient(self, T):
        """Instantaneous linear expansion coefficient (1/L) dL/dT."""
        d = np.asarray(T, dtype=float) - self.T0
        return (self.alpha + 2.0 * self.beta * d) / self.relative_length(T)


@dataclass(frozen=True)
class TemperatureCalibration:
    """Affine map from computed to experimental phase-matching temperature."""

    slope: float = 1.22
    offset: float = 11.0

    def apply(self, T):
        return self.slope * T + self.offset

    def invert(self, T):
        return (T - self.offset) / self.slope


@dataclass(frozen=True)
class MaterialModel:
    name: str
    ordinary: AxisIndex
    extraordinary: AxisIndex
    expansion: ThermalExpansion
    r_extraordinary: float  # m/V
    r_ordinary: float  # m/V
    calibration: TemperatureCalibration = field(default_factory=TemperatureCalibration)
    mgo_fraction: float = 5.0  # mol %
    wavelength_range: tuple = (0.4e-6, 2.6e-6)  # m
    temperature_range: tuple = (20.0, 250.0)  # deg C
    source: str = ""
    digest: str = ""

    def axis(self, pol_axis):
        if pol_axis == EXTRAORDINARY:
            return self.extraordinary
        if pol_axis == ORDINARY:
            return self.ordinary
        raise DomainError(f"axis must be {_AXES}, got {pol_axis!r}")

    def electrooptic_coefficient(self, pol_axis):
        return self.r_extraordinary if pol_axis == EXTRAORDINARY else self.r_ordinary

    def check_range(self, wavelength, temperature):
        lo, hi = self.wavelength_range
        w = np.asarray(wavelength, dtype=float)
        if np.any(~np.isfinite(w)) or np.any(w < lo):
            raise DomainError(
                f"wavelength {np.min(w) * 1e9:.1f} nm below lower bound {lo * 1e9:.1f} nm"
            )
        if np.any(w > hi):
            raise DomainError(
                f"wavelength {np.max(w) * 1e9:.1f} nm above upper bound {hi * 1e9:.1f} nm"
            )
        tlo, thi = self.temperature_range
        t = np.asarray(temperature, dtype=float)
        if np.any(t < tlo):
            raise DomainError(f"temperature {np.min(t):.3f} C below lower bound {tlo:.1f} C")
        if np.any(t > thi):
            raise DomainError(f"temperature {np.max(t):.3f} C above upper bound {thi:.1f} C")

    def with_calibration(self, slope, offset):
        return replace(self, calibration=TemperatureCalibration(slope, offset))

    def with_ranges(self, wavelength_range=None, temperature_range=None):
        """Copy with widened or narrowed validity windows."""
        return replace(
            self,
            wavelength_range=wavelength_range or self.wavelength_range,
            temperature_range=temperature_range or self.temperature_range,
        )


# ---------------------------------------------------------------------------
# asset loading


def _floats(text):
    return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())


def _parse_form(section):
    form = section.get("form", "").strip().lower()
    if form not in _FORM_KEYS:
        raise DomainError(f"unknown dispersion form {form!r} in [{section.name}]")
    if form == "sellmeier":
        B = _floats(section["B"])
        C = _floats(section["C_um2"])
        if len(B) != len(C) or not B:
            raise DomainError(f"[{section.name}] needs equally long B and C_um2 lists")
        return DispersionForm(form, B + C)
    try:
        coeffs = tuple(float(section[k]) for k in _FORM_KEYS[form])
    except KeyError as exc:
        raise DomainError(f"[{section.name}] missing coefficient {exc.args[0]}") from None
    return DispersionForm(form, coeffs)


def _parse_axis(cfg, axis):
    base = _parse_form(cfg[f"sellmeier.{axis}"])
    inc_name = f"thermooptic.{axis}"
    if cfg.has_section(inc_name):
        sec = cfg[inc_name]
        return AxisIndex(base, _parse_form(sec), float(sec.get("T_ref_C", "21.0")))
    return AxisIndex(base)


def parse_material(text, source="<string>"):
    """Build a :class:`MaterialModel` from asset text."""
    cfg = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cfg.optionxform = str
    try:
        cfg.read_string(text, source=source)
    except configparser.Error as exc:
        raise DomainError(f"malformed material asset {source}: {exc}") from None
    for needed in ("sellmeier.ordinary", "sellmeier.extraordinary", "expansion", "electrooptic"):
        if not cfg.has_section(needed):
            raise DomainError(f"material asset {source} lacks section [{needed}]")
    meta = cfg["material"] if cfg.has_section("material") else {}
    exp = cfg["expansion"]
    eo = cfg["electrooptic"]
    cal = cfg["calibration"] if cfg.has_section("calibration") else {}
    header = "\n".join(line[1:].strip() for line in text.splitlines() if line.startswith("#"))
    return MaterialModel(
        name=meta.get("name", Path(str(source)).stem),
        ordinary=_parse_axis(cfg, ORDINARY),
        extraordinary=_parse_axis(cfg, EXTRAORDINARY),
        expansion=ThermalExpansion(
            float(exp["alpha_per_K"]), float(exp.get("beta_per_K2", "0")), float(exp.get("T0_C", "25"))
        ),
        r_extraordinary=float(eo["r_extraordinary_m_per_V"]),
        r_ordinary=float(eo["r_ordinary_m_per_V"]),
        calibration=TemperatureCalibration(
            float(cal.get("slope", "1.22")), float(cal.get("offset_C", "11.0"))
        ),
        mgo_fraction=float(meta.get("mgo_mol_percent", "5.0")),
        wavelength_range=(
            float(meta.get("wavelength_min_m", "0.4e-6")),
            float(meta.get("wavelength_max_m", "2.6e-6")),
        ),
        temperature_range=(float(meta.get("T_min_C", "20")), float(meta.get("T_max_C", "250"))),
        source=header,
        digest=hashlib.sha256(text.encode()).hexdigest(),
    )


def load_material(path=None):
    """Load a material asset; ``None`` selects the bundled 5 mol% MgO:LN set."""
    if path is None:
        text = resources.files("wgmopo.data").joinpath("mgo_ln_5mol.ini").read_text()
        return parse_material(text, "mgo_ln_5mol.ini")
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DomainError(f"cannot read material asset {path}: {exc}") from None
    return parse_material(text, str(path))


# ---------------------------------------------------------------------------
# operations


def refractive_index(mat, pol_axis, wavelength, temperature, check=True):
    """Refractive index along ``pol_axis`` at ``wavelength`` [m] and ``temperature`` [C]."""
    if check:
        mat.check_range(wavelength, temperature)
    return mat.axis(pol_axis).index(np.asarray(wavelength) * 1e6, temperature)


def index_derivatives(mat, pol_axis, wavelength, temperature):
    """Return (n, dn/d lambda [1/m], dn/dT [1/K])."""
    mat.check_range(wavelength, temperature)
    n, dl, dT = mat.axis(pol_axis).index_with_derivatives(np.asarray(wavelength) * 1e6, temperature)
    return n, dl * 1e6, dT


def radius_at_temperature(mat, R_ref, T_ref, T):
    """Radius at ``T`` of a resonator measuring ``R_ref`` at ``T_ref``."""
    e = mat.expansion
    return R_ref * e.relative_length(T) / e.relative_length(T_ref)


def electrooptic_index_shift(mat, pol_axis, wavelength, temperature, U_bias, h, fringe_factor=1.0):
    """Index change -r n^3 U / (2 h) for a field applied along the optic axis.

    ``fringe_factor`` scales the ideal plate-capacitor field; 1 means no
    fringing loss.
    """
    if h <= 0:
        raise DomainError(f"electrode spacing h must be positive, got {h}")
    if not 0 < fringe_factor <= 1:
        raise DomainError(f"fringe_factor must lie in (0, 1], got {fringe_factor}")
    n = refractive_index(mat, pol_axis, wavelength, temperature)
    r = mat.electrooptic_coefficient(pol_axis)
    return -0.5 * r * n**3 * (U_bias / h) * fringe_factor


def calibrate_temperature(mat, T_calc):
    return mat.calibration.apply(T_calc)


def uncalibrate_temperature(mat, T_exp):
    return mat.calibration.invert(T_exp)
