"""Continuous tuning by combining temperature with a second shift mechanism.

Temperature alone moves all three resonances together and only keeps a
triplet phase matched at isolated points. A second mechanism that shifts
pump, signal and idler at different rates adds one degree of freedom, so the
signal frequency can be set continuously while energy conservation is
restored by a compensating temperature change.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .dispersion import eigenfrequency
from .errors import DomainError, NumericalError, RangeError
from .material import axis_for_polarization, electrooptic_index_shift, refractive_index
from .phasematch import RESIDUAL_TOL_HZ, PhaseMatchSolution

TARGET_TOL_HZ = 1e5
_DT = 1e-3
_DU_FRACTION = 1e-3


@dataclass(frozen=True)
class ShiftMechanism:
    """Linear frequency shifts per control unit [Hz/unit] with an admissible control range."""

    kind: str
    rate_p: float
    rate_s: float
    rate_i: float
    u_min: float
    u_max: float
    unit: str = "1"

    def __post_init__(self):
        if not all(np.isfinite([self.rate_p, self.rate_s, self.rate_i])):
            raise DomainError("shift rates must be finite")
        if not self.u_min <= 0 <= self.u_max or self.u_min == self.u_max:
            raise DomainError(f"control range [{self.u_min}, {self.u_max}] must contain 0 and be non-empty")

    @property
    def rates(self):
        return np.array([self.rate_p, self.rate_s, self.rate_i])

    def shifts(self, u):
        return self.rates * u


def null_mechanism(u_span=1.0):
    """No second mechanism; only the base phase-matching point is reachable."""
    return ShiftMechanism("null", 0.0, 0.0, 0.0, -u_span, u_span)


def electrooptic_mechanism(geom, mat, sol, fringe_factor=1.0, U_range=(-200.0, 200.0)):
    """Shift rates [Hz/V] from a bias across the resonator thickness.

    Each rate is -nu * dn / n with dn the index change per volt for the
    polarization and wavelength of the mode.
    """
    rates = []
    for idx, nu in zip((sol.triplet.pump, sol.triplet.signal, sol.triplet.idler), (sol.nu_p, sol.nu_s, sol.nu_i)):
        axis = axis_for_polarization(idx.pol)
        lam = 2.99792458e8 / nu
        n = refractive_index(mat, axis, lam, sol.T_raw)
        dn = electrooptic_index_shift(mat, axis, lam, sol.T_raw, 1.0, geom.h, fringe_factor)
        rates.append(float(-nu * dn / n))
    return ShiftMechanism("electrooptic", *rates, U_range[0], U_range[1], "V")


def load_mechanism(path=None):
    """Read a ``[substrate]`` style mechanism file; ``None`` gives the bundled illustrative rates."""
    cfg = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    if path is None:
        cfg.read_string(resources.files("wgmopo.data").joinpath("substrate.ini").read_text())
    elif not cfg.read(path):
        raise DomainError(f"cannot read mechanism file {path}")
    name = cfg.sections()[0] if cfg.sections() else None
    if name is None:
        raise DomainError("mechanism file has no section")
    s = cfg[name]
    try:
        return ShiftMechanism(
            name,
            float(s["pump_Hz"]),
            float(s["signal_Hz"]),
            float(s["idler_Hz"]),
            float(s["u_min"]),
            float(s["u_max"]),
            s.get("unit", "1"),
        )
    except KeyError as exc:
        raise DomainError(f"mechanism file lacks key {exc.args[0]}") from None


@dataclass(frozen=True)
class RetuneResult:
    control: float
    T: float
    solution: PhaseMatchSolution
    nu_pump_laser: float
    iterations: int


def _frequencies(geom, mat, trip, T):
    return np.array(
        [float(eigenfrequency(geom, mat, i.m, i.q, i.p, i.pol, T)) for i in (trip.pump, trip.signal, trip.idler)]
    )


def _residuals(geom, mat, trip, mech, nu_s_base, target, x):
    T, u = x
    nu = _frequencies(geom, mat, trip, T) + mech.shifts(u)
    return np.array([nu[0] - nu[1] - nu[2], nu[1] - nu_s_base - target]), nu


def _jacobian(geom, mat, trip, mech, nu_s_base, target, x, f0):
    du = _DU_FRACTION * (mech.u_max - mech.u_min)
    J = np.empty((2, 2))
    J[:, 0] = (_residuals(geom, mat, trip, mech, nu_s_base, target, x + [_DT, 0.0])[0] - f0) / _DT
    J[:, 1] = (_residuals(geom, mat, trip, mech, nu_s_base, target, x + [0.0, du])[0] - f0) / du
    return J


def reach(geom, mat, base, mech, control0=0.0):
    """Linearized reachable signal offsets (low, high) [Hz] over the control range.

    ``control0`` is the control value at which ``base`` was obtained.
    """
    x = np.array([base.T_raw, control0])
    f0, _ = _residuals(geom, mat, base.triplet, mech, base.nu_s, 0.0, x)
    J = _jacobian(geom, mat, base.triplet, mech, base.nu_s, 0.0, x, f0)
    # Along the energy-conserving line dT = -J10/J00 du the signal offset moves by k du.
    if J[0, 0] == 0:
        raise NumericalError("energy mismatch does not depend on temperature")
    k = J[1, 1] - J[1, 0] * J[0, 1] / J[0, 0]
    ends = sorted((k * (mech.u_min - control0), k * (mech.u_max - control0)))
    return ends[0], ends[1]


def retune(geom, mat, base, mech, target, max_iter=50, control0=0.0):
    """Temperature and control value that offset the signal by ``target`` [Hz].

    ``base`` is a phase-matched solution obtained at control value
    ``control0`` (default 0, i.e. the mechanism switched off).

    Solves energy conservation and the signal-offset condition jointly by a
    damped Newton iteration on (T, u) with a finite-difference Jacobian.

    Raises
    ------
    RangeError
        ``target`` lies beyond what the control range reaches; ``achievable``
        gives the (low, high) reachable offsets.
    NumericalError
        Newton iteration failed to converge.
    """
    lo, hi = reach(geom, mat, base, mech, control0)
    slack = 1e-9 * max(abs(lo), abs(hi), 1.0)
    if not lo - slack <= target <= hi + slack:
        raise RangeError(
            f"signal offset {target / 1e6:.3f} MHz outside reachable [{lo / 1e6:.3f}, {hi / 1e6:.3f}] MHz",
            achievable=(lo, hi),
        )
    trip = base.triplet
    x = np.array([base.T_raw, float(control0)])
    f, nu = _residuals(geom, mat, trip, mech, base.nu_s, target, x)
    tlo, thi = mat.temperature_range
    for it in range(1, max_iter + 1):
        if abs(f[0]) < 1e3 and abs(f[1]) < 1e3:
            break
        J = _jacobian(geom, mat, trip, mech, base.nu_s, target, x, f)
        try:
            dx = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -f, rcond=None)[0]
        lam = 1.0
        norm0 = np.linalg.norm(f)
        while lam > 1e-4:
            xn = x + lam * dx
            xn[0] = min(max(xn[0], tlo), thi)
            fn, nun = _residuals(geom, mat, trip, mech, base.nu_s, target, xn)
            if np.linalg.norm(fn) < norm0:
                break
            lam *= 0.5
        else:
            raise NumericalError("damped Newton stalled", T=x[0], control=x[1], residual_Hz=f.tolist())
        x, f, nu = xn, fn, nun
    else:
        raise NumericalError("retune did not converge", T=x[0], control=x[1], residual_Hz=f.tolist())
    T, u = float(x[0]), float(x[1])
    if not mech.u_min - 1e-9 <= u <= mech.u_max + 1e-9:
        raise RangeError(
            f"control {u:.4g} {mech.unit} outside [{mech.u_min}, {mech.u_max}]", achievable=(lo, hi)
        )
    if abs(f[0]) >= RESIDUAL_TOL_HZ or abs(f[1]) >= TARGET_TOL_HZ:
        raise NumericalError("retune verification failed", residual_Hz=f.tolist())
    sol = PhaseMatchSolution(trip, T, float(mat.calibration.apply(T)), *map(float, nu), float(f[0]))
    return RetuneResult(u, T, sol, float(nu[0]), it)
