"""Whispering-gallery-mode eigenfrequencies of a spheroidal resonator.

The asymptotic dispersion relation used throughout is

    nu = c / (2 pi n R) * [ l + alpha_q (l/2)^(1/3) + p (sqrt(R/rho) - 1)
                            - chi n / sqrt(n^2 - 1) + sqrt(R/rho) / 2 ]

with l = m + p, chi = 1 (TE) or 1/n^2 (TM) and n evaluated self-consistently
at the vacuum wavelength c/nu. Terms of order l^(-1/3) are dropped.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ai_zeros

from .errors import DomainError, NumericalError
from .material import axis_for_polarization, radius_at_temperature

C = 299_792_458.0
_TOL_HZ = 1e3
_MAX_ITER = 100


@dataclass(frozen=True)
class ResonatorGeometry:
    """Spheroid dimensions measured at ``T_ref``.

    Attributes
    ----------
    R : float
        Major radius [m].
    rho : float
        Rim curvature radius [m]. Scales with ``R`` under thermal expansion.
    h : float
        Thickness, the electrode spacing for electro-optic tuning [m].
    T_ref : float
        Temperature at which ``R`` and ``rho`` were measured [C].
    """

    R: float
    rho: float
    h: float = 0.5e-3
    T_ref: float = 25.0

    def __post_init__(self):
        if not (self.R > 0 and self.rho > 0):
            raise DomainError(f"R and rho must be positive, got R={self.R}, rho={self.rho}")
        if not np.isfinite(self.R / self.rho) or self.R / self.rho < 1:
            raise DomainError(f"R/rho must be finite and >= 1, got {self.R / self.rho}")
        if self.h <= 0:
            raise DomainError(f"thickness h must be positive, got {self.h}")

    @property
    def aspect(self):
        return self.R / self.rho


@dataclass(frozen=True)
class ModeIndex:
    m: int
    q: int = 1
    p: int = 0
    pol: str = "TE"

    def __post_init__(self):
        if self.m < 1 or self.q < 1 or self.p < 0:
            raise DomainError(f"invalid mode index m={self.m}, q={self.q}, p={self.p}")
        if self.pol not in ("TE", "TM"):
            raise DomainError(f"pol must be 'TE' or 'TM', got {self.pol!r}")

    @property
    def ell(self):
        return self.m + self.p

    def shifted(self, dm):
        return ModeIndex(self.m + dm, self.q, self.p, self.pol)


@lru_cache(maxsize=None)
def _exact_airy_zeros():
    return -ai_zeros(20)[0]


def airy_root(q, exact=False):
    """Magnitude of the q-th zero of Ai.

    By default the closed-form asymptotic [3 pi/2 (q - 1/4)]^(2/3) is used,
    which underestimates the first zero (2.3381) by about 0.8 %. ``exact``
    selects tabulated zeros for q <= 20.
    """
    if q < 1 or int(q) != q:
        raise DomainError(f"radial number q must be an integer >= 1, got {q}")
    if exact:
        if q > 20:
            raise DomainError(f"exact Airy zeros tabulated for q <= 20, got {q}")
        return float(_exact_airy_zeros()[int(q) - 1])
    return (1.5 * np.pi * (q - 0.25)) ** (2.0 / 3.0)


def bracket_term(ell, alpha, p, aspect, n, chi_te):
    """Dimensionless bracket of the dispersion relation."""
    chi = 1.0 if chi_te else 1.0 / (n * n)
    s = np.sqrt(aspect)
    return ell + alpha * np.cbrt(ell / 2.0) + p * (s - 1.0) - chi * n / np.sqrt(n * n - 1.0) + 0.5 * s


def eigenfrequency(geom, mat, m, q, p, pol, T, exact_airy=False, check=True):
    """Vectorized mode frequency over broadcastable ``m`` and ``T`` [Hz].

    Raises
    ------
    NumericalError
        If the self-consistent index iteration does not settle within 100 steps.
    DomainError
        If a converged wavelength or temperature lies outside the material range.
    """
    m = np.asarray(m, dtype=float)
    T = np.asarray(T, dtype=float)
    if check:
        mat.check_range(mat.wavelength_range[0], T)
    axis = mat.axis(axis_for_polarization(pol))
    alpha = airy_root(q, exact_airy)
    R = radius_at_temperature(mat, geom.R, geom.T_ref, T)
    ell = m + p
    te = pol == "TE"
    pref = C / (2.0 * np.pi * R)
    n = np.full(np.broadcast(m, T).shape, 2.2)
    nu = pref * bracket_term(ell, alpha, p, geom.aspect, n, te) / n
    for _ in range(_MAX_ITER):
        lam_um = C / nu * 1e6
        with np.errstate(invalid="ignore"):
            n = axis.index(lam_um, T)
        if check and not np.all(np.isfinite(n)):
            mat.check_range(C / nu, T)
        new = pref * bracket_term(ell, alpha, p, geom.aspect, n, te) / n
        step = np.max(np.abs(new - nu)) if new.size else 0.0
        nu = new
        if not np.all(np.isfinite(nu)):
            break
        if step < _TOL_HZ:
            if check:
                mat.check_range(C / nu, T)
            return nu
    raise NumericalError(
        "self-consistent mode frequency did not converge",
        last_residual_Hz=float(step) if np.isfinite(step) else None,
    )


def mode_frequency(geom, mat, idx, T, exact_airy=False):
    """Resonance frequency [Hz] of mode ``idx`` at temperature ``T`` [C]."""
    return float(eigenfrequency(geom, mat, idx.m, idx.q, idx.p, idx.pol, T, exact_airy))


def free_spectral_range(geom, mat, idx, T):
    """nu(m + 1) - nu(m) [Hz]."""
    nu = eigenfrequency(geom, mat, [idx.m, idx.m + 1], idx.q, idx.p, idx.pol, T)
    return float(nu[1] - nu[0])


def continuous_azimuthal_number(geom, mat, nu_target, q, p, pol, T):
    """Real-valued m at which the dispersion relation yields ``nu_target``."""
    if not nu_target > 0:
        raise DomainError(f"target frequency must be positive, got {nu_target}")
    mat.check_range(C / nu_target, T)
    axis = mat.axis(axis_for_polarization(pol))
    R = float(radius_at_temperature(mat, geom.R, geom.T_ref, T))
    n = float(axis.index(C / nu_target * 1e6, T))
    # With n fixed by the target wavelength, the bracket is monotone in ell.
    target = 2.0 * np.pi * n * R * nu_target / C
    alpha = airy_root(q)
    te = pol == "TE"
    offset = bracket_term(0.0, 0.0, p, geom.aspect, n, te)
    ell = target - offset
    for _ in range(50):
        f = ell + alpha * np.cbrt(ell / 2.0) + offset - target
        d = 1.0 + alpha / (6.0 * np.cbrt(ell * ell / 4.0))
        step = f / d
        ell -= step
        if abs(step) < 1e-9:
            break
    return ell - p


def find_azimuthal_number(geom, mat, nu_target, q, p, pol, T):
    """Integer m whose resonance lies closest to ``nu_target``.

    Returns
    -------
    m : int
    residual : float
        mode_frequency(m) - nu_target [Hz], smaller than half an FSR.
    """
    m0 = int(np.floor(continuous_azimuthal_number(geom, mat, nu_target, q, p, pol, T)))
    cand = np.arange(max(m0 - 1, 1), m0 + 3)
    nu = eigenfrequency(geom, mat, cand, q, p, pol, T)
    k = int(np.argmin(np.abs(nu - nu_target)))
    return int(cand[k]), float(nu[k] - nu_target)


def effective_index(m, nu, R):
    """n' = c m / (2 pi R nu)."""
    if not (nu > 0 and R > 0):
        raise DomainError("nu and R must be positive")
    return C * m / (2.0 * np.pi * R * nu)
