"""Steady-state observables of a triply resonant optical parametric oscillator.

Detunings are normalized to the half width of the respective mode, so a
detuning of 1/2 sits at half maximum of the Lorentzian response.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: Pump power relative to threshold up to which the linear pair-rate formula is trusted.
LOW_GAIN_FRACTION = 0.1


@dataclass(frozen=True)
class CavityMode:
    """Resonance with coupling rate ``gamma_coupling`` and intrinsic loss rate ``gamma_loss`` [Hz]."""

    nu_res: float
    gamma_coupling: float
    gamma_loss: float

    def __post_init__(self):
        if self.gamma_coupling < 0 or self.gamma_loss <= 0:
            raise DomainError(
                f"need gamma_coupling >= 0 and gamma_loss > 0, got "
                f"{self.gamma_coupling}, {self.gamma_loss}"
            )

    @property
    def gamma(self):
        return self.gamma_coupling + self.gamma_loss

    @property
    def kappa(self):
        """Escape probability gamma'/gamma, strictly below one."""
        return self.gamma_coupling / self.gamma


@dataclass(frozen=True)
class OperatingPoint:
    P_pump: float
    P_0: float
    delta_p: float = 0.0
    Delta: float = 0.0

    def __post_init__(self):
        if self.P_0 <= 0:
            raise DomainError(f"P_0 must be positive, got {self.P_0}")

    @property
    def delta_si(self):
        """Joint signal/idler detuning set by the oscillation condition."""
        return self.Delta / 2.0

    @property
    def P_th(self):
        return threshold(self.P_0, self.delta_p, self.Delta)


@dataclass(frozen=True)
class PairRate:
    """Internal pair rate with a flag marking the low-gain approximation as stretched."""

    rate: float
    pump_fraction: float
    beyond_low_gain: bool


@dataclass(frozen=True)
class OutputPower:
    power: float
    below_threshold: bool


def lorentzian_response(delta):
    return 1.0 / (1.0 + 4.0 * np.square(delta))


def threshold(P_0, delta_p, Delta):
    """Pump power needed for oscillation at pump detuning and PDC mismatch."""
    if P_0 <= 0:
        raise DomainError(f"P_0 must be positive, got {P_0}")
    return P_0 * (1.0 + 4.0 * np.square(delta_p)) * (1.0 + np.square(Delta))


def pair_rate_internal(gamma_s, gamma_i, P_p, P_th):
    """Intracavity photon-pair rate below threshold [pairs/s].

    The result is flagged when ``P_p`` exceeds a tenth of ``P_th``, where the
    linear dependence on pump power starts to fail.
    """
    if gamma_s <= 0 or gamma_i <= 0:
        raise DomainError(f"bandwidths must be positive, got {gamma_s}, {gamma_i}")
    if P_th <= 0:
        raise DomainError(f"P_th must be positive, got {P_th}")
    frac = P_p / P_th
    rate = 2.0 * np.pi * (gamma_s * gamma_i) / (gamma_s + gamma_i) * frac
    return PairRate(float(rate), float(frac), bool(frac >= LOW_GAIN_FRACTION))


def external_rates(r_si, kappa_s, kappa_i):
    """Escaped signal, idler and pair rates (R_s, R_i, R_si)."""
    for k in (kappa_s, kappa_i):
        if not 0 < k < 1:
            raise DomainError(f"coupling ratio must lie in (0, 1), got {k}")
    return kappa_s * r_si, kappa_i * r_si, kappa_s * kappa_i * r_si


def output_power(P_p, P_0, delta_p, Delta, kappa_p, kappa_si, nu_si, nu_p):
    """Signal or idler output power above threshold [W].

    Below threshold, or wherever the expression turns negative, the power is
    clamped to zero and ``below_threshold`` is set.
    """
    if P_0 <= 0:
        raise DomainError(f"P_0 must be positive, got {P_0}")
    radicand = P_p / P_0 - (Delta + 2.0 * delta_p) ** 2
    if radicand < 0:
        return OutputPower(0.0, True)
    p = 4.0 * kappa_p * kappa_si * P_0 * (nu_si / nu_p) * (np.sqrt(radicand) - 1.0 + 2.0 * delta_p * Delta)
    if p <= 0:
        return OutputPower(0.0, True)
    return OutputPower(float(p), False)


def conversion_efficiency(P_p, P_0, kappa_p=1.0, kappa_si=1.0, nu_si=1.0, nu_p=2.0):
    """Output power per unit pump power on resonance."""
    return output_power(P_p, P_0, 0.0, 0.0, kappa_p, kappa_si, nu_si, nu_p).power / P_p
