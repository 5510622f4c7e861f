"""Phase-matched pump/signal/idler triplets of a naturally phase-matched resonator.

The pump is a TE (extraordinary) mode, signal and idler are TM (ordinary)
modes. A triplet is phase matched at the temperature where energy is
conserved between the three resonances. By convention the signal is the
member found at m_s >= m_p/2, i.e. the higher-frequency field of a
symmetric channel.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dispersion import (
    C,
    ModeIndex,
    continuous_azimuthal_number,
    eigenfrequency,
    find_azimuthal_number,
)
from .errors import DomainError, NotFoundError, NumericalError

RESIDUAL_TOL_HZ = 1e4
T_SAMPLE_STEP = 0.05


@dataclass(frozen=True)
class Channel:
    """Radial and angular numbers of a conversion channel."""

    q_s: int = 1
    q_i: int = 1
    p_s: int = 0
    p_i: int = 0
    q_p: int = 1
    p_p: int = 0

    def __post_init__(self):
        if min(self.q_s, self.q_i, self.q_p) < 1 or min(self.p_s, self.p_i, self.p_p) < 0:
            raise DomainError(f"invalid channel {self}")

    @property
    def cluster_number(self):
        return self.p_s + self.p_i - self.p_p

    @property
    def label(self):
        return f"q{self.q_p}{self.q_s}{self.q_i}_p{self.p_p}{self.p_s}{self.p_i}"

    def validate(self):
        """Reject channels that no integer triplet with m_p = m_s + m_i can realize."""
        a = self.cluster_number
        if a < 0 or a % 2:
            raise DomainError(
                f"channel {self.label}: cluster number p_s + p_i - p_p = {a} must be even and >= 0"
            )
        return self

    def swapped(self):
        return Channel(self.q_i, self.q_s, self.p_i, self.p_s, self.q_p, self.p_p)


@dataclass(frozen=True)
class ModeTriplet:
    pump: ModeIndex
    signal: ModeIndex
    idler: ModeIndex

    @classmethod
    def from_numbers(cls, m_p, m_s, m_i, channel=Channel()):
        return cls(
            ModeIndex(m_p, channel.q_p, channel.p_p, "TE"),
            ModeIndex(m_s, channel.q_s, channel.p_s, "TM"),
            ModeIndex(m_i, channel.q_i, channel.p_i, "TM"),
        )

    @property
    def channel(self):
        return Channel(self.signal.q, self.idler.q, self.signal.p, self.idler.p, self.pump.q, self.pump.p)

    def swapped(self):
        return ModeTriplet(self.pump, self.idler, self.signal)


@dataclass(frozen=True)
class PhaseMatchSolution:
    triplet: ModeTriplet
    T_raw: float
    T_cal: float
    nu_p: float
    nu_s: float
    nu_i: float
    residual: float

    @property
    def lambda_p(self):
        return C / self.nu_p

    @property
    def lambda_s(self):
        return C / self.nu_s

    @property
    def lambda_i(self):
        return C / self.nu_i


@dataclass(frozen=True)
class Step:
    """Neighbouring solution reached by one tuning step; ``solution`` is None for a gap."""

    method: str
    direction: int
    solution: PhaseMatchSolution | None
    dnu_s: float = float("nan")
    dnu_i: float = float("nan")
    dT: float = float("nan")


@dataclass
class ChannelCurve:
    channel: Channel
    samples: list = field(default_factory=list)

    @property
    def pump_numbers(self):
        return [s.triplet.pump.m for s in self.samples]

    def discontinuities(self):
        """Number of pump azimuthal-number changes along the curve."""
        m = self.pump_numbers
        return sum(1 for a, b in zip(m, m[1:]) if a != b)


# ---------------------------------------------------------------------------
# conservation laws


def momentum_conserved(triplet):
    """Azimuthal, triangle and parity selection rules for the three modes."""
    p, s, i = triplet.pump, triplet.signal, triplet.idler
    if p.m != s.m + i.m:
        return False
    if not abs(s.ell - i.ell) <= p.ell <= s.ell + i.ell:
        return False
    return (p.m + s.m + i.m + p.p + s.p + i.p) % 2 == 0


def pdc_mismatch(nu_p, sol_s, sol_i):
    """Pump detuning from the signal+idler resonance sum in units of their mean bandwidth.

    Parameters
    ----------
    nu_p : float
        Pump frequency [Hz].
    sol_s, sol_i
        Objects with ``nu_res`` and ``gamma`` attributes, e.g.
        :class:`wgmopo.opo.CavityMode`.
    """
    g = 0.5 * (sol_s.gamma + sol_i.gamma)
    if not (sol_s.gamma > 0 and sol_i.gamma > 0):
        raise DomainError("signal and idler bandwidths must be positive")
    return (nu_p - sol_s.nu_res - sol_i.nu_res) / g


def mismatch(geom, mat, triplet, T):
    """nu_p - nu_s - nu_i [Hz], vectorized over ``T``."""
    out = []
    for idx in (triplet.pump, triplet.signal, triplet.idler):
        out.append(eigenfrequency(geom, mat, idx.m, idx.q, idx.p, idx.pol, T))
    return out[0] - out[1] - out[2], out


# ---------------------------------------------------------------------------
# temperature solve


def _clip_range(mat, T_range):
    lo, hi = float(T_range[0]), float(T_range[1])
    if hi < lo:
        raise DomainError(f"empty temperature window [{lo}, {hi}]")
    tlo, thi = mat.temperature_range
    if lo < tlo or hi > thi:
        raise DomainError(f"temperature window [{lo}, {hi}] C outside material range [{tlo}, {thi}] C")
    return lo, hi


def find_phasematch_temperature(geom, mat, triplet, T_range, step=T_SAMPLE_STEP):
    """Temperature at which ``triplet`` conserves energy, or None.

    The mismatch is sampled every ``step`` kelvin, the first sign change is
    bracketed and refined with Brent's method.

    Raises
    ------
    DomainError
        If the triplet violates momentum conservation or the window leaves the
        material range.
    NumericalError
        If the refined root still misses energy conservation by 10 kHz.
    """
    if not momentum_conserved(triplet):
        raise DomainError(f"triplet {triplet} violates momentum conservation")
    lo, hi = _clip_range(mat, T_range)
    n = max(int(np.ceil((hi - lo) / step)), 1)
    grid = np.linspace(lo, hi, n + 1)
    f, _ = mismatch(geom, mat, triplet, grid)
    zero = np.flatnonzero(f == 0)
    if zero.size:
        return _solution(geom, mat, triplet, float(grid[zero[0]]))
    flips = np.flatnonzero(np.sign(f[:-1]) != np.sign(f[1:]))
    if not flips.size:
        return None
    k = flips[0]
    a, b = float(grid[k]), float(grid[k + 1])

    def g(T):
        return float(mismatch(geom, mat, triplet, T)[0])

    T_star = brentq(g, a, b, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=200)
    sol = _solution(geom, mat, triplet, T_star)
    if abs(sol.residual) >= RESIDUAL_TOL_HZ:
        raise NumericalError(
            "phase-matching refinement stagnated",
            bracket=(a, b),
            last_residual_Hz=sol.residual,
            temperature=T_star,
        )
    return sol


def _solution(geom, mat, triplet, T):
    res, (nu_p, nu_s, nu_i) = mismatch(geom, mat, triplet, T)
    return PhaseMatchSolution(
        triplet=triplet,
        T_raw=float(T),
        T_cal=float(mat.calibration.apply(T)),
        nu_p=float(nu_p),
        nu_s=float(nu_s),
        nu_i=float(nu_i),
        residual=float(res),
    )


# ---------------------------------------------------------------------------
# seeding


def _signal_number(geom, mat, nu_p, m_p, channel, T, n_grid=400):
    """Continuous m_s >= m_p/2 solving nu_p = nu_s(m_s) + nu_i(m_p - m_s)."""
    lam_max = mat.wavelength_range[1] * (1 - 1e-9)
    m_i_min = continuous_azimuthal_number(geom, mat, C / lam_max, channel.q_i, channel.p_i, "TM", T)
    lo, hi = 0.5 * m_p, m_p - m_i_min
    if hi <= lo:
        raise NotFoundError("no idler mode inside the material wavelength range")

    def g(ms):
        ms = np.asarray(ms, dtype=float)
        nu_s = eigenfrequency(geom, mat, ms, channel.q_s, channel.p_s, "TM", T, check=False)
        nu_i = eigenfrequency(geom, mat, m_p - ms, channel.q_i, channel.p_i, "TM", T, check=False)
        return nu_p - nu_s - nu_i

    grid = lo + (hi - lo) * np.linspace(0.0, 1.0, n_grid) ** 2  # dense near degeneracy
    f = g(grid)
    if f[0] == 0:
        return lo
    flips = np.flatnonzero(np.sign(f[:-1]) != np.sign(f[1:]))
    if not flips.size:
        raise NotFoundError(
            f"channel {channel.label}: no energy-conserving signal/idler pair at T = {T:.3f} C"
        )
    k = flips[0]
    return brentq(lambda x: float(g(x)), grid[k], grid[k + 1], xtol=1e-9)


def seed_triplet(geom, mat, lam_p, T, channel=Channel()):
    """Integer triplet close to phase matching at temperature ``T``.

    The pump number is the mode nearest ``lam_p``; signal and idler numbers
    come from the continuous energy-conserving solution, rounded with
    m_i = m_p - m_s.

    Raises
    ------
    NotFoundError
        If no continuous solution exists in the material wavelength range.
    """
    channel.validate()
    m_p, _ = find_azimuthal_number(geom, mat, C / lam_p, channel.q_p, channel.p_p, "TE", T)
    nu_p = float(eigenfrequency(geom, mat, m_p, channel.q_p, channel.p_p, "TE", T))
    m_s = int(round(_signal_number(geom, mat, nu_p, m_p, channel, T)))
    trip = ModeTriplet.from_numbers(m_p, m_s, m_p - m_s, channel)
    if not momentum_conserved(trip):  # guarded by channel.validate
        raise DomainError(f"rounded triplet {trip} violates momentum conservation")
    return trip


def solve_near(geom, mat, lam_p, T, channel=Channel(), window=0.25):
    """Seed at ``T`` and phase match inside ``T +- window``.

    At a degeneracy point the continuous solution can sit on the edge of
    the signal branch, so seeding is retried at both ends of the window.
    """
    tlo, thi = mat.temperature_range
    for T_seed in (T, min(T + 0.5 * window, thi), max(T - 0.5 * window, tlo)):
        try:
            trip = seed_triplet(geom, mat, lam_p, T_seed, channel)
            break
        except NotFoundError as exc:
            err = exc
    else:
        raise err
    rng = (max(T - window, tlo), min(T + window, thi))
    sol = find_phasematch_temperature(geom, mat, trip, rng, step=min(T_SAMPLE_STEP, window / 5))
    if sol is None:
        raise NotFoundError(f"seeded triplet {trip} not phase matched within {rng} C")
    return sol


# ---------------------------------------------------------------------------
# smooth envelope (continuous mode numbers)


def envelope_mismatch(geom, mat, lam_p, lam_s, T, channel=Channel()):
    """m_p - m_s - m_i for continuous numbers with all three frequencies fixed."""
    nu_p = C / lam_p
    nu_s = C / lam_s
    nu_i = nu_p - nu_s
    if nu_i <= 0:
        raise DomainError("signal frequency must be below the pump frequency")
    m_p = continuous_azimuthal_number(geom, mat, nu_p, channel.q_p, channel.p_p, "TE", T)
    m_s = continuous_azimuthal_number(geom, mat, nu_s, channel.q_s, channel.p_s, "TM", T)
    m_i = continuous_azimuthal_number(geom, mat, nu_i, channel.q_i, channel.p_i, "TM", T)
    return m_p - m_s - m_i


def crossing_temperature(geom, mat, lam_p, lam_s, channel=Channel(), T_range=None, step=1.0):
    """Raw temperature at which the channel emits signal at ``lam_s``, or None."""
    lo, hi = _clip_range(mat, T_range or mat.temperature_range)
    lam_i = 1.0 / (1.0 / lam_p - 1.0 / lam_s)
    mat.check_range([lam_p, lam_s, lam_i], lo)
    grid = np.linspace(lo, hi, max(int(np.ceil((hi - lo) / step)), 1) + 1)
    f = np.array([envelope_mismatch(geom, mat, lam_p, lam_s, t, channel) for t in grid])
    flips = np.flatnonzero(np.sign(f[:-1]) != np.sign(f[1:]))
    if not flips.size:
        return None
    k = flips[0]
    return brentq(
        lambda t: envelope_mismatch(geom, mat, lam_p, lam_s, t, channel), grid[k], grid[k + 1], xtol=1e-9
    )


def degeneracy_temperature(geom, mat, lam_p, channel=Channel(), T_range=None):
    """Raw temperature at which signal and idler coincide at twice the pump wavelength."""
    return crossing_temperature(geom, mat, lam_p, 2.0 * lam_p, channel, T_range)


def envelope_curve(geom, mat, lam_p, T_grid, channel=Channel()):
    """Continuous-number signal and idler wavelengths [m] over ``T_grid``; NaN where absent."""
    channel.validate()
    lam_s = np.full(len(T_grid), np.nan)
    lam_i = np.full(len(T_grid), np.nan)
    nu_p = C / lam_p
    for k, T in enumerate(T_grid):
        m_p = continuous_azimuthal_number(geom, mat, nu_p, channel.q_p, channel.p_p, "TE", T)
        try:
            m_s = _signal_number(geom, mat, nu_p, m_p, channel, T)
        except NotFoundError:
            continue
        nu_s = float(eigenfrequency(geom, mat, m_s, channel.q_s, channel.p_s, "TM", T, check=False))
        lam_s[k] = C / nu_s
        lam_i[k] = C / (nu_p - nu_s)
    return lam_s, lam_i


# ---------------------------------------------------------------------------
# scans


def _channel_worker(args):
    geom, mat, lam_p, channel, T_grid, window = args
    curve = ChannelCurve(channel)
    for T in T_grid:
        try:
            curve.samples.append(solve_near(geom, mat, lam_p, float(T), channel, window))
        except (NotFoundError, DomainError):
            continue
    return curve


def scan_channels(geom, mat, lam_p, channels, T_range, T_step=0.5, window=0.25, workers=1):
    """Phase-matched samples along each conversion channel.

    At every temperature sample the pump mode nearest ``lam_p`` is chosen, so
    the pump is held within one free spectral range of ``lam_p`` and its
    azimuthal number steps by one whenever the mode drifts out. Points where no
    triplet exists are left out (gaps).

    Returns
    -------
    list of ChannelCurve
        In the order of ``channels``.
    """
    for ch in channels:
        ch.validate()
    lo, hi = _clip_range(mat, T_range)
    grid = np.arange(lo, hi + 0.5 * T_step, T_step)
    grid = grid[grid <= hi]
    jobs = [(geom, mat, lam_p, ch, grid, window) for ch in channels]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_channel_worker, jobs))
    return [_channel_worker(j) for j in jobs]


@dataclass
class MapEntry:
    """Phase-matching summary for one radius or pump wavelength."""

    R: float
    lam_p: float
    T_degenerate: float | None
    crossings: dict
    T_grid: np.ndarray
    lambda_s: np.ndarray
    lambda_i: np.ndarray


def scan_radius_wavelength(
    geom, mat, mode, values, targets, lam_p=532e-9, T_range=None, channel=Channel(), T_step=5.0
):
    """Degeneracy and target-line crossing temperatures versus radius or pump wavelength.

    Parameters
    ----------
    mode : {"radius", "wavelength"}
        Vary the major radius (``values`` in metres, R/rho held fixed) or
        the pump wavelength (``values`` in metres) at the radius of ``geom``.
    targets : sequence of (name, wavelength)
        Signal lines whose crossing temperatures are reported.
    """
    from dataclasses import replace

    if mode not in ("radius", "wavelength"):
        raise DomainError(f"mode must be 'radius' or 'wavelength', got {mode!r}")
    lo, hi = _clip_range(mat, T_range or mat.temperature_range)
    T_grid = np.arange(lo, hi + 0.5 * T_step, T_step)
    out = []
    for v in values:
        if mode == "radius":
            g = replace(geom, R=float(v), rho=geom.rho * float(v) / geom.R)
            lp = lam_p
        else:
            g, lp = geom, float(v)
        crossings = {}
        for name, lam_t in targets:
            try:
                crossings[name] = crossing_temperature(g, mat, lp, lam_t, channel, (lo, hi))
            except DomainError:
                crossings[name] = None
        ls, li = envelope_curve(g, mat, lp, T_grid, channel)
        out.append(MapEntry(g.R, lp, degeneracy_temperature(g, mat, lp, channel, (lo, hi)), crossings, T_grid, ls, li))
    return out


# ---------------------------------------------------------------------------
# stepwise tuning

_STEPS = {
    # (dm_p, dm_s, dm_i) for direction +1
    "coarse": (0, 1, -1),
    "fine-signal": (1, 0, 1),
    "fine-idler": (1, 1, 0),
}


def step_tuning(geom, mat, base, method, window=2.0, directions=(-1, 1)):
    """Neighbouring phase-matched triplets reached by one tuning step.

    ``coarse`` keeps the pump mode and trades one quantum of m between signal
    and idler. ``fine-signal`` moves pump and idler by one with the signal
    number fixed, ``fine-idler`` pump and signal with the idler fixed.
    """
    if method not in _STEPS:
        raise DomainError(f"method must be one of {sorted(_STEPS)}, got {method!r}")
    dp, ds, di = _STEPS[method]
    tlo, thi = mat.temperature_range
    rng = (max(base.T_raw - window, tlo), min(base.T_raw + window, thi))
    out = []
    t = base.triplet
    for d in directions:
        trip = ModeTriplet(t.pump.shifted(d * dp), t.signal.shifted(d * ds), t.idler.shifted(d * di))
        try:
            sol = find_phasematch_temperature(geom, mat, trip, rng, step=0.01)
        except (DomainError, NumericalError):
            sol = None
        if sol is None:
            out.append(Step(method, d, None))
        else:
            out.append(
                Step(method, d, sol, sol.nu_s - base.nu_s, sol.nu_i - base.nu_i, sol.T_raw - base.T_raw)
            )
    return out


def nearest_signal_triplet(geom, mat, base, nu_target, max_pump_steps=40, window=0.05):
    """Phase-matched triplet near ``base`` whose signal lies closest to ``nu_target``.

    Combines coarse steps (signal and idler trade one azimuthal quantum) with
    fine-signal-type steps (pump and signal numbers move together), predicts
    the signal offset of each combination from the single-step sizes and
    re-solves the best candidates exactly.
    """
    fine_s = [s for s in step_tuning(geom, mat, base, "fine-signal", directions=(1,)) if s.solution]
    coarse = [s for s in step_tuning(geom, mat, base, "coarse", directions=(1,)) if s.solution]
    if not (fine_s and coarse):
        return base
    fs, c = fine_s[0], coarse[0]
    need = nu_target - base.nu_s
    cands = []
    for b in (-1, 0, 1):
        a = int(round((need - b * c.dnu_s) / fs.dnu_s))
        for aa in (a - 1, a, a + 1):
            if abs(aa) <= max_pump_steps:
                pred = aa * fs.dnu_s + b * c.dnu_s
                cands.append((abs(pred - need), aa, b, base.T_raw + aa * fs.dT + b * c.dT))
    cands.sort()
    best = base
    t = base.triplet
    tlo, thi = mat.temperature_range
    for _, a, b, T in cands[:6]:
        trip = ModeTriplet(t.pump.shifted(a), t.signal.shifted(b), t.idler.shifted(a - b))
        rng = (max(T - window, tlo), min(T + window, thi))
        try:
            sol = find_phasematch_temperature(geom, mat, trip, rng, step=window / 10)
        except (DomainError, NumericalError):
            continue
        if sol is not None and abs(sol.nu_s - nu_target) < abs(best.nu_s - nu_target):
            best = sol
    return best


def operating_point(geom, mat, lam_p, lam_target, channel=Channel(), T_range=None):
    """Phase-matched triplet whose signal lies nearest ``lam_target``.

    The continuous-number crossing temperature seeds an integer triplet,
    which is then stepped towards the target line.

    Raises
    ------
    NotFoundError
        If the channel never reaches ``lam_target`` within ``T_range``.
    """
    T = crossing_temperature(geom, mat, lam_p, lam_target, channel, T_range)
    if T is None:
        raise NotFoundError(f"channel {channel.label} never reaches {lam_target * 1e9:.3f} nm in range")
    seed = solve_near(geom, mat, lam_p, T, channel)
    return nearest_signal_triplet(geom, mat, seed, C / lam_target)
