"""Signal-idler time correlations and least-squares fits to coincidence histograms.

Two densities over the detection-time difference are provided:

``pair``
    Both photons leave the resonator with ring-down time t1; the delay is
    Laplace distributed, f(t) = exp(-|t|/t1) / (2 t1).
``heralded``
    One photon is additionally stored by an atomic transition with lifetime
    t2 before detection, so the delay is the sum of a Laplace(t1) and an
    Exp(t2) variate.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

from .errors import DomainError, NumericalError

#: Relative |t1 - t2| below which the coincident-time limit is used.
DEGENERATE_RTOL = 1e-6
MIN_NONZERO_BINS = 20


def _positive(**kw):
    for k, v in kw.items():
        if not np.all(np.asarray(v) > 0):
            raise DomainError(f"{k} must be positive, got {v}")


def pair_density(t, t1):
    """Laplace density of the signal-idler delay [1/s]."""
    _positive(t1=t1)
    return np.exp(-np.abs(t) / t1) / (2.0 * t1)


def _crossover(x, t1, t2):
    """(exp(-x/t1) - exp(-x/t2)) / (t1 - t2) for x >= 0, stable near t1 = t2."""
    tb, ts = max(t1, t2), min(t1, t2)
    d = tb - ts
    if d / t1 < DEGENERATE_RTOL:
        t = 0.5 * (t1 + t2)
        return np.exp(-x / t) * x / (t * t)
    return np.exp(-x / tb) * (-np.expm1(-x * d / (ts * tb))) / d


def heralded_density(dt, t1, t2):
    """Delay density when one photon is delayed by an exponential lifetime t2 [1/s]."""
    _positive(t1=t1, t2=t2)
    dt = np.asarray(dt, dtype=float)
    s = t1 + t2
    neg = np.exp(np.minimum(dt, 0.0) / t1) / s
    x = np.maximum(dt, 0.0)
    pos = np.exp(-x / t2) / s + _crossover(x, t1, t2)
    return 0.5 * np.where(dt < 0, neg, pos)


def bandwidth_from_time(t):
    """Bandwidth 1/(2 pi t) [Hz] of a decay time ``t`` [s]."""
    _positive(t=t)
    return 1.0 / (2.0 * np.pi * t)


def time_from_bandwidth(gamma):
    _positive(gamma=gamma)
    return 1.0 / (2.0 * np.pi * gamma)


@dataclass(frozen=True)
class CorrelationModel:
    t1: float
    t2: float | None = None
    amplitude: float = 1.0
    background: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        _positive(t1=self.t1)
        if self.t2 is not None:
            _positive(t2=self.t2)

    @property
    def family(self):
        return "pair" if self.t2 is None else "heralded"

    @property
    def gamma_s(self):
        return bandwidth_from_time(self.t1)

    def density(self, t):
        x = np.asarray(t) - self.offset
        if self.t2 is None:
            return pair_density(x, self.t1)
        return heralded_density(x, self.t1, self.t2)

    def counts(self, t):
        return self.amplitude * self.density(t) + self.background


@dataclass(frozen=True)
class Histogram:
    bin_width: float
    bin_centers: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.bin_centers, dtype=float)
        n = np.asarray(self.counts, dtype=float)
        if self.bin_width <= 0:
            raise DomainError(f"bin_width must be positive, got {self.bin_width}")
        if c.shape != n.shape or c.ndim != 1:
            raise DomainError("bin_centers and counts must be 1-D arrays of equal length")
        if np.any(n < 0):
            raise DomainError("counts must be nonnegative")
        if c.size > 1 and not np.allclose(np.diff(c), self.bin_width, rtol=1e-6, atol=0):
            raise DomainError("bins must be uniform with spacing bin_width")
        object.__setattr__(self, "bin_centers", c)
        object.__setattr__(self, "counts", n)

    @classmethod
    def from_centers(cls, centers, counts):
        centers = np.asarray(centers, dtype=float)
        if centers.size < 2:
            raise DomainError("need at least two bins")
        return cls(float(centers[1] - centers[0]), centers, np.asarray(counts, dtype=float))


def load_histogram(path):
    """Read ``time_ns,counts`` CSV or two-column whitespace text."""
    text = Path(path).read_text()
    rows = []
    if "," in text:
        reader = csv.reader(line for line in text.splitlines() if line.strip() and not line.startswith("#"))
        for row in reader:
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                continue  # header
    else:
        for line in text.splitlines():
            parts = line.split()
            if len(parts) >= 2 and not line.startswith("#"):
                try:
                    rows.append((float(parts[0]), float(parts[1])))
                except ValueError:
                    continue
    if len(rows) < 2:
        raise DomainError(f"{path}: fewer than two histogram rows")
    a = np.array(rows)
    return Histogram.from_centers(a[:, 0] * 1e-9, a[:, 1])


@dataclass
class FitResult:
    model: CorrelationModel | None
    covariance: np.ndarray | None
    residual_norm: float
    chi2: float = float("nan")
    n_bins: int = 0
    flat: bool = False
    errors: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# fitting

_NS = 1e-9


def _unpack(x, family):
    if family == "pair":
        t1, A, B, t0 = x
        return CorrelationModel(t1 * _NS, None, A, B, t0 * _NS)
    t1, t2, A, B, t0 = x
    return CorrelationModel(t1 * _NS, t2 * _NS, A, B, t0 * _NS)


def _names(family):
    return ("t1", "amplitude", "background", "offset") if family == "pair" else (
        "t1", "t2", "amplitude", "background", "offset")


def fit_histogram(hist, family="pair", init=None, max_nfev=2000):
    """Least-squares fit of ``amplitude * density + background`` to a histogram.

    Parameters
    ----------
    hist : Histogram
    family : {"pair", "heralded"}
    init : CorrelationModel, optional
        Starting point. Without it, several starts built from the peak
        position and width are tried and the lowest-cost fit kept.

    Returns
    -------
    FitResult
        Standard errors come from (J^T J)^-1 scaled by the residual variance.

    Raises
    ------
    DomainError
        Fewer than 20 nonempty bins.
    NumericalError
        No start converged; ``detail['best']`` holds the best parameters seen.
    """
    if family not in ("pair", "heralded"):
        raise DomainError(f"family must be 'pair' or 'heralded', got {family!r}")
    y = hist.counts
    t = hist.bin_centers / _NS
    if np.count_nonzero(y) < MIN_NONZERO_BINS:
        raise DomainError(f"need at least {MIN_NONZERO_BINS} nonzero bins, got {np.count_nonzero(y)}")
    if np.ptp(y) == 0:
        return FitResult(None, None, 0.0, 0.0, y.size, flat=True)

    bw = hist.bin_width / _NS
    k = int(np.argmax(y))
    floor = float(np.percentile(y, 5))
    above = y - floor
    area = float(np.sum(above)) * hist.bin_width
    width = max(np.count_nonzero(above > 0.5 * above[k]) * bw, bw)
    starts = []
    if init is not None:
        x0 = [init.t1 / _NS] + ([init.t2 / _NS] if family == "heralded" else [])
        x0 += [init.amplitude, init.background, init.offset / _NS]
        starts.append(np.array(x0, dtype=float))
        if family == "heralded":
            sw = x0.copy()
            sw[0], sw[1] = sw[1], sw[0]
            starts.append(np.array(sw))
    else:
        for scale in (0.5, 1.0, 2.0):
            tau = scale * width / (2.0 * np.log(2.0))
            if family == "pair":
                starts.append(np.array([tau, area, floor, t[k]]))
            else:
                for ratio in (0.3, 3.0):
                    starts.append(np.array([tau, tau * ratio, area, floor, t[k]]))

    n_t = 1 if family == "pair" else 2
    lower = [1e-3 * bw] * n_t + [0.0, -np.inf, t[0]]
    upper = [np.inf] * n_t + [np.inf, np.inf, t[-1]]

    def resid(x):
        return _unpack(x, family).counts(t * _NS) - y

    best = None
    for x0 in starts:
        x0 = np.clip(x0, np.array(lower) + 1e-12, upper)
        try:
            r = least_squares(resid, x0, bounds=(lower, upper), x_scale="jac", max_nfev=max_nfev)
        except ValueError:
            continue
        if best is None or r.cost < best.cost:
            best = r
    if best is None or best.status <= 0:
        raise NumericalError(
            "correlation fit did not converge", best=None if best is None else best.x.tolist()
        )

    model = _unpack(best.x, family)
    J = best.jac.copy()
    # Jacobian columns for times and offset are per ns; convert to seconds.
    for j in list(range(n_t)) + [len(best.x) - 1]:
        J[:, j] /= _NS
    dof = max(y.size - best.x.size, 1)
    s2 = 2.0 * best.cost / dof
    try:
        cov = np.linalg.inv(J.T @ J) * s2
    except np.linalg.LinAlgError:
        cov = np.full((best.x.size, best.x.size), np.nan)
    err = dict(zip(_names(family), np.sqrt(np.clip(np.diag(cov), 0, None)).tolist()))
    chi2 = float(np.sum(best.fun**2 / np.maximum(y, 1.0)))
    return FitResult(model, cov, float(np.sqrt(2.0 * best.cost)), chi2, int(y.size), False, err)


# ---------------------------------------------------------------------------
# Monte-Carlo oracle


def sample_heralded(n, t1, t2, rng):
    """Draw delays as Laplace(t1) plus Exp(t2)."""
    return rng.laplace(0.0, t1, n) + rng.exponential(t2, n)


def expected_bin_counts(edges, n, density, order=16):
    """Expected counts of ``n`` samples in bins ``edges`` by Gauss-Legendre quadrature.

    Pass an ``order`` high enough for the bin width; the density kink at 0
    should coincide with a bin edge for full accuracy.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return n * np.sum(w * density(mid + half * x), axis=1) * half[:, 0]


def synthetic_histogram(model, centers, rng, peak_counts=None):
    """Poisson draw around ``model.counts``, optionally rescaled to a given peak."""
    mu = model.counts(centers)
    if peak_counts is not None:
        mu = mu * (peak_counts / mu.max())
    return Histogram.from_centers(centers, rng.poisson(mu).astype(float))
