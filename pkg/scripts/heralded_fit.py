"""Fit a heralded coincidence histogram, synthetic unless a file is given.

Usage: python3 scripts/heralded_fit.py [histogram.csv] [--seed 1] [--peak 1e4]
"""
import argparse

import numpy as np

from _common import emit
from wgmopo.correlation import CorrelationModel, fit_histogram, load_histogram, synthetic_histogram


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("path", nargs="?")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--peak", type=float, default=1e4)
    a = ap.parse_args()
    if a.path:
        hist = load_histogram(a.path)
    else:
        centers = (np.arange(-80, 300) + 0.5) * 1e-9
        hist = synthetic_histogram(CorrelationModel(7.4e-9, 37e-9), centers, np.random.default_rng(a.seed), a.peak)
    res = fit_histogram(hist, "heralded")
    m = res.model
    print(f"# t1_ns={m.t1 * 1e9:.4f}+-{res.errors['t1'] * 1e9:.4f} t2_ns={m.t2 * 1e9:.4f}+-{res.errors['t2'] * 1e9:.4f} "
          f"gamma_s_MHz={m.gamma_s / 1e6:.3f} chi2={res.chi2:.1f} n_bins={res.n_bins}")
    emit(["time_ns", "counts", "model"], zip(hist.bin_centers * 1e9, hist.counts, m.counts(hist.bin_centers)))


if __name__ == "__main__":
    main()
