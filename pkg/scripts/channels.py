"""Signal wavelength versus calibrated temperature for several conversion channels.

Usage: python3 scripts/channels.py [--T-min 100] [--T-max 140] [--step 0.5]
Temperatures are calibrated (experimental scale).
"""
import argparse

from _common import DEVICE, C, emit, material
from wgmopo.phasematch import Channel, scan_channels

CHANNELS = [Channel(1, 1, 0, 0), Channel(3, 3, 0, 0), Channel(1, 3, 0, 0), Channel(1, 1, 1, 1)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T-min", type=float, default=100.0)
    ap.add_argument("--T-max", type=float, default=140.0)
    ap.add_argument("--step", type=float, default=0.5)
    ap.add_argument("--workers", type=int, default=1)
    a = ap.parse_args()
    mat = material()
    lo, hi = (float(mat.calibration.invert(t)) for t in (a.T_min, a.T_max))
    curves = scan_channels(DEVICE, mat, 532e-9, CHANNELS, (lo, hi), a.step, workers=a.workers)
    rows = []
    for curve in curves:
        for s in curve.samples:
            rows.append([curve.channel.label, s.T_raw, s.T_cal, C / s.nu_s * 1e9, C / s.nu_i * 1e9, s.triplet.pump.m])
    emit(["channel", "T_raw_C", "T_cal_C", "lambda_s_nm", "lambda_i_nm", "m_p"], rows)


if __name__ == "__main__":
    main()
