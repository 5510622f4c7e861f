"""Azimuthal number of the fundamental TE pump mode versus temperature.

Usage: python3 scripts/mode_drift.py [--lambda-nm 532] [--T-min 20] [--T-max 250] [--step 5]
"""
import argparse

from _common import DEVICE, C, emit, material
from wgmopo.dispersion import continuous_azimuthal_number, find_azimuthal_number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambda-nm", type=float, default=532.0)
    ap.add_argument("--T-min", type=float, default=20.0)
    ap.add_argument("--T-max", type=float, default=250.0)
    ap.add_argument("--step", type=float, default=5.0)
    a = ap.parse_args()
    mat, nu = material(), C / (a.lambda_nm * 1e-9)
    rows, T = [], a.T_min
    while T <= a.T_max + 1e-9:
        m, resid = find_azimuthal_number(DEVICE, mat, nu, 1, 0, "TE", T)
        rows.append([T, m, continuous_azimuthal_number(DEVICE, mat, nu, 1, 0, "TE", T), resid])
        T += a.step
    emit(["T_raw_C", "m", "m_continuous", "detuning_Hz"], rows)


if __name__ == "__main__":
    main()
