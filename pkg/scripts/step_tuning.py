"""Coarse and fine tuning steps around the triplet closest to a target line.

Usage: python3 scripts/step_tuning.py [--target-nm 894.593] [--lambda-nm 532]
"""
import argparse

from _common import CS_D1, DEVICE, emit, material
from wgmopo.phasematch import operating_point, step_tuning


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--target-nm", type=float, default=CS_D1 * 1e9)
    ap.add_argument("--lambda-nm", type=float, default=532.0)
    a = ap.parse_args()
    mat = material()
    base = operating_point(DEVICE, mat, a.lambda_nm * 1e-9, a.target_nm * 1e-9)
    rows = [["base", 0, base.triplet.pump.m, base.triplet.signal.m, base.triplet.idler.m, base.T_raw, 0.0, 0.0]]
    for method in ("coarse", "fine-signal", "fine-idler"):
        for s in step_tuning(DEVICE, mat, base, method):
            if s.solution is None:
                rows.append([method, s.direction, "", "", "", "", "", ""])
                continue
            t = s.solution.triplet
            rows.append([method, s.direction, t.pump.m, t.signal.m, t.idler.m, s.solution.T_raw, s.dnu_s, s.dnu_i])
    emit(["method", "direction", "m_p", "m_s", "m_i", "T_raw_C", "dnu_s_Hz", "dnu_i_Hz"], rows)


if __name__ == "__main__":
    main()
