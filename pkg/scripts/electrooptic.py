"""Electro-optic shift rates at degeneracy and voltage-tuned signal offsets.

Usage: python3 scripts/electrooptic.py [--R-mm 1.5] [--aspect 4.3] [--h-mm 0.5] [--fringe 1.0]
"""
import argparse

import numpy as np

from _common import emit, material
from wgmopo.dispersion import ResonatorGeometry
from wgmopo.errors import RangeError
from wgmopo.phasematch import operating_point
from wgmopo.tuning import electrooptic_mechanism, reach, retune


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--R-mm", type=float, default=1.5)
    ap.add_argument("--aspect", type=float, default=4.3)
    ap.add_argument("--h-mm", type=float, default=0.5)
    ap.add_argument("--fringe", type=float, default=1.0)
    a = ap.parse_args()
    mat = material()
    g = ResonatorGeometry(a.R_mm * 1e-3, a.R_mm * 1e-3 / a.aspect, a.h_mm * 1e-3)
    base = operating_point(g, mat, 532e-9, 1064e-9)
    mech = electrooptic_mechanism(g, mat, base, a.fringe)
    lo, hi = reach(g, mat, base, mech)
    print(f"# rate_p_Hz_per_V={mech.rate_p:.6g} rate_s_Hz_per_V={mech.rate_s:.6g} "
          f"rate_i_Hz_per_V={mech.rate_i:.6g} reach_Hz=({lo:.6g},{hi:.6g})")
    rows = []
    for target in np.linspace(-1e9, 1e9, 11):
        try:
            r = retune(g, mat, base, mech, float(target))
            rows.append([target, r.control, r.T, r.nu_pump_laser - base.nu_p])
        except RangeError:
            rows.append([target, "", "", ""])
    emit(["target_Hz", "U_V", "T_raw_C", "pump_offset_Hz"], rows)


if __name__ == "__main__":
    main()
