"""Degeneracy and target-line crossing temperatures versus radius or pump wavelength.

Usage: python3 scripts/maps.py radius 0.3 0.44 0.6 1.0 1.5 2.5
       python3 scripts/maps.py wavelength 515 518 521 524 527 532
Radii in mm, wavelengths in nm.
"""
import argparse

from _common import CS_D1, DEVICE, RB_D1, emit, material
from wgmopo.phasematch import scan_radius_wavelength


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("mode", choices=["radius", "wavelength"])
    ap.add_argument("values", type=float, nargs="+")
    ap.add_argument("--T-step", type=float, default=5.0)
    a = ap.parse_args()
    scale = 1e-3 if a.mode == "radius" else 1e-9
    targets = [("Cs_D1", CS_D1), ("Rb_D1", RB_D1)]
    entries = scan_radius_wavelength(DEVICE, material(), a.mode, [v * scale for v in a.values], targets,
                                     T_step=a.T_step)
    rows = [[e.R * 1e3, e.lam_p * 1e9, e.T_degenerate, e.crossings["Cs_D1"], e.crossings["Rb_D1"]] for e in entries]
    emit(["R_mm", "lambda_p_nm", "T_deg_raw_C", "T_Cs_D1_raw_C", "T_Rb_D1_raw_C"], rows)


if __name__ == "__main__":
    main()
