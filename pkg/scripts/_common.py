"""Shared helpers for the research scripts: device, material and CSV output."""
import csv
import sys

from wgmopo.dispersion import ResonatorGeometry
from wgmopo.material import load_material

C = 299_792_458.0
DEVICE = ResonatorGeometry(2.5e-3, 0.58e-3, 0.5e-3)
CS_D1, RB_D1 = 894.593e-9, 794.979e-9


def material():
    return load_material()


def emit(header, rows, stream=sys.stdout):
    """Write ``rows`` as CSV with ``header`` to ``stream``."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
