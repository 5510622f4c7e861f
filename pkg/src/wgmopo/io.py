"""Deterministic CSV/JSON emission with provenance headers and atomic writes."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

from . import __version__


def provenance(command, config_sha256, material_sha256=""):
    return {
        "tool": "wgmopo",
        "version": __version__,
        "command": command,
        "config_sha256": config_sha256,
        "material_sha256": material_sha256,
    }


def provenance_line(prov):
    return (
        f"# wgmopo {prov['version']} command={prov['command']} "
        f"config_sha256={prov['config_sha256']} material_sha256={prov['material_sha256']}"
    )


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else format(v, ".15g")
    return str(v)


def csv_text(header, rows, prov):
    buf = io.StringIO()
    buf.write(provenance_line(prov) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for _, v in _pairs(header, row)])
    return buf.getvalue()


def _pairs(header, row):
    if isinstance(row, dict):
        return [(k, row.get(k)) for k in header]
    return list(zip(header, row))


def _clean(obj):
    if isinstance(obj, float):
        return None if not math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def json_text(payload, prov):
    doc = {"provenance": prov, **payload}
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def write_table(out_dir, stem, header, rows, prov, fmt="csv", extra=None):
    """Write rows as ``stem.csv`` and/or ``stem.json``; return written paths."""
    paths = []
    if fmt in ("csv", "both"):
        paths.append(atomic_write(Path(out_dir) / f"{stem}.csv", csv_text(header, rows, prov)))
    if fmt in ("json", "both"):
        recs = [dict(_pairs(header, r)) for r in rows]
        payload = {"columns": list(header), "rows": recs, **(extra or {})}
        paths.append(atomic_write(Path(out_dir) / f"{stem}.json", json_text(payload, prov)))
    return paths


def write_json(out_dir, stem, payload, prov):
    return atomic_write(Path(out_dir) / f"{stem}.json", json_text(payload, prov))
