"""Deterministic output writing: CSV files, JSON reports, run manifests.

Floats are rendered with ``repr`` (shortest round-trip form), so a given
sequence of values always produces identical bytes regardless of worker
count or scheduling.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from datetime import datetime, timezone

import numpy as np


def fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return "nan" if math.isnan(f) else repr(f)
    return str(v)


def write_csv(path, header, rows) -> str:
    """Write rows of tuples with a header line; returns the path."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt_value(v) for v in row) + "\n")
    return str(path)


def write_json(path, payload) -> str:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")
    return str(path)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config_dict) -> str:
    blob = json.dumps(config_dict, sort_keys=True, default=_json_default)
    return hashlib.sha256(blob.encode()).hexdigest()


def write_manifest(out_dir, experiment, master_seed, config_dict, files,
                   wall_time_s, extra=None) -> str:
    """Emit ``manifest.json`` listing every output file with its hash."""
    import scipy

    from . import __version__

    manifest = {
        "experiment": experiment,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "package_version": __version__,
        "versions": {
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "master_seed": master_seed,
        "config": config_dict,
        "config_sha256": config_hash(config_dict),
        "files": {os.path.basename(p): sha256_file(p) for p in files},
        "wall_time_s": wall_time_s,
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(out_dir, "manifest.json")
    write_json(path, manifest)
    return path


def write_summary(out_dir, lines) -> str:
    path = os.path.join(out_dir, "summary.txt")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    return path
