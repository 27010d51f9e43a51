"""Field and profile serialization: CSV, flat little-endian binary + JSON sidecar."""

from __future__ import annotations

import json
import math
import os

import numpy as np

__all__ = [
    "write_field_csv",
    "write_field_binary",
    "read_field_binary",
    "write_profile_csv",
    "dump_json",
]


def write_field_csv(path, axes, values):
    """Rows x[,x2],y,value in row-major order over a tensor lattice."""
    values = np.asarray(values)
    grids = np.meshgrid(*axes, indexing="ij")
    cols = [g.reshape(-1) for g in grids] + [values.reshape(-1)]
    if len(axes) == 2:
        header = "x,y,value"
    else:
        header = "x1,x2,y,value"
    np.savetxt(path, np.stack(cols, axis=-1), delimiter=",", header=header,
               comments="", fmt="%.17g")


def write_field_binary(base_path, axes, values, extra_meta=None):
    """values as a flat little-endian float64 array plus a JSON sidecar.

    base_path gets the extensions .f64 and .json; the sidecar records shape,
    spacings, origins and the row-major ordering so the file round-trips.
    """
    values = np.ascontiguousarray(np.asarray(values, dtype="<f8"))
    bin_path = str(base_path) + ".f64"
    values.tofile(bin_path)
    meta = {
        "dtype": "<f8",
        "order": "row-major",
        "shape": list(values.shape),
        "origin": [float(a[0]) for a in axes],
        "spacing": [float(a[1] - a[0]) for a in axes],
        "axes": ["x", "y"] if len(axes) == 2 else ["x1", "x2", "y"],
    }
    if extra_meta:
        meta.update(extra_meta)
    dump_json(str(base_path) + ".json", meta)
    return bin_path


def read_field_binary(base_path):
    with open(str(base_path) + ".json", "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    values = np.fromfile(str(base_path) + ".f64", dtype=np.dtype(meta["dtype"]))
    values = values.reshape(meta["shape"])
    axes = [o + s * np.arange(nd) for o, s, nd in
            zip(meta["origin"], meta["spacing"], meta["shape"])]
    return axes, values, meta


def write_profile_csv(path, profile):
    """r, F, Phi, truncated rows of a FrequencyProfile."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("r,F,Phi,truncated\n")
        for r, F, phi, tr in zip(profile.radii, profile.F, profile.Phi, profile.truncated):
            fh.write(f"{r:.17g},{F:.17g},{phi:.17g},{int(tr)}\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _sanitize(obj):
    """inf/nan -> strings so the output is strict JSON and byte-stable."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
    return obj


def dump_json(path, payload):
    """Deterministic JSON: sorted keys, no whitespace drift, LF newline."""
    text = json.dumps(_sanitize(payload), sort_keys=True, indent=1,
                      default=_json_default, allow_nan=False)
    tmp = str(path) + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
        fh.write("\n")
    os.replace(tmp, path)
    return path
