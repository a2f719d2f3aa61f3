"""File formats: f32 binaries with JSON sidecars, CSV curves, PGM heatmaps.

Binary layout is little-endian float32.  Models are row-major with z
fastest; gathers are row-major with time fastest.  Every binary gets a
sidecar ``<name>.json`` with the shape, spacing, units, and a sha256
checksum so external tools can verify and parse the payload without this
package.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os

import numpy as np

from .gridcore import Grid2D, ShotGather, VelocityModel

__all__ = [
    "write_model",
    "read_model",
    "write_gather",
    "read_gather",
    "write_curve_csv",
    "write_matrix_csv",
    "write_pgm",
    "write_manifest",
]


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _write_binary(path, array, header):
    payload = np.ascontiguousarray(array, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(payload)
    header = dict(header, checksum=_sha256(payload), dtype="<f4")
    with open(path + ".json", "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _read_binary(path):
    with open(path, "rb") as fh:
        payload = fh.read()
    with open(path + ".json") as fh:
        header = json.load(fh)
    if _sha256(payload) != header["checksum"]:
        raise IOError(f"checksum mismatch for {path}")
    return np.frombuffer(payload, dtype="<f4"), header


def write_model(path, model: VelocityModel):
    g = model.grid
    _write_binary(path, model.m, {
        "kind": "model", "shape": [g.nx, g.nz], "spacing": [g.dx, g.dz],
        "units": "s^2/m^2", "order": "row-major z-fastest",
    })


def read_model(path) -> VelocityModel:
    flat, h = _read_binary(path)
    nx, nz = h["shape"]
    grid = Grid2D(nx, nz, *h["spacing"])
    return VelocityModel(grid, flat.astype(np.float64).reshape(nx, nz))


def write_gather(path, gather: ShotGather):
    _write_binary(path, gather.data, {
        "kind": "gather", "shape": list(gather.data.shape), "dt": gather.dt,
        "source_index": gather.source_index, "units": "pressure",
        "order": "row-major time-fastest",
    })


def read_gather(path) -> ShotGather:
    flat, h = _read_binary(path)
    nrec, nt = h["shape"]
    return ShotGather(flat.astype(np.float64).reshape(nrec, nt), h["dt"],
                      source_index=h.get("source_index", 0))


def write_curve_csv(path, columns: dict):
    """Write named columns of equal length as CSV."""
    names = list(columns)
    rows = zip(*[columns[n] for n in names])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def write_matrix_csv(path, matrix, row_axis=None, col_axis=None):
    """Scan matrix as CSV; first row/column carry the axes when given."""
    matrix = np.asarray(matrix)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if col_axis is not None:
            w.writerow([""] + [repr(float(v)) for v in col_axis])
        for i, row in enumerate(matrix):
            lead = [repr(float(row_axis[i]))] if row_axis is not None else []
            w.writerow(lead + [repr(float(v)) for v in row])


def write_pgm(path, matrix):
    """8-bit binary PGM (P5) heatmap, min-max scaled."""
    m = np.asarray(matrix, dtype=np.float64)
    lo, hi = m.min(), m.max()
    scaled = np.zeros(m.shape, dtype=np.uint8) if hi == lo else \
        np.round(255 * (m - lo) / (hi - lo)).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{m.shape[1]} {m.shape[0]}\n255\n".encode())
        fh.write(scaled.tobytes())


def write_manifest(out_dir, files):
    """Checksum manifest over the named files in out_dir."""
    entries = {}
    for name in sorted(files):
        with open(os.path.join(out_dir, name), "rb") as fh:
            entries[name] = _sha256(fh.read())
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(entries, fh, indent=2, sort_keys=True)
        fh.write("\n")
