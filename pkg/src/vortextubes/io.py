"""Deterministic output formats: JSON reports, CSV tables, a self-describing
binary grid format and legacy-VTK structured points.

Every writer embeds a ``meta`` block with the configuration hash and the code
version so that artifacts can be traced back to the run that produced them.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import struct
from pathlib import Path

import numpy as np

from . import __version__

GRID_MAGIC = b"VTGRID01"


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays, dataclasses and complex numbers."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = obj.to_dict() if hasattr(obj, "to_dict") else dataclasses.asdict(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if np.isnan(x):
            return "nan"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, Path):
        return str(obj)
    return obj


def canonical_json(obj) -> str:
    """Sorted-key compact JSON (the basis of configuration hashes)."""
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"))


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def meta_block(config_hash: str | None = None, **extra) -> dict:
    d = dict(version=__version__, config_hash=config_hash)
    d.update(extra)
    return d


def dumps_json(obj, config_hash: str | None = None, **meta) -> str:
    payload = dict(to_jsonable(obj)) if isinstance(obj, dict) else dict(data=to_jsonable(obj))
    payload["meta"] = to_jsonable(meta_block(config_hash, **meta))
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_json(path, obj, config_hash: str | None = None, **meta) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(obj, config_hash, **meta))
    return path


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def write_csv(path, columns, rows, config_hash: str | None = None, **meta) -> Path:
    """CSV with a leading ``# {meta json}`` comment line; floats use ``repr``
    (shortest round-trip form), so files are bit-faithful."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write("# " + json.dumps(to_jsonable(meta_block(config_hash, **meta)), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    path.write_text(buf.getvalue())
    return path


def read_csv(path):
    """``(meta, columns, rows)`` with numeric cells converted to float."""
    lines = Path(path).read_text().splitlines()
    meta = json.loads(lines[0][2:]) if lines and lines[0].startswith("# ") else {}
    body = lines[1:] if meta else lines
    reader = csv.reader(body)
    columns = next(reader)
    rows = [[float(c) for c in row] for row in reader]
    return meta, columns, rows


# ---------------------------------------------------------------------------
# binary grids
# ---------------------------------------------------------------------------

def write_grid(path, values, header: dict, config_hash: str | None = None) -> Path:
    """Write ``values`` (shape ``(n_alpha, n_r, n_theta)``) as
    ``MAGIC | uint64 header length | JSON header | float64 LE payload``.

    The payload is in C order, i.e. ``alpha`` varies slowest (alpha-major).
    """
    values = np.ascontiguousarray(values, dtype="<f8")
    head = dict(to_jsonable(header))
    head.update(shape=list(values.shape), dtype="<f8", order="alpha-major",
                meta=meta_block(config_hash))
    hb = json.dumps(head, sort_keys=True).encode()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(GRID_MAGIC)
        f.write(struct.pack("<Q", len(hb)))
        f.write(hb)
        f.write(values.tobytes(order="C"))
    return path


def read_grid(path):
    """Inverse of :func:`write_grid`: ``(values, header)``."""
    data = Path(path).read_bytes()
    if data[:8] != GRID_MAGIC:
        raise ValueError(f"{path} is not a grid file")
    (n,) = struct.unpack("<Q", data[8:16])
    head = json.loads(data[16:16 + n])
    vals = np.frombuffer(data[16 + n:], dtype="<f8").reshape(head["shape"]).copy()
    return vals, head


# ---------------------------------------------------------------------------
# legacy VTK
# ---------------------------------------------------------------------------

def write_vtk_vectors(path, origin, spacing, dims, vectors, name="u",
                      config_hash: str | None = None) -> Path:
    """ASCII legacy-VTK ``STRUCTURED_POINTS`` file with one vector array.

    ``vectors`` has shape ``(nx, ny, nz, 3)`` (x-index slowest); VTK expects
    x fastest, so the array is transposed on output.
    """
    vectors = np.asarray(vectors, dtype=float)
    nx, ny, nz = dims
    if vectors.shape != (nx, ny, nz, 3):
        raise ValueError("vectors must have shape dims + (3,)")
    flat = vectors.transpose(2, 1, 0, 3).reshape(-1, 3)
    lines = ["# vtk DataFile Version 3.0",
             "vortextubes " + json.dumps(meta_block(config_hash), sort_keys=True)[:200],
             "ASCII", "DATASET STRUCTURED_POINTS",
             f"DIMENSIONS {nx} {ny} {nz}",
             "ORIGIN " + " ".join(repr(float(v)) for v in origin),
             "SPACING " + " ".join(repr(float(v)) for v in spacing),
             f"POINT_DATA {nx * ny * nz}",
             f"VECTORS {name} double"]
    lines += [" ".join(repr(float(v)) for v in row) for row in flat]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path
