"""Artifact persistence: schema-tagged CSVs, binary field dumps, manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import struct
import time
from pathlib import Path

import numpy as np

from .grid import PeriodicGrid2D, ScalarField

MAGIC = b"SHMXFLD1"
_HEADER = struct.Struct("<8sIIddQ")          # magic, n_x, n_y, t, nu, seed
_HEADER_LEN = 64


def write_csv(path, schema: str, header: list, rows) -> None:
    """CSV with a schema= tag line above the column header (append-only
    versioned: bump the schema string when columns change)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"schema={schema}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(_format_row(row))


def _format_row(row):
    out = []
    for v in row:
        if isinstance(v, float) or isinstance(v, np.floating):
            out.append(f"{float(v):.17g}")
        else:
            out.append(v)
    return out


def read_csv(path):
    """(schema, header, rows) from a schema-tagged CSV."""
    with open(path, newline="") as fh:
        tag = fh.readline().strip()
        if not tag.startswith("schema="):
            raise ValueError(f"{path}: missing schema tag line")
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return tag[len("schema="):], header, rows


def write_field(path, field: ScalarField, t: float, nu: float,
                seed: int) -> None:
    """Binary dump: 64-byte header (magic, n_x, n_y, t, nu, seed), then the
    float64 values row-major."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    head = _HEADER.pack(MAGIC, field.grid.n_x, field.grid.n_y,
                        float(t), float(nu), int(seed))
    with open(path, "wb") as fh:
        fh.write(head.ljust(_HEADER_LEN, b"\0"))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_field(path):
    """Inverse of write_field; returns (field, t, nu, seed)."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER_LEN)
        magic, n_x, n_y, t, nu, seed = _HEADER.unpack(head[:_HEADER.size])
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        vals = np.frombuffer(fh.read(8 * n_x * n_y), dtype="<f8")
    field = ScalarField(PeriodicGrid2D(n_x, n_y), vals.reshape(n_x, n_y).copy())
    return field, t, nu, seed


def field_csv_rows(field: ScalarField, t: float):
    """One row per grid node: (t, x, y, f)."""
    x, y = field.grid.x, field.grid.y
    for i in range(field.grid.n_x):
        for j in range(field.grid.n_y):
            yield (t, x[i], y[j], field.values[i, j])


def config_hash(config_dict: dict) -> str:
    """Stable hash of the canonicalized configuration."""
    canon = json.dumps(config_dict, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def write_manifest(path, config_dict: dict, seed: int,
                   wall_time: float) -> None:
    import matplotlib
    import scipy

    manifest = {
        "config_hash": config_hash(config_dict),
        "master_seed": int(seed),
        "wall_time_s": round(float(wall_time), 3),
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "versions": {
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "matplotlib": matplotlib.__version__,
        },
        "config": config_dict,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, default=str) + "\n")
