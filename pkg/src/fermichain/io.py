"""Plain-text matrix dumps and CSV/JSON writers with a config header.

Matrix-dump format::

    # fermichain matrix dump v1
    # meta: {"window": [0, 4], "params": {"gamma": 1.0, "lambda": 1.0}, ...}
    # shape: 8 8
    re im re im ...        <- one line per row, entries as (re, im) pairs

CSV outputs start with ``#``-prefixed header lines carrying the package
version and the JSON-encoded run config; JSON outputs carry the same data
under ``"header"``.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__

DUMP_MAGIC = "# fermichain matrix dump v1"


class NonFiniteOutput(ValueError):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if not math.isfinite(f):
            raise NonFiniteOutput(f"non-finite value {f}")
        return f
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    return obj


def complex_matrix_rows(m: np.ndarray) -> list:
    """Row-major ``[[re, im], ...]`` rows for JSON."""
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def write_matrix_dump(path, matrix: np.ndarray, meta: dict | None = None) -> None:
    m = np.atleast_2d(np.asarray(matrix, dtype=complex))
    lines = [
        DUMP_MAGIC,
        "# meta: " + json.dumps(_jsonable(meta or {}), sort_keys=True),
        f"# shape: {m.shape[0]} {m.shape[1]}",
    ]
    for row in m:
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_dump(path) -> tuple[np.ndarray, dict]:
    text = Path(path).read_text().splitlines()
    if not text or text[0] != DUMP_MAGIC:
        raise ValueError(f"{path} is not a matrix dump")
    meta, shape, rows = {}, None, []
    for line in text[1:]:
        if line.startswith("# meta:"):
            meta = json.loads(line[len("# meta:") :])
        elif line.startswith("# shape:"):
            shape = tuple(int(x) for x in line.split(":")[1].split())
        elif line.strip():
            vals = np.array(line.split(), dtype=float)
            rows.append(vals[0::2] + 1j * vals[1::2])
    m = np.array(rows, dtype=complex).reshape(shape)
    return m, meta


def header_lines(config: dict) -> list:
    return [
        f"# fermichain {__version__}",
        "# config: " + json.dumps(_jsonable(config), sort_keys=True),
    ]


def csv_text(columns: list, rows: list, config: dict) -> str:
    for r in rows:
        for v in r:
            if isinstance(v, float) and not math.isfinite(v):
                raise NonFiniteOutput(f"non-finite value in row {r}")
    buf = _io.StringIO()
    for line in header_lines(config):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def json_text(payload: dict, config: dict) -> str:
    doc = {"header": {"fermichain": __version__, "config": config}, **payload}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def read_csv(path) -> tuple[list, list, dict]:
    """Columns, rows (as strings) and the echoed config of a CSV output."""
    config = {}
    body = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# config:"):
            config = json.loads(line[len("# config:") :])
        elif not line.startswith("#"):
            body.append(line)
    rows = list(csv.reader(body))
    return rows[0], rows[1:], config
