"""Table output: CSV with ``#`` metadata lines, and a JSON mirror carrying the same data."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _plain(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def format_csv(columns, rows, meta=None) -> str:
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key}={json.dumps(_jsonable(value), sort_keys=True)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_cell(x) for x in row))
    return "\n".join(lines) + "\n"


def format_json(columns, rows, meta=None) -> str:
    doc = {"meta": _jsonable(meta or {}), "columns": list(columns),
           "rows": [[_plain(x) for x in row] for row in rows]}
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return _plain(obj)


def write_table(path, columns, rows, meta=None, fmt="csv") -> str:
    text = format_csv(columns, rows, meta) if fmt == "csv" else format_json(columns, rows, meta)
    if path is None or str(path) == "-":
        return text
    Path(path).write_text(text, newline="\n")
    return text


def data_section(text: str) -> str:
    """CSV body without metadata lines (the part covered by the determinism contract)."""
    return "".join(line for line in text.splitlines(keepends=True) if not line.startswith("#"))


def read_csv(text: str):
    meta, columns, rows = {}, None, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = json.loads(value)
        elif columns is None:
            columns = line.split(",")
        elif line:
            rows.append([_parse(x) for x in line.split(",")])
    return columns, rows, meta


def read_json(text: str):
    doc = json.loads(text)
    rows = [[float(x) if isinstance(x, str) and x in ("nan", "inf", "-inf") else x for x in r]
            for r in doc["rows"]]
    return doc["columns"], rows, doc["meta"]


def _parse(x):
    try:
        return int(x)
    except ValueError:
        pass
    try:
        return float(x)
    except ValueError:
        return x


def write_matrix_csv(path, matrix) -> None:
    with open(path, "w", newline="\n") as fh:
        for row in np.asarray(matrix):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def write_pgm(path, image) -> None:
    """8-bit binary PGM, linearly scaled from min to max."""
    img = np.asarray(image, dtype=float)
    lo, hi = img.min(), img.max()
    scaled = np.zeros_like(img) if hi == lo else (img - lo) / (hi - lo)
    data = np.round(scaled * 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode())
        fh.write(data.tobytes())
