"""Bit-stable CSV and JSON emission with atomic replacement.

Numbers are printed with 17 significant digits so parsing them back
recovers the exact double; files carry a schema version string and the
master seed in comment lines (CSV) or top-level fields (JSON).  Writes
go to a temporary file in the target directory followed by an atomic
rename, so an interrupted run never leaves a partial file at the final
path.  NaN or infinity anywhere in the payload aborts before any bytes
are written.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import DataIntegrityError

SERIES_SCHEMA = "zeno-lab/series v1"
MATRIX_SCHEMA = "zeno-lab/matrix v1"
TABLE_SCHEMA = "zeno-lab/table v1"


def format_float(x: float) -> str:
    """Decimal rendering that round-trips the double exactly."""
    x = float(x)
    if x == 0.0:  # avoid the "-0" spelling
        return "0"
    return "%.17g" % x


def _check_finite(name: str, values: np.ndarray):
    if values.size and not np.all(np.isfinite(values)):
        raise DataIntegrityError(f"non-finite value in column {name!r}")


def _normalize_columns(names, columns):
    if len(names) != len(columns):
        raise ValueError("names and columns must have equal length")
    out = []
    length = None
    for name, col in zip(names, columns):
        try:
            arr = np.asarray(col, dtype=float).reshape(-1)
        except (ValueError, TypeError):
            cells = [str(v) for v in col]
            for cell in cells:
                if any(ch in cell for ch in ",\n\r#"):
                    raise DataIntegrityError(
                        f"unwritable text cell in column {name!r}: {cell!r}"
                    )
            out.append(cells)
        else:
            _check_finite(name, arr)
            out.append(arr)
        n = len(out[-1])
        if length is None:
            length = n
        elif n != length:
            raise ValueError(f"column {name!r} has length {n}, expected {length}")
    return out, (length or 0)


def _meta_lines(schema: str, master_seed: int, time_unit: str | None) -> list[str]:
    lines = [f"# schema: {schema}", f"# seed: {master_seed}"]
    if time_unit is not None:
        lines.append(f"# time_unit: {time_unit}")
    return lines


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".zeno-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _json_text(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, allow_nan=False,
                      separators=(",", ":")) + "\n"


def _cell(value) -> str:
    return value if isinstance(value, str) else format_float(value)


def write_series(path: str, names, columns, *, master_seed: int,
                 format: str = "csv", config: dict | None = None,
                 schema: str = SERIES_SCHEMA, time_unit: str | None = None):
    """Write aligned columns as CSV (or JSON) atomically.

    Columns may be numeric arrays or lists of plain words (regime
    labels); numeric data must be finite.  An empty series produces a
    header-only CSV.
    """
    cols, _ = _normalize_columns(list(names), list(columns))
    if format == "json":
        payload = {
            "schema": schema,
            "seed": master_seed,
            "config": config or {},
            "names": list(names),
            "columns": {
                name: (col if isinstance(col, list) else col.tolist())
                for name, col in zip(names, cols)
            },
        }
        if time_unit is not None:
            payload["time_unit"] = time_unit
        _atomic_write(path, _json_text(payload))
        return
    if format != "csv":
        raise ValueError(f"unknown format {format!r}")
    lines = _meta_lines(schema, master_seed, time_unit)
    lines.append(",".join(names))
    n_rows = len(cols[0]) if cols else 0
    for i in range(n_rows):
        lines.append(",".join(_cell(col[i]) for col in cols))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_matrix(path: str, row_label: str, row_values, col_values, values, *,
                 master_seed: int, format: str = "csv", config: dict | None = None,
                 time_unit: str | None = None):
    """Write a dense matrix with a leading row-coordinate column.

    The CSV header cell is the row label followed by the column (time)
    values; each data row leads with its row coordinate.
    """
    rows = np.asarray(row_values, dtype=float).reshape(-1)
    cols = np.asarray(col_values, dtype=float).reshape(-1)
    mat = np.asarray(values, dtype=float)
    if mat.shape != (rows.size, cols.size):
        raise ValueError(f"matrix shape {mat.shape} does not match grids "
                         f"({rows.size}, {cols.size})")
    _check_finite(row_label, rows)
    _check_finite("columns", cols)
    _check_finite("values", mat)
    if format == "json":
        payload = {
            "schema": MATRIX_SCHEMA,
            "seed": master_seed,
            "config": config or {},
            "row_label": row_label,
            "row_values": rows.tolist(),
            "col_values": cols.tolist(),
            "values": mat.tolist(),
        }
        if time_unit is not None:
            payload["time_unit"] = time_unit
        _atomic_write(path, _json_text(payload))
        return
    if format != "csv":
        raise ValueError(f"unknown format {format!r}")
    lines = _meta_lines(MATRIX_SCHEMA, master_seed, time_unit)
    lines.append(",".join([row_label] + [format_float(c) for c in cols]))
    for r, row in zip(rows, mat):
        lines.append(",".join([format_float(r)] + [format_float(v) for v in row]))
    _atomic_write(path, "\n".join(lines) + "\n")


def _parse_meta(lines) -> tuple[dict, int]:
    meta: dict = {}
    i = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            break
        body = line[1:].strip()
        if ":" in body:
            key, _, value = body.partition(":")
            meta[key.strip()] = value.strip()
    if "seed" in meta:
        meta["seed"] = int(meta["seed"])
    return meta, i


def read_series(path: str):
    """Read a series file back as (meta, names, columns dict).

    Numeric columns come back as float arrays (exact for files written
    here), anything else as lists of strings.  JSON files are detected
    by suffix.
    """
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        meta = {k: payload[k] for k in ("schema", "seed", "time_unit") if k in payload}
        names = payload["names"]
        columns = {
            name: np.asarray(col, dtype=float) if col and not isinstance(col[0], str)
            else list(col)
            for name, col in payload["columns"].items()
        }
        return meta, names, columns
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta, start = _parse_meta(lines)
    names = lines[start].split(",")
    raw_rows = [line.split(",") for line in lines[start + 1:] if line]
    columns: dict = {}
    for j, name in enumerate(names):
        cells = [row[j] for row in raw_rows]
        try:
            columns[name] = np.array([float(c) for c in cells], dtype=float)
        except ValueError:
            columns[name] = cells
    return meta, names, columns


def read_matrix(path: str):
    """Read a matrix file back as (meta, row_label, rows, cols, values)."""
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        meta = {k: payload[k] for k in ("schema", "seed", "time_unit") if k in payload}
        return (meta, payload["row_label"], np.asarray(payload["row_values"], dtype=float),
                np.asarray(payload["col_values"], dtype=float),
                np.asarray(payload["values"], dtype=float))
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta, start = _parse_meta(lines)
    header = lines[start].split(",")
    row_label = header[0]
    cols = np.array([float(c) for c in header[1:]], dtype=float)
    rows = []
    values = []
    for line in lines[start + 1:]:
        if not line:
            continue
        cells = line.split(",")
        rows.append(float(cells[0]))
        values.append([float(c) for c in cells[1:]])
    return meta, row_label, np.asarray(rows), cols, np.asarray(values)
