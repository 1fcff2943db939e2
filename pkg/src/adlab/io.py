"""Plain-text CSV formats for signals, matrices and 2-D grids.

Each file starts with one header line, for example::

    # adlab-signal v1 M=64 dt=0.015625
    # adlab-matrix v1 M=64
    # adlab-grid v1 rows=40 cols=256 row-axis=scale col-axis=time dtype=real

Complex values are stored as interleaved ``re,im`` columns. Numbers are
written with 17 significant digits so doubles round-trip exactly.
"""

import json

import numpy as np

from .exceptions import FormatError, IoError
from .model import Signal

NUMBER_FORMAT = "%.17g"


def _fmt(v):
    return NUMBER_FORMAT % v


def _interleave(row):
    row = np.asarray(row, dtype=np.complex128)
    out = np.empty(2 * row.shape[0])
    out[0::2] = row.real
    out[1::2] = row.imag
    return out


def _read_lines(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def parse_header(line, kind):
    """Split ``# adlab-<kind> v1 key=value ...`` into a dict of strings."""
    parts = line.split()
    if len(parts) < 3 or parts[0] != "#" or parts[1] != f"adlab-{kind}" or parts[2] != "v1":
        raise FormatError(f"expected an 'adlab-{kind} v1' header, got {line!r}")
    fields = {}
    for token in parts[3:]:
        key, sep, value = token.partition("=")
        if not sep or not key:
            raise FormatError(f"malformed header field {token!r}")
        fields[key] = value
    return fields


def _int_field(fields, key):
    try:
        value = int(fields[key])
    except KeyError:
        raise FormatError(f"header is missing {key}=") from None
    except ValueError:
        raise FormatError(f"header field {key}={fields[key]!r} is not an integer") from None
    if value < 1:
        raise FormatError(f"header field {key} must be positive")
    return value


def _float_field(fields, key, default=None):
    if key not in fields:
        if default is None:
            raise FormatError(f"header is missing {key}=")
        return default
    try:
        return float(fields[key])
    except ValueError:
        raise FormatError(f"header field {key}={fields[key]!r} is not a number") from None


def _parse_rows(lines, n_rows, n_cols):
    body = [ln for ln in lines if ln.strip()]
    if len(body) != n_rows:
        raise FormatError(f"expected {n_rows} data rows, found {len(body)}")
    data = np.empty((n_rows, n_cols))
    for i, ln in enumerate(body):
        cells = ln.split(",")
        if len(cells) != n_cols:
            raise FormatError(f"row {i + 1} has {len(cells)} values, expected {n_cols}")
        try:
            data[i] = [float(c) for c in cells]
        except ValueError:
            raise FormatError(f"row {i + 1} contains a non-numeric value") from None
    return data


def write_signal(path, signal):
    header = f"# adlab-signal v1 M={signal.M} dt={_fmt(signal.dt)}"
    if signal.origin != 0.0:
        header += f" origin={_fmt(signal.origin)}"
    rows = [f"{_fmt(v.real)},{_fmt(v.imag)}" for v in signal.samples]
    _write_text(path, "\n".join([header, *rows]) + "\n")


def read_signal(path):
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path} is empty")
    fields = parse_header(lines[0], "signal")
    M = _int_field(fields, "M")
    dt = _float_field(fields, "dt")
    origin = _float_field(fields, "origin", 0.0)
    data = _parse_rows(lines[1:], M, 2)
    return Signal(data[:, 0] + 1j * data[:, 1], dt, origin)


def write_matrix(path, A):
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise FormatError("matrix files hold square matrices only")
    rows = [",".join(_fmt(v) for v in _interleave(r)) for r in A]
    _write_text(path, "\n".join([f"# adlab-matrix v1 M={A.shape[0]}", *rows]) + "\n")


def read_matrix(path):
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path} is empty")
    M = _int_field(parse_header(lines[0], "matrix"), "M")
    data = _parse_rows(lines[1:], M, 2 * M)
    return data[:, 0::2] + 1j * data[:, 1::2]


def write_grid(path, G, row_axis="row", col_axis="col"):
    G = np.asarray(G)
    if G.ndim != 2:
        raise FormatError("grid files hold 2-D arrays only")
    is_complex = np.iscomplexobj(G)
    for name in (row_axis, col_axis):
        if not name or any(ch.isspace() or ch == "=" for ch in name):
            raise FormatError(f"axis name {name!r} may not contain spaces or '='")
    header = (f"# adlab-grid v1 rows={G.shape[0]} cols={G.shape[1]} row-axis={row_axis} "
              f"col-axis={col_axis} dtype={'complex' if is_complex else 'real'}")
    if is_complex:
        rows = [",".join(_fmt(v) for v in _interleave(r)) for r in G]
    else:
        rows = [",".join(_fmt(v) for v in np.asarray(r, float)) for r in G]
    _write_text(path, "\n".join([header, *rows]) + "\n")


def read_grid(path):
    """Returns ``(values, row_axis, col_axis)``."""
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path} is empty")
    fields = parse_header(lines[0], "grid")
    rows, cols = _int_field(fields, "rows"), _int_field(fields, "cols")
    dtype = fields.get("dtype", "real")
    if dtype not in ("real", "complex"):
        raise FormatError(f"unknown grid dtype {dtype!r}")
    if dtype == "complex":
        data = _parse_rows(lines[1:], rows, 2 * cols)
        values = data[:, 0::2] + 1j * data[:, 1::2]
    else:
        values = _parse_rows(lines[1:], rows, cols)
    return values, fields.get("row-axis", "row"), fields.get("col-axis", "col")


def write_json(path, payload):
    _write_text(path, json.dumps(payload, indent=2, sort_keys=False, default=_json_default)
                + "\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def load_schema(command):
    """The published JSON schema for a CLI report."""
    from importlib import resources

    try:
        text = resources.files("adlab").joinpath("schemas", f"{command}.schema.json").read_text()
    except FileNotFoundError:
        raise IoError(f"no schema for command {command!r}") from None
    return json.loads(text)
