"""Deterministic CSV and JSON writers.

Floats are written with 17 significant digits so every value round-trips
exactly; CSV uses commas, ``\\n`` line ends and a header row.
"""

import io
import math
from pathlib import Path

import numpy as np

from .errors import DomainError
from .profiles import RadialProfile
from .radial import GridFunction, LogGrid

__all__ = [
    "format_float",
    "read_profile_csv",
    "to_json",
    "write_csv",
    "write_profile_csv",
    "write_text",
]


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _plain(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _cell(value):
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    text = str(value)
    if any(c in text for c in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def csv_text(header, rows):
    lines = [",".join(header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _json_string(s):
    import json

    return json.dumps(s, ensure_ascii=False)


def to_json(obj, indent=2, _level=0):
    """JSON text with 17-digit floats and keys in insertion order."""
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    close = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return _json_string(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_string(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_text(path, text):
    """Write with ``\\n`` line ends regardless of platform."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_csv(path, header, rows):
    write_text(path, csv_text(header, rows))


def write_profile_csv(path, profile):
    rows = zip(profile.f.t, profile.values)
    write_csv(path, ("t", "f"), rows)


def read_profile_csv(source, N):
    """Read a ``t,f`` profile; the ``t`` column must be uniformly spaced."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read() if isinstance(source, io.IOBase) else str(source)
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or [c.strip() for c in lines[0].split(",")] != ["t", "f"]:
        raise DomainError("profile CSV must start with the header 't,f'")
    data = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    if data.ndim != 2 or data.shape[1] != 2:
        raise DomainError("profile CSV rows must have two columns")
    t, f = data[:, 0], data[:, 1]
    grid = LogGrid(float(t[0]), float(t[-1]), len(t))
    if not np.allclose(t, grid.t, rtol=0, atol=1e-9 * max(1.0, np.abs(t).max())):
        raise DomainError("profile CSV t column is not uniformly spaced")
    return RadialProfile(GridFunction(grid, f), N)
