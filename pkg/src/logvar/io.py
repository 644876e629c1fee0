"""Field dumps and JSON artifacts."""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .grid import Field, Grid

MAGIC = "LOGVAR-FIELD v1"


class FieldFormatError(ValueError):
    pass


def format_field(u: Field) -> str:
    g = u.grid
    lines = [f"{MAGIC} dim={g.dim} n={g.points_per_axis} L={float(g.half_width)!r}"]
    lines.extend(repr(float(v)) for v in u.values.ravel())
    return "\n".join(lines) + "\n"


def write_field(path, u: Field) -> None:
    Path(path).write_bytes(format_field(u).encode("utf-8"))


def parse_field(text: str) -> Field:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    header = lines[0].split(" ")
    if " ".join(header[:2]) != MAGIC or len(header) != 5:
        raise FieldFormatError(f"bad field header: {lines[0]!r}")
    try:
        meta = dict(item.split("=", 1) for item in header[2:])
        grid = Grid(int(meta["dim"]), float(meta["L"]), int(meta["n"]))
    except (KeyError, ValueError) as exc:
        raise FieldFormatError(f"bad field header: {lines[0]!r}") from exc
    if len(lines) - 1 != grid.size:
        raise FieldFormatError(f"expected {grid.size} values, found {len(lines) - 1}")
    return Field(grid, np.array([float(v) for v in lines[1:]]))


def read_field(path) -> Field:
    return parse_field(Path(path).read_bytes().decode("utf-8"))


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=False) + "\n", encoding="utf-8")


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
