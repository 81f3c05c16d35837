"""Deterministic text output: JSON with 17-significant-digit floats, CSV.

Float fields are rendered with ``%.17g`` so every value round-trips
exactly; dictionary key order is the construction order, never sorted, so
identical inputs produce byte-identical documents.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .extremals import Trajectory

__all__ = ["format_float", "dumps", "trajectory_to_csv", "trajectory_rows"]

CSV_HEADER = "t,x,y,z,h1,h2,h3,u1,u2,u3,J"


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"refusing to serialize non-finite float {x}")
    return format(float(x), ".17g")


def _emit(obj, pieces: list, level: int, indent: int) -> None:
    pad = " " * (indent * (level + 1))
    closing = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            pieces.append(f"{pad}{json.dumps(str(key))}: ")
            _emit(value, pieces, level + 1, indent)
            pieces.append(",\n" if i < len(obj) - 1 else "\n")
        pieces.append(closing + "}")
    elif isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            pieces.append("[]")
            return
        pieces.append("[\n")
        for i, value in enumerate(obj):
            pieces.append(pad)
            _emit(value, pieces, level + 1, indent)
            pieces.append(",\n" if i < len(obj) - 1 else "\n")
        pieces.append(closing + "]")
    elif isinstance(obj, bool) or obj is None:
        pieces.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        pieces.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        pieces.append(format_float(float(obj)))
    elif isinstance(obj, str):
        pieces.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON text (LF newlines, trailing newline)."""
    pieces: list = []
    _emit(obj, pieces, 0, indent)
    pieces.append("\n")
    return "".join(pieces)


def trajectory_rows(traj: Trajectory) -> list[list[float]]:
    if traj.h is None:
        raise ValueError("trajectory carries no covectors; cannot emit h columns")
    rows = []
    for i in range(len(traj)):
        rows.append(
            [
                float(traj.t[i]),
                float(traj.q[i, 0]),
                float(traj.q[i, 1]),
                float(traj.q[i, 2]),
                float(traj.h[i, 0]),
                float(traj.h[i, 1]),
                float(traj.h[i, 2]),
                float(traj.u[i, 0]),
                float(traj.u[i, 1]),
                float(traj.u[i, 2]),
                float(traj.J[i]),
            ]
        )
    return rows


def trajectory_to_csv(traj: Trajectory) -> str:
    lines = [CSV_HEADER]
    for row in trajectory_rows(traj):
        lines.append(",".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"
