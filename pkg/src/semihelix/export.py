"""Writers for CSV, OBJ and JSON outputs. Every float is written as %.17g."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    return "%.17g" % (float(x) + 0.0)


def write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in np.asarray(rows, dtype=np.float64):
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_csv(path):
    """Return (header, float array) of a file written by `write_csv`."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    return header, np.array(rows, dtype=np.float64).reshape(-1, len(header))


def write_obj(path, points, counts) -> tuple[int, int]:
    """
    Triangulated tensor grid. `points` has shape ``counts + (3,)``; each grid
    cell becomes two triangles. Returns (vertex count, face count).
    """
    P = np.asarray(points, dtype=np.float64)
    nu, nv = counts
    V = P.reshape(-1, 3)
    faces = []
    for i in range(nu - 1):
        for j in range(nv - 1):
            a = i * nv + j + 1
            b = a + nv
            faces.append((a, b, b + 1))
            faces.append((a, b + 1, a + 1))
    with open(path, "w", encoding="utf-8") as fh:
        for v in V:
            fh.write("v " + " ".join(fmt(c) for c in v) + "\n")
        for f in faces:
            fh.write("f %d %d %d\n" % f)
    return len(V), len(faces)


def _json(obj, indent, level) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or obj is True or obj is False:
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}{_json(str(k), indent, level + 1)}: {_json(v, indent, level + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_json(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _json(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with floats at %.17g and non-finite floats as null."""
    return _json(obj, indent, 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")
