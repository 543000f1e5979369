"""Point and graph files.

Point files hold ``d n`` on the first line and then one point per line.
Graph files are JSON with ``vertices`` and ``edges`` lists; floats are
written with 17 significant digits so they round-trip exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .geometry import GeometryError, as_points
from .graph import GeometricGraph, GraphError


def write_points(path, points) -> None:
    arr = as_points(points)
    n, d = arr.shape
    lines = [f"{d} {n}"] + [" ".join(f"{x:.17g}" for x in row) for row in arr.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_points(path) -> np.ndarray:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not rows:
        raise GeometryError(f"{path}: empty point file")
    try:
        d, n = int(rows[0][0]), int(rows[0][1])
        body = np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)
    except (ValueError, IndexError) as exc:
        raise GeometryError(f"{path}: malformed point file ({exc})") from None
    if len(rows) - 1 != n or (n and body.shape[1] != d):
        raise GeometryError(f"{path}: header says {n} points of dimension {d}")
    return body.reshape(n, d)


def _num(x: float) -> float:
    return float(f"{x:.17g}")


def graph_to_dict(g: GeometricGraph) -> dict:
    return {
        "dim": g.dim,
        "vertices": [{"id": i, "coords": [_num(x) for x in g.coord(i)], "steiner": bool(g.steiner[i])}
                     for i in range(g.n_vertices)],
        "edges": [{"u": a, "v": b, "weight": _num(w)} for (a, b), w in g.edges.items()],
    }


def graph_from_dict(doc: dict) -> GeometricGraph:
    try:
        g = GeometricGraph(int(doc["dim"]))
        for k, v in enumerate(doc["vertices"]):
            if v["id"] != k:
                raise GraphError(f"vertex ids must be 0..n-1 in order, got {v['id']} at {k}")
            g.add_vertex(v["coords"], steiner=v["steiner"], key=None if v["steiner"] else ("p", k))
        for e in doc["edges"]:
            g.add_edge(int(e["u"]), int(e["v"]))
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph document: {exc}") from None
    g.check_weights(rel_tol=1e-9)
    return g


def write_graph(path, g: GeometricGraph) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(g), indent=1) + "\n")


def read_graph(path) -> GeometricGraph:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GraphError(f"{path}: not a graph document ({exc})") from None
    return graph_from_dict(doc)
