"""Static SVG drawings of planar geometric graphs."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .geometry import GeometryError
from .graph import GeometricGraph


def render_svg(g: GeometricGraph, path=None, size: float = 800.0) -> str:
    """Draw edges as lines, input points as filled dots and Steiner points as rings.

    Coordinates are written unscaled (the y axis flipped through a group
    transform), so the drawing can be parsed back into vertex positions.
    """
    if g.dim != 2:
        raise GeometryError(f"only planar graphs can be rendered, got d={g.dim}")
    c = g.coords
    if len(c):
        lo, hi = c.min(0), c.max(0)
    else:
        lo, hi = np.zeros(2), np.ones(2)
    span = float(max(hi - lo)) or 1.0
    pad = 0.05 * span
    r = span / 300
    x0, y0 = lo[0] - pad, -(hi[1] + pad)
    w = h = span + 2 * pad
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:g}" height="{size:g}" '
        f'viewBox="{x0!r} {y0!r} {w!r} {h!r}">',
        '<g transform="scale(1,-1)">',
        f'<g stroke="#555" stroke-width="{r / 3!r}">',
    ]
    for (a, b) in g.edges:
        (xa, ya), (xb, yb) = g.coord(a), g.coord(b)
        out.append(f'<line x1="{xa!r}" y1="{ya!r}" x2="{xb!r}" y2="{yb!r}"/>')
    out.append("</g>")
    for i in range(g.n_vertices):
        x, y = g.coord(i)
        if g.steiner[i]:
            out.append(f'<circle class="steiner" cx="{x!r}" cy="{y!r}" r="{r!r}" fill="none" '
                       f'stroke="#c33" stroke-width="{r / 3!r}"/>')
        else:
            out.append(f'<circle class="point" cx="{x!r}" cy="{y!r}" r="{r!r}" fill="#000"/>')
    out += ["</g>", "</svg>"]
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
