"""Deterministic SVG drawings of orbits, atomic measures and verdicts.

The boundary circle (or the sphere, seen orthographically from +z) is drawn
in a unit square scaled to ``size`` pixels.  Back-hemisphere points are
drawn hollow.  All numbers are written with fixed precision so identical
inputs give identical bytes.
"""

from __future__ import annotations

import json
from xml.sax.saxutils import escape

import numpy as np

from .errors import DomainError

CLASS_COLORS = (
    ("radial", "#b2182b"),
    ("shadow", "#ef8a62"),
    ("horospheric", "#67a9cf"),
    ("big_horospheric", "#2166ac"),
    ("none", "#999999"),
)


def _f(x):
    return f"{x:.3f}"


def verdict_class(record):
    """Strongest class a verdict record passes, in the order of the hierarchy."""
    for name, _ in CLASS_COLORS[:-1]:
        if record.get(f"{name}_passed"):
            return name
    return "none"


def _project(p, size, margin):
    half = (size - 2 * margin) / 2
    x = margin + half * (1 + p[0])
    y = margin + half * (1 - p[1])
    return x, y


def _check_dim(dim):
    if dim not in (2, 3):
        raise DomainError(f"cannot draw a boundary of dimension {dim - 1}")


def render_svg(orbit=None, measure=None, verdicts=(), params=None, size=600, title=""):
    """SVG text for any combination of an orbit, an atomic measure and verdict records.

    Orbit points are drawn at their radial projections; atoms get radius
    proportional to the square root of their weight.  ``verdicts`` are
    records as produced by ``Verdict.record()``.
    """
    dims = set()
    if orbit is not None:
        dims.add(orbit.dim)
    if measure is not None:
        dims.add(measure.points.shape[1])
    for v in verdicts:
        dims.add(len(v["point"]))
    if not dims:
        raise DomainError("nothing to draw")
    if len(dims) > 1:
        raise DomainError("inputs live on boundaries of different dimension")
    dim = dims.pop()
    _check_dim(dim)
    legend = [f"{k} = {json.dumps(v, sort_keys=True)}" for k, v in sorted((params or {}).items())]
    margin = 20
    height = size + 16 * (len(legend) + 2)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{height}" viewBox="0 0 {size} {height}">',
        f'<rect x="0" y="0" width="{size}" height="{height}" fill="white"/>',
    ]
    cx, cy = _project((0.0, 0.0), size, margin)
    r = (size - 2 * margin) / 2
    out.append(f'<circle cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(r)}" fill="none" stroke="black" stroke-width="1"/>')

    def dot(p, rad, color, opacity=1.0):
        x, y = _project(p, size, margin)
        back = dim == 3 and p[2] < 0
        fill = "none" if back else color
        return (f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(rad)}" fill="{fill}" stroke="{color}" '
                f'stroke-width="0.5" fill-opacity="{opacity:.2f}"/>')

    if orbit is not None:
        pts = orbit.points
        nrm = np.linalg.norm(pts, axis=1)
        for p, n in zip(pts, nrm):
            if n > 1e-15:
                out.append(dot(p / n, 1.0, "#444444", 0.6))
    if measure is not None:
        w = measure.weights / measure.weights.max()
        for p, x in zip(measure.points, w):
            out.append(dot(p, 1.0 + 6.0 * float(np.sqrt(x)), "#1b7837", 0.5))
    colors = dict(CLASS_COLORS)
    for v in verdicts:
        out.append(dot(np.asarray(v["point"], float), 3.0, colors[verdict_class(v)]))

    y = size + 16
    if title:
        out.append(f'<text x="{margin}" y="{y}" font-family="monospace" font-size="12">{escape(title)}</text>')
        y += 16
    if verdicts:
        keys = " ".join(f"{name}:{c}" for name, c in CLASS_COLORS)
        out.append(f'<text x="{margin}" y="{y}" font-family="monospace" font-size="10">{escape(keys)}</text>')
        y += 16
    for line in legend:
        out.append(f'<text x="{margin}" y="{y}" font-family="monospace" font-size="10">{escape(line)}</text>')
        y += 16
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, **kw):
    text = render_svg(**kw)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
