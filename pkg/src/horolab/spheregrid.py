"""Deterministic cell grids on S^1 and S^2.

S^1 is cut into ``4 * 2^level`` equal arcs.  S^2 uses the octahedron: each
octant face is split into ``4^level`` triangles in barycentric coordinates
and pushed to the sphere by radial projection.  Cells are keyed by small
integer tuples so they sort in a fixed order.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError


def n_cells(level, dim):
    return 4 * 2**level if dim == 2 else 8 * 4**level


def cell_scale(level, dim):
    """Nominal cell diameter (chordal) at a level."""
    if dim == 2:
        return 2 * math.sin(math.pi / (4 * 2**level))
    return (math.pi / 2) / 2**level


def level_for_scale(scale, dim):
    """Smallest level whose cells are no larger than ``scale``."""
    lv = 0
    while cell_scale(lv, dim) > scale:
        lv += 1
    return lv


def cell_keys(points, level):
    """Integer cell keys, one row per point."""
    p = np.atleast_2d(np.asarray(points, float))
    dim = p.shape[1]
    if dim == 2:
        m = n_cells(level, 2)
        ang = np.mod(np.arctan2(p[:, 1], p[:, 0]), 2 * math.pi)
        return np.minimum((ang / (2 * math.pi) * m).astype(np.int64), m - 1)[:, None]
    if dim != 3:
        raise DomainError("cell grids exist for S^1 and S^2 only")
    n = 2**level
    face = (p[:, 0] < 0) * 4 + (p[:, 1] < 0) * 2 + (p[:, 2] < 0)
    a = np.abs(p)
    u = a / a.sum(axis=1, keepdims=True) * n
    i = np.minimum(np.floor(u[:, 0]), n - 1).astype(np.int64)
    j = np.minimum(np.floor(u[:, 1]), n - 1 - i).astype(np.int64)
    up = ((u[:, 0] - i) + (u[:, 1] - j) < 1).astype(np.int64)
    # the last row and column only hold "up" cells
    up = np.where(i + j >= n - 1, 1, up)
    return np.column_stack([face, i, j, up])


def cell_center(key, level, dim):
    """Unit vector at the centre of a cell."""
    if dim == 2:
        ang = (key[0] + 0.5) / n_cells(level, 2) * 2 * math.pi
        return np.array([math.cos(ang), math.sin(ang)])
    face, i, j, up = (int(v) for v in key)
    n = 2**level
    if up:
        b = np.array([i + 1 / 3, j + 1 / 3])
    else:
        b = np.array([i + 2 / 3, j + 2 / 3])
    u = np.array([b[0], b[1], n - b[0] - b[1]]) / n
    sgn = np.array([-1 if face & 4 else 1, -1 if face & 2 else 1, -1 if face & 1 else 1])
    v = sgn * u
    return v / np.linalg.norm(v)


def occupancy(points, level, weights=None):
    """Map from cell key (tuple) to (point count, summed weight)."""
    keys = cell_keys(points, level)
    w = np.ones(len(keys)) if weights is None else np.asarray(weights, float)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    counts = np.bincount(inv, minlength=len(uniq))
    mass = np.bincount(inv, weights=w, minlength=len(uniq))
    return {tuple(int(v) for v in k): (int(c), float(m)) for k, c, m in zip(uniq, counts, mass)}
