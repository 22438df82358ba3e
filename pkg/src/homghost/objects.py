"""Procedural binary test objects.

Shapes are drawn in a square box of ``size`` pixels whose centre sits at the
grid centre plus ``offset``. They stand in for the hand-made objects of the
lab experiment and work at any resolution.
"""
from __future__ import annotations

import math

import numpy as np

from .grid import PixelGrid

BUILTIN_OBJECTS = ("lambda", "arrow", "pi-symmetric-bar")


def _segment_distance(u, v, p0, p1):
    (x0, y0), (x1, y1) = p0, p1
    dx, dy = x1 - x0, y1 - y0
    t = np.clip(((u - x0) * dx + (v - y0) * dy) / (dx * dx + dy * dy), 0.0, 1.0)
    return np.hypot(u - (x0 + t * dx), v - (y0 + t * dy))


def _lambda(u, v):
    long_stroke = _segment_distance(u, v, (0.28, 0.06), (0.84, 0.94)) < 0.085
    short_stroke = _segment_distance(u, v, (0.53, 0.47), (0.16, 0.94)) < 0.085
    return long_stroke | short_stroke


def _arrow(u, v):
    shaft = (u >= 0.08) & (u <= 0.6) & (np.abs(v - 0.5) <= 0.08)
    head = (u >= 0.55) & (u <= 0.95) & (np.abs(v - 0.5) <= 0.32 * (0.95 - u) / 0.4)
    return shaft | head


def _zbar(u, v):
    bar = (u >= 0.12) & (u <= 0.88) & (np.abs(v - 0.5) <= 0.09)
    tab = (u >= 0.12) & (u <= 0.3) & (v >= 0.14) & (v <= 0.5)
    return bar | tab


_SHAPES = {"lambda": _lambda, "arrow": _arrow, "pi-symmetric-bar": _zbar}


def draw_shape(name: str, size: int) -> np.ndarray:
    if name not in _SHAPES:
        raise ValueError(f"unknown object {name!r}; built-ins are {BUILTIN_OBJECTS}")
    if size < 1:
        raise ValueError("object size must be >= 1")
    v, u = (np.mgrid[0:size, 0:size] + 0.5) / size
    box = _SHAPES[name](u, v)
    if name == "pi-symmetric-bar":
        box = box | box[::-1, ::-1]  # exact half-turn symmetry about the box centre
    return box


def builtin_object(
    name: str, grid: PixelGrid, size: int | None = None, offset: tuple[int, int] = (0, 0)
) -> np.ndarray:
    """Bool image of a built-in object; parts falling off the grid are cut."""
    if size is None:
        size = max(1, min(grid.width, grid.height) // 2)
    box = draw_shape(name, size)
    x0 = math.floor((grid.width - size) / 2) + int(offset[0])
    y0 = math.floor((grid.height - size) / 2) + int(offset[1])
    out = np.zeros(grid.shape, dtype=bool)
    ys, xs = np.nonzero(box)
    ys, xs = ys + y0, xs + x0
    keep = (xs >= 0) & (xs < grid.width) & (ys >= 0) & (ys < grid.height)
    out[ys[keep], xs[keep]] = True
    return out
