"""Discrete transverse plane and the rotation applied by the Dove prisms.

Pixels are indexed row-major with (0, 0) at the top-left corner and y
increasing downward. The continuous coordinate of pixel (x, y) is its centre,
(x, y) in pixel units, so the default rotation centre of a W x H grid is
((W - 1) / 2, (H - 1) / 2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class PixelCoord(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class PixelGrid:
    width: int
    height: int
    center: tuple[float, float]

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid dimensions must be >= 1, got {self.width}x{self.height}")
        cx, cy = self.center
        if not (0.0 <= cx <= self.width and 0.0 <= cy <= self.height):
            raise ValueError(f"center {self.center} outside [0, {self.width}] x [0, {self.height}]")

    @property
    def shape(self) -> tuple[int, int]:
        """numpy shape (rows, cols) of an image on this grid."""
        return (self.height, self.width)

    @property
    def size(self) -> int:
        return self.width * self.height

    def contains(self, p: PixelCoord | tuple[int, int]) -> bool:
        return 0 <= p[0] < self.width and 0 <= p[1] < self.height

    def pixels(self):
        """Yield every in-grid pixel in row-major order."""
        for y in range(self.height):
            for x in range(self.width):
                yield PixelCoord(x, y)

    def index(self, p: PixelCoord | tuple[int, int]) -> int:
        return p[1] * self.width + p[0]


def make_grid(width: int, height: int, center: tuple[float, float] | None = None) -> PixelGrid:
    if width < 1 or height < 1:
        raise ValueError(f"grid dimensions must be >= 1, got {width}x{height}")
    if center is None:
        center = ((width - 1) / 2.0, (height - 1) / 2.0)
    return PixelGrid(int(width), int(height), (float(center[0]), float(center[1])))


@dataclass(frozen=True)
class RotationOp:
    """Rotation of the transverse plane by ``angle`` radians about ``center``.

    ``angle`` is the image-plane angle, i.e. twice the relative Dove prism
    angle. With y pointing down, a positive angle maps +x onto +y.
    """

    angle: float
    center: tuple[float, float]
    _cos: float = field(init=False, repr=False, compare=False)
    _sin: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        c, s = _exact_cos_sin(self.angle)
        object.__setattr__(self, "_cos", c)
        object.__setattr__(self, "_sin", s)

    @classmethod
    def for_grid(cls, grid: PixelGrid, angle: float) -> RotationOp:
        return cls(float(angle), grid.center)

    @classmethod
    def from_dove_angle(cls, grid: PixelGrid, theta: float) -> RotationOp:
        """R(2 theta) for a relative Dove prism angle ``theta``."""
        return cls(2.0 * float(theta), grid.center)

    def inverse(self) -> RotationOp:
        return RotationOp(-self.angle, self.center)


def _exact_cos_sin(angle: float) -> tuple[float, float]:
    # Quarter turns are snapped so they permute pixel centres exactly.
    quarter = angle / (math.pi / 2.0)
    k = round(quarter)
    if abs(quarter - k) < 1e-12:
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][k % 4]
    return math.cos(angle), math.sin(angle)


def rotate_continuous(op: RotationOp, p: tuple[float, float]) -> tuple[float, float]:
    cx, cy = op.center
    dx, dy = p[0] - cx, p[1] - cy
    return (cx + op._cos * dx - op._sin * dy, cy + op._sin * dx + op._cos * dy)


def nearest_pixel(p: tuple[float, float]) -> PixelCoord:
    # floor(v + 0.5): ties round up, unlike Python's round-half-even
    return PixelCoord(math.floor(p[0] + 0.5), math.floor(p[1] + 0.5))


def _targets(width: int, height: int, op: RotationOp) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:height, 0:width].astype(float)
    cx, cy = op.center
    dx, dy = xs - cx, ys - cy
    rx = cx + op._cos * dx - op._sin * dy
    ry = cy + op._sin * dx + op._cos * dy
    return np.floor(rx + 0.5).astype(np.int64), np.floor(ry + 0.5).astype(np.int64)


def rotated_targets(grid: PixelGrid, op: RotationOp) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-pixel image of every grid pixel under ``op``.

    Returns integer arrays ``(tx, ty)`` of shape ``grid.shape``; entries may
    fall outside the grid.
    """
    return _targets(grid.width, grid.height, op)


def rotate_mask(mask: np.ndarray, op: RotationOp) -> np.ndarray:
    """Whole-image form of :func:`sample_rotated`: ``out[y, x] = mask(R (x, y))``."""
    mask = np.asarray(mask)
    h, w = mask.shape
    tx, ty = _targets(w, h, op)
    inside = (tx >= 0) & (tx < w) & (ty >= 0) & (ty < h)
    out = np.zeros_like(mask)
    out[inside] = mask[ty[inside], tx[inside]]
    return out


def sample_rotated(mask: np.ndarray, op: RotationOp, r: PixelCoord | tuple[int, int]) -> int:
    """Value of the binary ``mask`` at the rotated point R r.

    Points that leave the grid read as 0 (blocked).
    """
    mask = np.asarray(mask)
    h, w = mask.shape
    q = nearest_pixel(rotate_continuous(op, (float(r[0]), float(r[1]))))
    if 0 <= q.x < w and 0 <= q.y < h:
        return int(mask[q.y, q.x] != 0)
    return 0


@dataclass(frozen=True)
class PermutationMap:
    """Nearest-pixel assignment r -> R r over all in-grid pixels."""

    grid: PixelGrid
    targets_x: np.ndarray
    targets_y: np.ndarray
    bijective: bool

    @property
    def inside(self) -> np.ndarray:
        return (
            (self.targets_x >= 0)
            & (self.targets_x < self.grid.width)
            & (self.targets_y >= 0)
            & (self.targets_y < self.grid.height)
        )

    def target(self, p: PixelCoord | tuple[int, int]) -> PixelCoord:
        return PixelCoord(int(self.targets_x[p[1], p[0]]), int(self.targets_y[p[1], p[0]]))

    def fibers(self) -> dict[PixelCoord, list[PixelCoord]]:
        """Inverse relation: in-grid target -> sources mapping onto it (row-major order)."""
        out: dict[PixelCoord, list[PixelCoord]] = {}
        inside = self.inside
        for p in self.grid.pixels():
            if inside[p.y, p.x]:
                out.setdefault(self.target(p), []).append(p)
        return out

    def collisions(self) -> int:
        """Number of sources that share an in-grid target with an earlier source."""
        inside = self.inside
        flat = self.targets_y[inside] * self.grid.width + self.targets_x[inside]
        return int(flat.size - np.unique(flat).size)

    def out_of_grid(self) -> int:
        return int((~self.inside).sum())


def permutation_map(grid: PixelGrid, op: RotationOp) -> PermutationMap:
    tx, ty = _targets(grid.width, grid.height, op)
    pm = PermutationMap(grid, tx, ty, False)
    bijective = pm.out_of_grid() == 0 and pm.collisions() == 0
    return PermutationMap(grid, tx, ty, bijective)
