"""Measurement masks, expected coincidences and image reconstruction.

Two scan protocols are supported: a raster of single "on" blocks, and
random binary masks with a fixed white fraction. Both are lazy sequences of
:class:`MeasureMask`, so a 960 x 960 raster does not have to sit in memory.

Reductions over masks always run over fixed-size chunks combined in mask
order, which keeps results bit-identical for any number of workers.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .detection import DetectionConfig, sample_count
from .grid import PixelGrid, RotationOp, rotate_mask
from .state import SinglePhotonState, SpdcProfile

CHUNK = 256


@dataclass(frozen=True)
class MeasureMask:
    bits: np.ndarray  # bool, shape (height, width)
    fill: float

    @property
    def white(self) -> int:
        return int(np.count_nonzero(self.bits))


class RasterMasks(Sequence):
    """One mask per ``block`` x ``block`` tile, row-major over tiles."""

    def __init__(self, grid: PixelGrid, block: int):
        if block < 1 or grid.width % block or grid.height % block:
            raise ValueError(f"block {block} does not divide grid {grid.width}x{grid.height}")
        self.grid = grid
        self.block = block
        self.cols = grid.width // block
        self.rows = grid.height // block
        self.fill = block * block / grid.size

    def __len__(self) -> int:
        return self.rows * self.cols

    def tile(self, i: int) -> tuple[slice, slice]:
        if not 0 <= i < len(self):
            raise IndexError(i)
        ty, tx = divmod(i, self.cols)
        b = self.block
        return slice(ty * b, (ty + 1) * b), slice(tx * b, (tx + 1) * b)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        bits = np.zeros(self.grid.shape, dtype=bool)
        bits[self.tile(i)] = True
        return MeasureMask(bits, self.fill)

    def stack(self, start: int, stop: int) -> np.ndarray:
        out = np.zeros((stop - start,) + self.grid.shape, dtype=bool)
        for k, i in enumerate(range(start, stop)):
            out[(k,) + self.tile(i)] = True
        return out.reshape(stop - start, -1)


class RandomMasks(Sequence):
    """``n`` masks with round(fill * pixels) white pixels each.

    Mask ``i`` is a uniform shuffle drawn from the counter-based stream
    (seed, i), so any mask can be rebuilt without the ones before it.
    """

    def __init__(self, grid: PixelGrid, n: int, fill: float, seed: int):
        if n < 1:
            raise ValueError("need at least one mask")
        if not 0.0 < fill <= 1.0:
            raise ValueError(f"fill must lie in (0, 1], got {fill}")
        self.grid = grid
        self.n = int(n)
        self.fill = float(fill)
        self.seed = int(seed)
        self.white = max(1, math.floor(fill * grid.size + 0.5))

    def __len__(self) -> int:
        return self.n

    def _flat(self, i: int) -> np.ndarray:
        perm = rng.stream(self.seed, i, rng.MASKS).permutation(self.grid.size)
        bits = np.zeros(self.grid.size, dtype=bool)
        bits[perm[: self.white]] = True
        return bits

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += self.n
        if not 0 <= i < self.n:
            raise IndexError(i)
        return MeasureMask(self._flat(i).reshape(self.grid.shape), self.fill)

    def stack(self, start: int, stop: int) -> np.ndarray:
        return np.stack([self._flat(i) for i in range(start, stop)])


def raster_masks(grid: PixelGrid, block: int = 1) -> RasterMasks:
    return RasterMasks(grid, block)


def random_masks(grid: PixelGrid, n: int, fill: float = 0.5, seed: int = 0) -> RandomMasks:
    return RandomMasks(grid, n, fill, seed)


def _stack(masks, start: int, stop: int) -> np.ndarray:
    if hasattr(masks, "stack"):
        return masks.stack(start, stop)
    return np.stack([np.asarray(masks[i].bits, dtype=bool).ravel() for i in range(start, stop)])


def _chunked(n: int, fn, workers: int):
    bounds = [(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]
    if workers <= 1 or len(bounds) <= 1:
        return [fn(s, e) for s, e in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))


def expected_coincidence(sp: SinglePhotonState, mask: MeasureMask, coherent: bool = True) -> float:
    """Coincidence probability for one measurement mask.

    Coherent (default): |w sum_s M(s) a(s)|^2 with w = 1/sqrt(white pixels),
    i.e. projection onto the normalised mask mode. Incoherent:
    sum_s M(s) |a(s)|^2, a bucket detector summing pixel intensities. The two
    agree for single-pixel masks; an all-black mask gives 0.
    """
    bits = np.asarray(mask.bits, dtype=bool)
    white = int(np.count_nonzero(bits))
    if white == 0:
        return 0.0
    if coherent:
        return float(abs(sp.amplitudes[bits].sum()) ** 2) / white
    return float((np.abs(sp.amplitudes[bits]) ** 2).sum())


def measure(sp: SinglePhotonState, masks, coherent: bool = True, workers: int = 1) -> np.ndarray:
    """Expected coincidence probability for every mask, in mask order."""
    amps = sp.amplitudes.ravel()
    weights = amps if coherent else np.abs(amps) ** 2

    def chunk(s: int, e: int) -> np.ndarray:
        m = _stack(masks, s, e)
        acc = np.where(m, weights, 0).sum(axis=1)
        if not coherent:
            return acc.real
        white = m.sum(axis=1)
        return np.divide(np.abs(acc) ** 2, white, out=np.zeros(len(white)), where=white > 0)

    return np.concatenate(_chunked(len(masks), chunk, workers))


@dataclass(frozen=True)
class CoincidenceRecord:
    mask_id: int
    expected_rate: float
    sampled_count: int | None = None


def make_records(probs, cfg: DetectionConfig) -> list[CoincidenceRecord]:
    return [
        CoincidenceRecord(i, cfg.mean_count(float(p)), sample_count(float(p), cfg, i))
        for i, p in enumerate(probs)
    ]


def record_counts(records: Sequence[CoincidenceRecord], use_sampled: bool = False) -> np.ndarray:
    """Expected rates, or the sampled counts when ``use_sampled``."""
    if use_sampled:
        if any(r.sampled_count is None for r in records):
            raise ValueError("records carry no sampled counts")
        return np.array([float(r.sampled_count) for r in records])
    return np.array([r.expected_rate for r in records], dtype=float)


@dataclass(frozen=True)
class ReconstructedImage:
    values: np.ndarray  # raw, possibly signed
    n: float
    cbar: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def clamped(self) -> np.ndarray:
        return np.clip(self.values, 0.0, 1.0)


def _weighted_sum(weights: np.ndarray, masks, shape: tuple[int, int], workers: int) -> np.ndarray:
    def chunk(s: int, e: int) -> np.ndarray:
        m = _stack(masks, s, e)
        return (weights[s:e, None] * m).sum(axis=0)

    total = np.zeros(shape[0] * shape[1])
    for part in _chunked(len(weights), chunk, workers):
        total += part
    return total.reshape(shape)


def _mask_shape(masks) -> tuple[int, int]:
    if hasattr(masks, "grid"):
        return masks.grid.shape
    return np.asarray(masks[0].bits).shape


def reconstruct_single_pixel(records, masks, use_sampled: bool = False, workers: int = 1) -> ReconstructedImage:
    """sum_i (c_i / n) P_i with n = max_i c_i."""
    if len(records) != len(masks):
        raise ValueError(f"{len(records)} records for {len(masks)} masks")
    if len(masks) == 0:
        raise ValueError("no masks")
    c = record_counts(records, use_sampled)
    img = _weighted_sum(c, masks, _mask_shape(masks), workers)
    n = float(c.max())
    if n <= 0.0:
        return ReconstructedImage(np.zeros_like(img), 0.0)
    return ReconstructedImage(img / n, n)


def _common_fill(masks) -> float:
    if hasattr(masks, "fill"):
        return float(masks.fill)
    fills = {round(float(m.fill), 12) for m in masks}
    if len(fills) != 1:
        raise ValueError(f"masks mix fill fractions {sorted(fills)}")
    return fills.pop()


def reconstruct_random_mask(
    records, masks, use_sampled: bool = False, workers: int = 1, counts: np.ndarray | None = None
) -> ReconstructedImage:
    """sum_i ((c_i - cbar) / n) M_i, scaled so max |value| = 1.

    Raw signed values are kept in ``values``; ``clamped`` gives the [0, 1]
    view. ``counts`` overrides the counts taken from ``records``.
    """
    c = record_counts(records, use_sampled) if counts is None else np.asarray(counts, dtype=float)
    if len(c) != len(masks):
        raise ValueError(f"{len(c)} records for {len(masks)} masks")
    if len(masks) == 0:
        raise ValueError("no masks")
    fill = _common_fill(masks)
    cbar = float(c.mean())
    img = _weighted_sum(c - cbar, masks, _mask_shape(masks), workers)
    n = float(np.abs(img).max())
    if n == 0.0:
        return ReconstructedImage(np.zeros_like(img), 0.0, cbar, {"fill": fill})
    return ReconstructedImage(img / n, n, cbar, {"fill": fill})


def predicted_image(
    obj: np.ndarray,
    theta: float,
    pipeline: str,
    center: tuple[float, float] | None = None,
    profile: SpdcProfile | None = None,
) -> np.ndarray:
    """Closed-form reconstruction, evaluated straight from the object.

    no_bs:  |c(r) O(Rr)|^2
    hom, bs_delayed:  |c(r) O(Rr) - c(R^-1 r) O(R^-1 r)|^2
    with R the rotation by 2 theta. Max-normalised; all zero stays zero.

    The formula samples O at R^-1 r. The simulated pipeline instead sums over
    every pixel whose nearest-pixel image is r, so for the HOM pipelines the
    two agree exactly only when the rotation permutes the grid (quarter
    turns about a symmetric centre).
    """
    obj = np.asarray(obj).astype(float)
    h, w = obj.shape
    if center is None:
        center = ((w - 1) / 2.0, (h - 1) / 2.0)
    grid = PixelGrid(w, h, center)
    c = (profile or SpdcProfile()).amplitudes(grid)
    rot = RotationOp(2.0 * theta, center)
    forward = c * rotate_mask(obj, rot)
    if pipeline == "no_bs":
        amp = forward
    elif pipeline in ("hom", "bs_delayed"):
        back = rotate_mask(c * obj, rot.inverse())
        amp = forward - back
    else:
        raise ValueError(f"unknown pipeline {pipeline!r}")
    img = np.abs(amp) ** 2
    peak = img.max()
    return img / peak if peak > 0 else img


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    a = a - a.mean()
    b = b - b.mean()
    den = math.sqrt(float(a @ a) * float(b @ b))
    return float(a @ b) / den if den > 0 else 0.0


def double_image_lobes(single: np.ndarray, double: np.ndarray, center: tuple[float, float]) -> dict:
    """Relate a HOM double image to the single rotated image at 2 theta = +-pi/2.

    There O(R^-1 r) is the single image turned by pi about ``center``, so the
    binary double image must equal ``single XOR half_turn(single)``. The two
    lobes are congruent (no visible doubling of shape) exactly when the single
    image is itself symmetric under a half turn about its own centre.
    """
    a = np.asarray(single) > 0.5
    b = np.asarray(double) > 0.5
    partner = rotate_mask(a, RotationOp(math.pi, center))
    return {
        "xor_identity": bool(np.array_equal(b, a ^ partner)),
        "disjoint": not bool(np.any(a & partner)),
        "congruent": bool(np.array_equal(_crop(a), _crop(partner))),
    }


def _crop(img: np.ndarray) -> np.ndarray:
    ys, xs = np.nonzero(img)
    if ys.size == 0:
        return img[:0, :0]
    return img[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1]
