"""Coincidence counting: shot noise and HOM visibility."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import rng


@dataclass(frozen=True)
class DetectionConfig:
    pair_rate: float = 1.0e5  # pairs per second reaching the filter
    integration: float = 1.0  # seconds per mask
    seed: int = 0
    poisson: bool = False
    visibility: float = 1.0

    def __post_init__(self):
        if self.pair_rate < 0:
            raise ValueError("pair_rate must be >= 0")
        if not self.integration > 0:
            raise ValueError("integration must be > 0")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("visibility must lie in [0, 1]")

    def mean_count(self, prob: float) -> float:
        return prob * self.pair_rate * self.integration

    def to_dict(self) -> dict:
        return asdict(self)


def sample_count(prob: float, cfg: DetectionConfig, index: int = 0) -> int:
    """Coincidence count for one mask.

    Poisson with mean prob * pair_rate * integration, drawn from the stream
    (cfg.seed, index); with ``poisson`` off the mean is rounded half up.
    """
    if not -1e-12 <= prob <= 1.0 + 1e-12:
        raise ValueError(f"probability {prob} outside [0, 1]")
    lam = cfg.mean_count(max(prob, 0.0))
    if not cfg.poisson:
        return int(math.floor(lam + 0.5))
    if lam == 0.0:
        return 0
    return int(rng.stream(cfg.seed, index, rng.COUNTS).poisson(lam))


def sample_counts(probs, cfg: DetectionConfig, start: int = 0) -> np.ndarray:
    return np.array([sample_count(float(p), cfg, start + i) for i, p in enumerate(probs)], dtype=np.int64)


def mix_visibility(matched: np.ndarray, delayed: np.ndarray, visibility: float) -> np.ndarray:
    """V * matched + (1 - V) * delayed, pixel by pixel.

    Matched and delayed images from this setup have the same shape, so a
    visibility scan only changes the total coincidence rate, not the picture.
    """
    matched = np.asarray(matched, dtype=float)
    delayed = np.asarray(delayed, dtype=float)
    if matched.shape != delayed.shape:
        raise ValueError(f"image shapes differ: {matched.shape} vs {delayed.shape}")
    if not 0.0 <= visibility <= 1.0:
        raise ValueError("visibility must lie in [0, 1]")
    return visibility * matched + (1.0 - visibility) * delayed
