"""Counter-based random streams.

Every random draw in the package comes from a Philox generator keyed by
(seed, domain, index), so item ``index`` of a run can be regenerated on its
own, in any order, on any worker.
"""
from __future__ import annotations

import numpy as np

MASKS = 1
COUNTS = 2
TRIALS = 3

_U64 = (1 << 64) - 1


def stream(seed: int, index: int, domain: int = 0) -> np.random.Generator:
    if not 0 <= seed <= _U64:
        raise ValueError(f"seed must be a non-negative 64-bit integer, got {seed}")
    if not 0 <= index < (1 << 48) or not 0 <= domain < (1 << 16):
        raise ValueError(f"stream index {index} / domain {domain} out of range")
    return np.random.Generator(np.random.Philox(key=[seed, (domain << 48) | index]))
