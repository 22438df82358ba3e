"""OAM-basis picture of the symmetry filter.

The SPDC pair is written as sum_l a_l |l>_A |-l>_B. A relative Dove prism
angle theta multiplies |l>_A by exp(2i l theta), which splits each l-term
into a symmetric part a_l cos(2 l theta) and an anti-symmetric part
i a_l sin(2 l theta). The HOM filter passes only the anti-symmetric part.
The per-l formulas assume a_l = a_{-l}, which holds for SPDC spectra.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

EMPTY_TOL = 1e-24


@dataclass(frozen=True)
class SpiralSpectrum:
    lmax: int
    amps: np.ndarray  # complex, index l + lmax

    def __post_init__(self):
        if self.lmax < 0:
            raise ValueError("lmax must be >= 0")
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (2 * self.lmax + 1,):
            raise ValueError(f"expected {2 * self.lmax + 1} amplitudes, got shape {amps.shape}")
        if abs(float(np.sum(np.abs(amps) ** 2)) - 1.0) > 1e-10:
            raise ValueError("spectrum amplitudes are not normalised")
        object.__setattr__(self, "amps", amps)

    @property
    def ells(self) -> np.ndarray:
        return np.arange(-self.lmax, self.lmax + 1)

    def amp(self, ell: int) -> complex:
        return complex(self.amps[ell + self.lmax])

    @classmethod
    def from_weights(cls, lmax: int, weights) -> SpiralSpectrum:
        w = np.asarray(weights, dtype=complex)
        n = math.sqrt(float(np.sum(np.abs(w) ** 2)))
        if n == 0.0:
            raise ValueError("spectrum weights are all zero")
        return cls(lmax, w / n)


def lorentzian_spectrum(lmax: int, width: float = 7.0) -> SpiralSpectrum:
    """|a_l|^2 proportional to 1 / (1 + (l / width)^2)."""
    if width <= 0:
        raise ValueError("width must be positive")
    ells = np.arange(-lmax, lmax + 1)
    return SpiralSpectrum.from_weights(lmax, np.sqrt(1.0 / (1.0 + (ells / width) ** 2)))


def flat_spectrum(lmax: int) -> SpiralSpectrum:
    return SpiralSpectrum.from_weights(lmax, np.ones(2 * lmax + 1))


def dove_phase_decomposition(spec: SpiralSpectrum, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-l (symmetric, anti-symmetric) coefficients after the Dove prisms."""
    phase = 2.0 * spec.ells * theta
    return spec.amps * np.cos(phase), 1j * spec.amps * np.sin(phase)


def hom_filter_pass(spec: SpiralSpectrum, theta: float) -> tuple[SpiralSpectrum | None, float]:
    """Spectrum surviving the filter and the probability of a coincidence.

    Returns ``(None, p)`` when the anti-symmetric part is empty.
    """
    _, anti = dove_phase_decomposition(spec, theta)
    p = float(np.sum(np.abs(anti) ** 2))
    if p < EMPTY_TOL:
        return None, p
    return SpiralSpectrum(spec.lmax, anti / math.sqrt(p)), p


def bunching_probability(spec: SpiralSpectrum, theta: float) -> float:
    sym, _ = dove_phase_decomposition(spec, theta)
    return float(np.sum(np.abs(sym) ** 2))


@dataclass(frozen=True)
class OamJointCoincidenceMap:
    """Coincidence rates indexed ``rates[lA + lmax, lB + lmax]``."""

    lmax: int
    rates: np.ndarray
    normalized: bool = False

    @property
    def ells(self) -> np.ndarray:
        return np.arange(-self.lmax, self.lmax + 1)

    def rate(self, la: int, lb: int) -> float:
        return float(self.rates[la + self.lmax, lb + self.lmax])


def spiral_bandwidth_map(
    spec: SpiralSpectrum, theta: float = 0.0, filter_on: bool = False, normalize: bool = True
) -> OamJointCoincidenceMap:
    """Joint (lA, lB) coincidence map with or without the HOM filter.

    Without the filter the map is |a_lA|^2 on the anti-diagonal lB = -lA; the
    filter weights each entry by sin^2(2 lA theta). With ``normalize`` the map
    is divided by its maximum (left at zero if it is all zero).
    """
    if spec.lmax > 64:
        raise ValueError("lmax above 64 is not supported")
    n = 2 * spec.lmax + 1
    weights = np.abs(spec.amps) ** 2
    if filter_on:
        weights = weights * np.sin(2.0 * spec.ells * theta) ** 2
    rates = np.zeros((n, n))
    rates[np.arange(n), n - 1 - np.arange(n)] = weights
    if normalize:
        peak = rates.max()
        if peak > 0:
            rates = rates / peak
    return OamJointCoincidenceMap(spec.lmax, rates, normalize)


def map_to_csv(cmap: OamJointCoincidenceMap) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lA", "lB", "rate"])
    for la in cmap.ells:
        for lb in cmap.ells:
            w.writerow([int(la), int(lb), repr(cmap.rate(int(la), int(lb)))])
    return buf.getvalue()


def map_to_heatmap(cmap: OamJointCoincidenceMap) -> np.ndarray:
    """8-bit image of the map, linearly scaled so the maximum is 255.

    Rows run over lA and columns over lB, both ascending.
    """
    peak = cmap.rates.max()
    if peak <= 0:
        return np.zeros(cmap.rates.shape, dtype=np.uint8)
    return np.floor(cmap.rates / peak * 255.0 + 0.5).astype(np.uint8)
