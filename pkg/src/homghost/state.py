"""Two-photon states over (port, pixel, timebin) modes.

A :class:`BiphotonState` stores the amplitude of each normalised two-photon
Fock state, keyed by the sorted pair of occupied modes. A key with both modes
equal is a doubly occupied mode (a bunched term such as two photons leaving
the same port at the same pixel). Linear optics acts on creation operators,
so every mode transformation goes through the polynomial form, where the
doubly occupied coefficient carries the extra factor of sqrt(2).
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .grid import PixelCoord, PixelGrid, RotationOp, permutation_map

PORT_A = "A"
PORT_B = "B"
PROMPT = "prompt"
DELAYED = "delayed"

PRUNE_TOL = 1e-15
NORM_TOL = 1e-10

PIPELINES = ("no_bs", "hom", "bs_delayed")


class Mode(NamedTuple):
    port: str
    pixel: PixelCoord
    timebin: str = PROMPT


Pair = tuple[Mode, Mode]


def _pair(m1: Mode, m2: Mode) -> Pair:
    return (m1, m2) if m1 <= m2 else (m2, m1)


@dataclass(frozen=True)
class SpdcProfile:
    """Generation amplitudes c(r) at the crystal plane.

    ``kind`` is ``"uniform"``, ``"gaussian"`` (needs ``waist`` in pixels) or
    ``"custom"`` (explicit per-pixel ``weights`` of shape grid.shape, possibly
    complex).
    """

    kind: str = "uniform"
    waist: float | None = None
    weights: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("uniform", "gaussian", "custom"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "gaussian" and (self.waist is None or not self.waist > 0):
            raise ValueError("gaussian profile needs waist > 0")
        if self.kind == "custom" and self.weights is None:
            raise ValueError("custom profile needs weights")

    def amplitudes(self, grid: PixelGrid) -> np.ndarray:
        """Normalised c(r) as a complex array of shape ``grid.shape``."""
        if self.kind == "uniform":
            c = np.ones(grid.shape, dtype=complex)
        elif self.kind == "gaussian":
            ys, xs = np.mgrid[0 : grid.height, 0 : grid.width].astype(float)
            cx, cy = grid.center
            c = np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / self.waist**2).astype(complex)
        else:
            c = np.asarray(self.weights, dtype=complex)
            if c.shape != grid.shape:
                raise ValueError(f"weights shape {c.shape} does not match grid {grid.shape}")
        norm = math.sqrt(float(np.sum(np.abs(c) ** 2)))
        if norm == 0.0:
            raise ValueError("profile is identically zero")
        return c / norm

    def to_dict(self) -> dict:
        return {"kind": self.kind, "waist": self.waist}


@dataclass(frozen=True)
class BiphotonState:
    grid: PixelGrid
    terms: dict[Pair, complex]

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def is_empty(self) -> bool:
        return not self.terms

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def amplitude(self, m1: Mode, m2: Mode) -> complex:
        return self.terms.get(_pair(m1, m2), 0j)

    def normalized(self) -> BiphotonState:
        n2 = self.norm2()
        if n2 == 0.0:
            return BiphotonState(self.grid, {})
        s = 1.0 / math.sqrt(n2)
        return BiphotonState(self.grid, _prune({k: a * s for k, a in self.terms.items()}))

    def coincidence_terms(self) -> dict[Pair, complex]:
        """Terms with one photon in each port."""
        return {k: a for k, a in self.terms.items() if k[0].port != k[1].port}


def _prune(terms: dict[Pair, complex]) -> dict[Pair, complex]:
    return {k: a for k, a in terms.items() if abs(a) >= PRUNE_TOL}


def _transform(state: BiphotonState, mode_map: Callable[[Mode], list[tuple[Mode, complex]]]) -> dict[Pair, complex]:
    """Apply a linear substitution a+_m -> sum_k u_k a+_k to every term."""
    sqrt2 = math.sqrt(2.0)
    poly: dict[Pair, complex] = {}
    cache: dict[Mode, list[tuple[Mode, complex]]] = {}
    for (m1, m2), amp in state.terms.items():
        coeff = amp / sqrt2 if m1 == m2 else amp
        out1 = cache.get(m1)
        if out1 is None:
            out1 = cache[m1] = mode_map(m1)
        out2 = cache.get(m2)
        if out2 is None:
            out2 = cache[m2] = mode_map(m2)
        for k1, u1 in out1:
            for k2, u2 in out2:
                key = _pair(k1, k2)
                poly[key] = poly.get(key, 0j) + coeff * u1 * u2
    return _prune({k: (p * sqrt2 if k[0] == k[1] else p) for k, p in poly.items()})


def spdc_position_state(grid: PixelGrid, profile: SpdcProfile | None = None) -> BiphotonState:
    """sum_r c(r) |r>_A |r>_B over every pixel of ``grid``."""
    profile = profile or SpdcProfile()
    c = profile.amplitudes(grid)
    terms = {}
    for p in grid.pixels():
        terms[_pair(Mode(PORT_A, p), Mode(PORT_B, p))] = complex(c[p.y, p.x])
    return BiphotonState(grid, _prune(terms))


def apply_dove_rotation(state: BiphotonState, theta: float) -> BiphotonState:
    """Rotate every port-A pixel by 2 * ``theta`` about the grid centre.

    Terms whose rotated pixel leaves the grid are lost and the rest is
    renormalised.
    """
    grid = state.grid
    pm = permutation_map(grid, RotationOp.from_dove_angle(grid, theta))

    def mode_map(m: Mode) -> list[tuple[Mode, complex]]:
        if m.port != PORT_A:
            return [(m, 1.0)]
        q = pm.target(m.pixel)
        if not grid.contains(q):
            return []
        return [(Mode(PORT_A, q, m.timebin), 1.0)]

    return BiphotonState(grid, _transform(state, mode_map)).normalized()


def apply_beamsplitter(state: BiphotonState, t_amp: float = 1 / math.sqrt(2), r_amp: float = 1 / math.sqrt(2)) -> BiphotonState:
    """|r>_A -> t|r>_A + r|r>_B and |r>_B -> t|r>_B - r|r>_A, pixel and timebin kept."""
    if abs(t_amp**2 + r_amp**2 - 1.0) > 1e-12:
        raise ValueError(f"beamsplitter not unitary: t^2 + r^2 = {t_amp**2 + r_amp**2}")

    def mode_map(m: Mode) -> list[tuple[Mode, complex]]:
        a = Mode(PORT_A, m.pixel, m.timebin)
        b = Mode(PORT_B, m.pixel, m.timebin)
        if m.port == PORT_A:
            return [(a, t_amp), (b, r_amp)]
        return [(b, t_amp), (a, -r_amp)]

    return BiphotonState(state.grid, _transform(state, mode_map)).normalized()


def beamsplitter_amplitudes(transmission: float) -> tuple[float, float]:
    """(t, r) amplitudes for an intensity transmission fraction t^2."""
    if not 0.0 <= transmission <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {transmission}")
    return math.sqrt(transmission), math.sqrt(1.0 - transmission)


def apply_path_delay(state: BiphotonState) -> BiphotonState:
    """Move every port-B photon to the delayed timebin (distinguishable from A)."""

    def mode_map(m: Mode) -> list[tuple[Mode, complex]]:
        if m.port == PORT_B:
            return [(Mode(PORT_B, m.pixel, DELAYED), 1.0)]
        return [(m, 1.0)]

    return BiphotonState(state.grid, _transform(state, mode_map))


def postselect_coincidences(state: BiphotonState) -> tuple[BiphotonState, float]:
    """Keep one-photon-per-port terms.

    Returns the renormalised state and the retained probability mass. When
    nothing survives the state is empty (``state.is_empty``) and the mass is
    the (sub-threshold) weight that was discarded from the coincidence ports.
    """
    kept = state.coincidence_terms()
    mass = float(sum(abs(a) ** 2 for a in kept.values())) / max(state.norm2(), 1e-300)
    return BiphotonState(state.grid, kept).normalized(), mass


def hom_state_closed_form(
    grid: PixelGrid,
    profile: SpdcProfile | None,
    theta: float,
    t_amp: float = 1 / math.sqrt(2),
    r_amp: float = 1 / math.sqrt(2),
) -> BiphotonState:
    """Post-selected HOM state written with all rotation dependence on photon B.

    Builds K sum_r |r>_A [t^2 sum_{s: Rs=r} c(s)|s>_B - r^2 c(r)|Rr>_B]
    directly. The inner sum runs over the preimage of r under the pixel
    assignment, which is the single pixel R^-1 r whenever R permutes the
    grid; for such rotations and a rotation-invariant c this is exactly the
    familiar c(r)|r>_A(|R^-1 r>_B - |R r>_B).
    """
    profile = profile or SpdcProfile()
    c = profile.amplitudes(grid)
    pm = permutation_map(grid, RotationOp.from_dove_angle(grid, theta))
    inside = pm.inside
    t2, r2 = t_amp * t_amp, r_amp * r_amp
    terms: dict[Pair, complex] = {}

    def add(key: Pair, amp: complex):
        terms[key] = terms.get(key, 0j) + amp

    for q, sources in pm.fibers().items():
        for s in sources:
            add(_pair(Mode(PORT_A, q), Mode(PORT_B, s)), t2 * complex(c[s.y, s.x]))
    for p in grid.pixels():
        if inside[p.y, p.x]:
            add(_pair(Mode(PORT_A, p), Mode(PORT_B, pm.target(p))), -r2 * complex(c[p.y, p.x]))
    return BiphotonState(grid, _prune(terms)).normalized()


@dataclass(frozen=True)
class SinglePhotonState:
    grid: PixelGrid
    amplitudes: np.ndarray

    @property
    def is_zero(self) -> bool:
        return not np.any(self.amplitudes)

    def scaled(self, factor: float) -> SinglePhotonState:
        return SinglePhotonState(self.grid, self.amplitudes * factor)


def project_object(state: BiphotonState, obj: np.ndarray) -> SinglePhotonState:
    """Mask port A with the binary object and return photon B's amplitudes.

    The mask acts as the projector sum_r O(r)|r><r|_A, so the squared
    amplitudes are joint probabilities (A transmitted, B at pixel). Timebins
    are not resolved by the detection: amplitudes landing on the same B pixel
    add coherently whatever their timebin. Bunched terms never produce a
    coincidence and are ignored. An all-black object gives a zero state.
    """
    grid = state.grid
    obj = np.asarray(obj)
    if obj.shape != grid.shape:
        raise ValueError(f"object shape {obj.shape} does not match grid {grid.shape}")
    out = np.zeros(grid.shape, dtype=complex)
    for (m1, m2), amp in state.terms.items():
        if m1.port == m2.port:
            continue
        a, b = (m1, m2) if m1.port == PORT_A else (m2, m1)
        if obj[a.pixel.y, a.pixel.x]:
            out[b.pixel.y, b.pixel.x] += amp
    return SinglePhotonState(grid, out)


def intensity_image(sp: SinglePhotonState) -> np.ndarray:
    """|amplitude|^2 scaled so the brightest pixel is 1; zero state -> zeros."""
    img = np.abs(sp.amplitudes) ** 2
    peak = img.max() if img.size else 0.0
    if peak == 0.0:
        return np.zeros(sp.grid.shape)
    return img / peak


def prepare_state(
    grid: PixelGrid,
    profile: SpdcProfile | None,
    theta: float,
    pipeline: str,
    t_amp: float = 1 / math.sqrt(2),
    r_amp: float = 1 / math.sqrt(2),
) -> tuple[BiphotonState, float]:
    """Run the source -> Dove -> (delay) -> (BS + post-selection) chain.

    Returns the state at the SLM plane and the probability that a pair
    survives to it (1 without a beamsplitter).
    """
    if pipeline not in PIPELINES:
        raise ValueError(f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")
    state = apply_dove_rotation(spdc_position_state(grid, profile), theta)
    if pipeline == "no_bs":
        return state, 1.0
    if pipeline == "bs_delayed":
        state = apply_path_delay(state)
    return postselect_coincidences(apply_beamsplitter(state, t_amp, r_amp))


def conditional_state(
    grid: PixelGrid,
    obj: np.ndarray,
    profile: SpdcProfile | None,
    theta: float,
    pipeline: str,
    t_amp: float = 1 / math.sqrt(2),
    r_amp: float = 1 / math.sqrt(2),
) -> SinglePhotonState:
    """Photon-B amplitudes per emitted pair for the given object and pipeline."""
    state, mass = prepare_state(grid, profile, theta, pipeline, t_amp, r_amp)
    return project_object(state, obj).scaled(math.sqrt(mass))


def phase_aligned(state: BiphotonState) -> dict[Pair, complex]:
    """Terms multiplied by the phase that makes the largest amplitude real positive."""
    if state.is_empty:
        return {}
    key = max(state.terms, key=lambda k: (abs(state.terms[k]), k))
    ph = cmath.exp(-1j * cmath.phase(state.terms[key]))
    return {k: a * ph for k, a in state.terms.items()}


def max_amplitude_difference(a: BiphotonState, b: BiphotonState) -> float:
    """Largest per-term difference after global-phase alignment."""
    ta, tb = phase_aligned(a), phase_aligned(b)
    keys = set(ta) | set(tb)
    return max((abs(ta.get(k, 0j) - tb.get(k, 0j)) for k in keys), default=0.0)


def states_close(a: BiphotonState, b: BiphotonState, atol: float = 1e-10) -> bool:
    return max_amplitude_difference(a, b) <= atol


def _mode_to_dict(m: Mode) -> dict:
    return {"port": m.port, "x": m.pixel.x, "y": m.pixel.y, "timebin": m.timebin}


def _mode_from_dict(d: dict) -> Mode:
    return Mode(d["port"], PixelCoord(int(d["x"]), int(d["y"])), d.get("timebin", PROMPT))


STATE_FORMAT_VERSION = 1


def state_to_json(state: BiphotonState, profile: SpdcProfile | None = None) -> str:
    doc = {
        "version": STATE_FORMAT_VERSION,
        "grid": {"width": state.grid.width, "height": state.grid.height, "center": list(state.grid.center)},
        "profile": profile.to_dict() if profile is not None else None,
        "terms": [
            {"modeA": _mode_to_dict(k[0]), "modeB": _mode_to_dict(k[1]), "re": a.real, "im": a.imag}
            for k, a in sorted(state.terms.items())
        ],
    }
    return json.dumps(doc, indent=1)


def state_from_json(text: str) -> BiphotonState:
    doc = json.loads(text)
    if doc.get("version") != STATE_FORMAT_VERSION:
        raise ValueError(f"unsupported state document version {doc.get('version')!r}")
    g = doc["grid"]
    grid = PixelGrid(int(g["width"]), int(g["height"]), tuple(g["center"]))
    terms = {}
    for t in doc["terms"]:
        terms[_pair(_mode_from_dict(t["modeA"]), _mode_from_dict(t["modeB"]))] = complex(t["re"], t["im"])
    return BiphotonState(grid, terms)

