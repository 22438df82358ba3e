"""Batch runs behind the command-line subcommands.

Each run is a pure function of its resolved config: no timestamps, no host
details, and the worker count is kept out of the manifest, so repeated runs
write byte-identical files.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig
from .detection import mix_visibility
from .formats import pgm_bytes, read_mask, records_csv, write_json, write_pgm, write_text
from .grid import PixelGrid, make_grid
from .objects import builtin_object
from .oam import hom_filter_pass, lorentzian_spectrum, map_to_csv, map_to_heatmap, spiral_bandwidth_map
from .protocols import (
    CoincidenceRecord,
    ReconstructedImage,
    double_image_lobes,
    make_records,
    measure,
    pearson,
    predicted_image,
    random_masks,
    raster_masks,
    reconstruct_random_mask,
    reconstruct_single_pixel,
)
from .state import SpdcProfile, beamsplitter_amplitudes, prepare_state, project_object
from .symmetry import invariance_trials

log = logging.getLogger(__name__)


@dataclass
class GhostRun:
    config: ExperimentConfig
    grid: PixelGrid
    obj: np.ndarray
    probs: np.ndarray
    records: list[CoincidenceRecord]
    image: ReconstructedImage
    retained_mass: float
    masks: object


def build_grid(cfg: ExperimentConfig) -> PixelGrid:
    g = cfg.doc["grid"]
    return make_grid(g["width"], g["height"], tuple(g["center"]) if g["center"] is not None else None)


def build_object(cfg: ExperimentConfig, grid: PixelGrid) -> np.ndarray:
    o = cfg.doc["object"]
    if o["path"] is not None:
        obj = read_mask(o["path"])
        if obj.shape != grid.shape:
            raise ConfigError(f"object {o['path']} is {obj.shape[1]}x{obj.shape[0]}, grid is {grid.width}x{grid.height}")
        return obj
    return builtin_object(o["name"], grid, o["size"], tuple(o["offset"]))


def build_profile(cfg: ExperimentConfig) -> SpdcProfile:
    p = cfg.doc["profile"]
    return SpdcProfile(p["kind"], float(p["waist"]) if p["waist"] is not None else None)


def build_masks(cfg: ExperimentConfig, grid: PixelGrid):
    s = cfg.doc["scan"]
    if s["kind"] == "raster":
        return raster_masks(grid, s["block"])
    return random_masks(grid, s["n"], float(s["fill"]), s["seed"])


def _probabilities(cfg, grid, obj, masks, workers) -> tuple[np.ndarray, float]:
    profile = build_profile(cfg)
    t, r = beamsplitter_amplitudes(float(cfg.doc["beamsplitter"]["transmission"]))
    coherent = cfg.doc["projection"] == "coherent"

    def rates(pipeline: str) -> tuple[np.ndarray, float]:
        state, mass = prepare_state(grid, profile, cfg.theta, pipeline, t, r)
        sp = project_object(state, obj).scaled(math.sqrt(mass))
        return measure(sp, masks, coherent, workers), mass

    probs, mass = rates(cfg.pipeline)
    vis = cfg.detection.visibility
    if cfg.pipeline == "hom" and vis < 1.0:
        delayed, dmass = rates("bs_delayed")
        probs = mix_visibility(probs, delayed, vis)
        mass = vis * mass + (1.0 - vis) * dmass
    return probs, mass


def simulate(cfg: ExperimentConfig, workers: int = 1) -> GhostRun:
    grid = build_grid(cfg)
    obj = build_object(cfg, grid)
    masks = build_masks(cfg, grid)
    det = cfg.detection
    probs, mass = _probabilities(cfg, grid, obj, masks, workers)
    records = make_records(probs, det)
    if cfg.doc["scan"]["kind"] == "raster":
        image = reconstruct_single_pixel(records, masks, det.poisson, workers)
    else:
        image = reconstruct_random_mask(records, masks, det.poisson, workers)
    return GhostRun(cfg, grid, obj, probs, records, image, mass, masks)


def _manifest(cfg: ExperimentConfig, extra: dict) -> dict:
    doc = {"tool": "homghost", "version": __version__, "config": cfg.doc}
    doc.update(extra)
    return doc


def run_ghost(cfg: ExperimentConfig, workers: int = 1) -> dict[str, Path]:
    """Simulate one ghost-imaging run and write PGM, records CSV and sidecar JSON."""
    run = simulate(cfg, workers)
    out = cfg.output
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg.file_stem("ghost")
    s = cfg.doc["scan"]
    paths = {
        "image": write_pgm(out / f"{stem}.pgm", run.image.clamped),
        "records": write_text(out / f"{stem}_records.csv", records_csv(run.records)),
    }
    paths["sidecar"] = write_json(
        out / f"{stem}.json",
        _manifest(
            cfg,
            {
                "n": run.image.n,
                "cbar": run.image.cbar,
                "seed": s["seed"] if s["kind"] == "random" else cfg.doc["detection"]["seed"],
                "N": len(run.masks),
                "fill": float(run.masks.fill),
                "theta": cfg.theta,
                "pipeline": cfg.pipeline,
                "retained_mass": run.retained_mass,
                "image": paths["image"].name,
                "records": paths["records"].name,
            },
        ),
    )
    log.info("wrote %s", paths["image"])
    return paths


def run_spiral(
    out: Path, lmax: int = 15, width: float = 7.0, theta: float = math.pi / 4, filter_on: bool = True
) -> dict[str, Path]:
    """Joint OAM coincidence map as CSV, PGM heatmap and sidecar."""
    if lmax < 0:
        raise ConfigError("lmax must be >= 0")
    if not width > 0:
        raise ConfigError("spectrum width must be > 0")
    if lmax > 64:
        raise ConfigError("lmax above 64 is not supported")
    spec = lorentzian_spectrum(lmax, width)
    cmap = spiral_bandwidth_map(spec, theta, filter_on)
    _, p_pass = hom_filter_pass(spec, theta)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    mrad = int(math.floor(theta * 1000.0 + 0.5))
    stem = f"spiral_{'filtered' if filter_on else 'unfiltered'}_t{mrad}mrad_l{lmax}"
    paths = {
        "csv": write_text(out / f"{stem}.csv", map_to_csv(cmap)),
        "heatmap": write_pgm(out / f"{stem}.pgm", map_to_heatmap(cmap)),
    }
    paths["sidecar"] = write_json(
        out / f"{stem}.json",
        {
            "tool": "homghost",
            "version": __version__,
            "lmax": lmax,
            "width": width,
            "theta": theta,
            "filter": filter_on,
            "pass_probability": p_pass if filter_on else 1.0,
        },
    )
    return paths


SUMMARY_PANELS = (
    ("b", "no_bs", False),  # neither Dove rotation nor beamsplitter
    ("c", "no_bs", True),
    ("d", "hom", True),
    ("e", "bs_delayed", True),
)


def run_summary(cfg: ExperimentConfig, workers: int = 1) -> dict[str, Path]:
    """Object plus the four reconstructions: plain, rotated, HOM, delayed."""
    theta = cfg.theta
    out = cfg.output
    out.mkdir(parents=True, exist_ok=True)
    mrad = int(math.floor(theta * 1000.0 + 0.5))
    stem = f"summary_t{mrad}mrad"
    grid = build_grid(cfg)
    paths = {"a": write_pgm(out / f"{stem}_a_object.pgm", build_object(cfg, grid))}
    panels, images = {}, {}
    for label, pipeline, rotated in SUMMARY_PANELS:
        pcfg = cfg.with_overrides({"pipeline": pipeline, "theta": theta if rotated else 0.0})
        run = simulate(pcfg, workers)
        img = run.image.clamped
        images[label] = img
        paths[label] = write_pgm(out / f"{stem}_{label}_{pipeline}.pgm", img)
        pred = predicted_image(run.obj, pcfg.theta, pipeline, grid.center, build_profile(pcfg))
        panels[label] = {
            "pipeline": pipeline,
            "theta": pcfg.theta,
            "retained_mass": run.retained_mass,
            "pearson_vs_prediction": pearson(img, pred) if img.any() and pred.any() else None,
            "empty": not bool(img.any()),
        }
    extra = {
        "panels": panels,
        "d_equals_e": bool(np.array_equal(pgm_bytes(images["d"]), pgm_bytes(images["e"]))),
    }
    if abs(abs(2.0 * theta) - math.pi / 2) < 1e-12 and cfg.doc["scan"]["kind"] == "raster":
        extra["double_image"] = double_image_lobes(images["c"], images["d"], grid.center)
    paths["sidecar"] = write_json(out / f"{stem}.json", _manifest(cfg, extra))
    return paths


def run_animation(cfg: ExperimentConfig, stride: int, workers: int = 1) -> dict[str, Path]:
    """Frames of the random-mask reconstruction after every ``stride`` masks."""
    if cfg.doc["scan"]["kind"] != "random":
        raise ConfigError("animation needs a random-mask scan")
    if stride < 1:
        raise ConfigError("frame stride must be >= 1")
    run = simulate(cfg, workers)
    det = cfg.detection
    n_total = len(run.masks)
    out = cfg.output / f"{cfg.file_stem('animate')}_frames"
    out.mkdir(parents=True, exist_ok=True)
    s = cfg.doc["scan"]
    final = run.image.clamped
    frames, paths = [], {}
    for j, m in enumerate(list(range(stride, n_total, stride)) + [n_total], start=1):
        prefix = random_masks(run.grid, m, float(s["fill"]), s["seed"])
        img = reconstruct_random_mask(run.records[:m], prefix, det.poisson, workers).clamped
        p = write_pgm(out / f"frame_{j:04d}.pgm", img)
        paths[f"frame_{j:04d}"] = p
        frames.append({"frame": j, "masks": m, "file": p.name, "pearson_vs_final": pearson(img, final)})
    paths["sidecar"] = write_json(out / "frames.json", _manifest(cfg, {"stride": stride, "frames": frames}))
    return paths


def verify_symmetry(trials: int = 1000, seed: int = 0) -> dict:
    return invariance_trials(trials, (2, 3, 4, 8), seed)


def random_mask_fidelity(
    obj: np.ndarray,
    theta: float,
    pipeline: str,
    n: int,
    fill: float = 0.5,
    seed: int = 0,
    workers: int = 1,
) -> float:
    """Pearson correlation of a noiseless random-mask reconstruction with the
    closed-form image for the same object, angle and pipeline."""
    obj = np.asarray(obj)
    grid = make_grid(obj.shape[1], obj.shape[0])
    state, mass = prepare_state(grid, None, theta, pipeline)
    sp = project_object(state, obj).scaled(math.sqrt(mass))
    masks = random_masks(grid, n, fill, seed)
    probs = measure(sp, masks, True, workers)
    records = [CoincidenceRecord(i, float(p)) for i, p in enumerate(probs)]
    image = reconstruct_random_mask(records, masks, False, workers)
    return pearson(image.values, predicted_image(obj, theta, pipeline, grid.center))
