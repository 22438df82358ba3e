"""Command-line entry point: ``homghost <subcommand> [options]``.

Config precedence, lowest to highest: built-in defaults, ``--config`` JSON,
explicit flags. Exit status is 0 on success, 2 for configuration errors and
3 for runtime failures (including a failed symmetry verification).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from . import __version__, runner
from .config import ConfigError, ExperimentConfig, parse_angle
from .objects import BUILTIN_OBJECTS
from .state import PIPELINES

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--output", "-o", help="output directory")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--center", type=float, nargs=2, metavar=("X", "Y"), help="rotation centre in pixel units")
    p.add_argument("--object", dest="object_name", choices=BUILTIN_OBJECTS, help="built-in object")
    p.add_argument("--object-pgm", help="object bitmap (PGM, >= 128 is transparent)")
    p.add_argument("--object-size", type=int)
    p.add_argument("--object-offset", type=int, nargs=2, metavar=("DX", "DY"))
    p.add_argument("--theta", help="Dove prism angle, e.g. 0.3 or pi/8")
    p.add_argument("--pipeline", choices=PIPELINES)
    p.add_argument("--scan", choices=("raster", "random"))
    p.add_argument("--block", type=int, help="raster block size")
    p.add_argument("--masks", type=int, help="number of random masks")
    p.add_argument("--fill", type=float, help="random mask white fraction")
    p.add_argument("--seed", type=int, help="random mask seed")
    p.add_argument("--poisson", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--noise-seed", type=int, help="Poisson sampling seed")
    p.add_argument("--pair-rate", type=float)
    p.add_argument("--integration", type=float)
    p.add_argument("--visibility", type=float)
    p.add_argument("--transmission", type=float, help="beamsplitter intensity transmission t^2")
    p.add_argument("--profile", choices=("uniform", "gaussian"))
    p.add_argument("--waist", type=float)
    p.add_argument("--projection", choices=("coherent", "incoherent"))
    p.add_argument("--workers", type=int, default=1, help="threads for mask reductions")


def _overrides(a: argparse.Namespace) -> dict:
    o: dict = {}

    def put(path: str, value) -> None:
        if value is None:
            return
        node = o
        *head, last = path.split(".")
        for k in head:
            node = node.setdefault(k, {})
        node[last] = value

    put("output", a.output)
    put("grid.width", a.width)
    put("grid.height", a.height)
    put("grid.center", list(a.center) if a.center else None)
    put("object.name", a.object_name)
    put("object.path", a.object_pgm)
    put("object.size", a.object_size)
    put("object.offset", list(a.object_offset) if a.object_offset else None)
    put("theta", a.theta)
    put("pipeline", a.pipeline)
    put("scan.kind", a.scan)
    put("scan.block", a.block)
    put("scan.n", a.masks)
    put("scan.fill", a.fill)
    put("scan.seed", a.seed)
    put("detection.poisson", a.poisson)
    put("detection.seed", a.noise_seed)
    put("detection.pair_rate", a.pair_rate)
    put("detection.integration", a.integration)
    put("detection.visibility", a.visibility)
    put("beamsplitter.transmission", a.transmission)
    put("profile.kind", a.profile)
    put("profile.waist", a.waist)
    put("projection", a.projection)
    return o


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homghost", description="HOM-filtered ghost imaging simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("ghost", help="one reconstruction: PGM, records CSV, sidecar JSON")
    _experiment_flags(g)

    s = sub.add_parser("summary", help="object plus plain, rotated, HOM and delayed reconstructions")
    _experiment_flags(s)

    an = sub.add_parser("animate", help="random-mask reconstruction frames")
    _experiment_flags(an)
    an.add_argument("--stride", type=int, required=True, help="masks added per frame")

    sp = sub.add_parser("spiral", help="joint OAM coincidence map")
    sp.add_argument("--output", "-o", default="out")
    sp.add_argument("--lmax", type=int, default=15)
    sp.add_argument("--width", type=float, default=7.0, help="Lorentzian spectrum width in l")
    sp.add_argument("--theta", default="pi/4")
    sp.add_argument("--filter", action=argparse.BooleanOptionalAction, default=True)

    v = sub.add_parser("verify-symmetry", help="exchange symmetry under random basis changes")
    v.add_argument("--trials", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    return parser


def _run(a: argparse.Namespace) -> int:
    if a.command == "verify-symmetry":
        if a.trials < 1:
            raise ConfigError("--trials must be >= 1")
        res = runner.verify_symmetry(a.trials, a.seed)
        ok = res["preserved"] == res["trials"] and res["involution_exact"]
        print(json.dumps(res, sort_keys=True))
        return EXIT_OK if ok else EXIT_RUNTIME

    if a.command == "spiral":
        theta = parse_angle(a.theta)
        if not math.isfinite(theta):
            raise ConfigError("theta must be finite")
        paths = runner.run_spiral(a.output, a.lmax, a.width, theta, a.filter)
    else:
        if a.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg = ExperimentConfig.load(a.config, _overrides(a))
        if a.command == "ghost":
            paths = runner.run_ghost(cfg, a.workers)
        elif a.command == "summary":
            paths = runner.run_summary(cfg, a.workers)
        else:
            paths = runner.run_animation(cfg, a.stride, a.workers)
    for p in paths.values():
        print(p)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 for --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _run(a)
    except ConfigError as exc:
        print(f"homghost: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"homghost: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
