"""Command line front end: ``mirrorvis SUBCOMMAND [flags]``.

Every subcommand writes CSV (header row, floats with 17 significant
digits) to stdout or ``--output``.  Diagnostics go to stderr.  Exit codes:
0 success, 2 bad arguments or shape file, 3 a bound violated beyond 4
sigma, 1 anything else.

``MIRRORVIS_SEED`` and ``MIRRORVIS_THREADS`` supply ``--seed`` and
``--threads`` when the flags are absent.  Negative vector components need
the ``--v=-1,0`` form.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import traceback
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from . import __version__
from .billiard import STATUS_NAMES, Scene, law_from_name, trace_batch
from .bounds import VIOLATED, SoundnessAlarm, I_d, I_slope, c_d, verify_scene
from .catalog import SHIPPED
from .constants import ball_volume, sphere_area
from .estimators import angle_function, estimate_F, estimate_F_R
from .geometry import volume
from .search import FAMILIES, family, minimize_reduced_resistance, scan_family
from .shapefile import ShapeFileError, load

BUILD = f"v{__version__}"
SUBCOMMANDS = ("estimate", "verify", "constants", "scan", "search", "trace")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_ALARM = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _floats(text: str, what: str) -> tuple:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(x) for x in vals):
        raise UsageError(f"{what}: values must be finite")
    return vals


def _grid(text: str) -> tuple:
    pts = tuple(_floats(p, "--grid") for p in text.split(";") if p.strip())
    if not pts:
        raise UsageError("--grid is empty")
    return pts


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved invocation; ``to_argv`` gives the canonical flags."""

    subcommand: str
    shape: Optional[str] = None
    d: Optional[int] = None
    n: Optional[int] = None
    seed: Optional[int] = None
    radius: Optional[float] = None
    f: Optional[str] = None
    law: Optional[str] = None
    threads: Optional[int] = None
    family: Optional[str] = None
    k: Optional[int] = None
    grid: Optional[tuple] = None
    kappa: Optional[float] = None
    budget: Optional[int] = None
    init: Optional[tuple] = None
    v: Optional[tuple] = None
    xi: Optional[tuple] = None
    max_reflections: Optional[int] = None
    output: Optional[str] = None
    format: str = "csv"

    def to_argv(self) -> list:
        out = [self.subcommand]
        for fld in fields(self):
            name = fld.name
            val = getattr(self, name)
            if name in ("subcommand", "format") or val is None:
                continue
            flag = "--" + name.replace("_", "-")
            if name == "grid":
                text = ";".join(",".join(repr(x) for x in p) for p in val)
            elif isinstance(val, tuple):
                text = ",".join(repr(x) for x in val)
            else:
                text = repr(val) if isinstance(val, float) else str(val)
            out.append(f"{flag}={text}")
        return out


_DEFAULTS = {
    "estimate": dict(n=1_000_000, f="one-minus-cos", law="specular"),
    "verify": dict(n=1_000_000, law="specular"),
    "constants": dict(d=3),
    "scan": dict(n=100_000, k=3),
    "search": dict(n=100_000, k=3, budget=200),
    "trace": dict(law="specular", max_reflections=10_000),
}
_SEEDED = ("estimate", "verify", "scan", "search")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mirrorvis", description="Mirror-body visibility calculator.")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(sp, *names):
        opts = {
            "shape": dict(help="shape JSON file"),
            "n": dict(type=int, help="Monte Carlo samples"),
            "seed": dict(type=int, help="random seed (env MIRRORVIS_SEED)"),
            "threads": dict(type=int, help="worker threads (env MIRRORVIS_THREADS)"),
            "law": dict(help="specular | retro | pseudo:NAME (2D)"),
            "output": dict(help="write CSV here instead of stdout"),
            "k": dict(type=int, help="number of discs or slits"),
            "d": dict(type=int, help="dimension"),
            "kappa": dict(type=float, help="target reduced volume"),
        }
        for name in names:
            sp.add_argument("--" + name.replace("_", "-"), **opts[name])

    sp = sub.add_parser("estimate", help="visibility index of a shape")
    common(sp, "shape", "n", "seed", "threads", "law", "output")
    sp.add_argument("--f", help="one-minus-cos | power:c,kappa")
    sp.add_argument("--radius", type=float, help="background sphere radius (default: limit)")

    sp = sub.add_parser("verify", help="run all bound checks on a shape (default: catalog)")
    common(sp, "shape", "n", "seed", "threads", "law", "output")

    sp = sub.add_parser("constants", help="s_k, b_k, c_d and I_d tables")
    # serial commands accept --threads so any invocation can carry it
    common(sp, "d", "threads", "output")

    for name in ("scan", "search"):
        sp = sub.add_parser(name, help=f"{name} a shape family")
        common(sp, "n", "seed", "threads", "k", "d", "kappa", "output")
        sp.add_argument("--family", required=True, choices=FAMILIES)
        if name == "scan":
            sp.add_argument("--grid", required=True,
                            help="points separated by ';', components by ','")
        else:
            sp.add_argument("--budget", type=int, help="objective evaluations")
            sp.add_argument("--init", help="starting parameters, comma separated")

    sp = sub.add_parser("trace", help="polyline of one trajectory")
    common(sp, "shape", "law", "threads", "output")
    sp.add_argument("--v", required=True, help="unit velocity, comma separated")
    sp.add_argument("--xi", required=True, help="start point, comma separated")
    sp.add_argument("--max-reflections", type=int)
    return p


def _env_int(name):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {raw!r}") from None


def parse_config(argv, env=True) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    cmd = ns["subcommand"]
    vals = {k: v for k, v in ns.items() if v is not None}
    for key, val in _DEFAULTS[cmd].items():
        vals.setdefault(key, val)
    if cmd in _SEEDED:
        if "seed" not in vals:
            vals["seed"] = (_env_int("MIRRORVIS_SEED") if env else None) or 0
        if "threads" not in vals:
            vals["threads"] = (_env_int("MIRRORVIS_THREADS") if env else None) or 1
    if isinstance(vals.get("grid"), str):
        vals["grid"] = _grid(vals["grid"])
    for key in ("init", "v", "xi"):
        if isinstance(vals.get(key), str):
            vals[key] = _floats(vals[key], "--" + key)
    cfg = RunConfig(**vals)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if cfg.n is not None and cfg.n < 1:
        raise UsageError("--n must be >= 1")
    if cfg.seed is not None and cfg.seed < 0:
        raise UsageError("--seed must be >= 0")
    if cfg.threads is not None and cfg.threads < 1:
        raise UsageError("--threads must be >= 1")
    if cfg.d is not None and cfg.d < 2:
        raise UsageError("--d must be >= 2")
    if cfg.k is not None and cfg.k < 2:
        raise UsageError("--k must be >= 2")
    if cfg.subcommand in ("estimate", "trace") and cfg.shape is None:
        raise UsageError("--shape is required")
    if cfg.budget is not None and cfg.budget < 1:
        raise UsageError("--budget must be >= 1")
    if cfg.max_reflections is not None and cfg.max_reflections < 1:
        raise UsageError("--max-reflections must be >= 1")


# ---------------------------------------------------------------- commands


def _scene(cfg: RunConfig, path=None):
    body = load(path or cfg.shape)
    try:
        law = law_from_name(cfg.law)
        if cfg.law.startswith("pseudo:") and body.dim != 2:
            raise ValueError("pseudo-billiard laws are two dimensional")
        return Scene(body, law)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _estimate(cfg):
    scene = _scene(cfg)
    try:
        f = angle_function(cfg.f)
        if cfg.radius is not None and cfg.radius < scene.r0:
            raise ValueError(f"--radius must be >= r0 = {scene.r0!r}")
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    def run():
        if cfg.radius is None:
            return estimate_F(scene, f, cfg.n, cfg.seed, cfg.threads)
        return estimate_F_R(scene, cfg.radius, f, cfg.n, cfg.seed, cfg.threads)

    header = ["build", "shape", "dim", "law", "f", "radius", "r0", "seed", "n", "mean",
              "stderr", "n_effective", "trapped_fraction", "discarded_fraction"]

    def rows():
        est = run()
        radius = "inf" if cfg.radius is None else cfg.radius
        yield [BUILD, cfg.shape, scene.dim, cfg.law, cfg.f, radius, scene.r0, est.seed,
               cfg.n, est.mean, est.stderr, est.n_effective, est.trapped_fraction,
               est.discarded_fraction]

    return header, rows, None


def _verify(cfg):
    if cfg.shape is not None:
        targets = [(cfg.shape, _scene(cfg))]
    else:
        try:
            law = law_from_name(cfg.law)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        targets = [(name, Scene(build(), law)) for name, build in SHIPPED.items()
                   if name != "ball-with-cavity"]
    header = ["build", "shape", "seed", "n", "check", "lhs", "rhs", "stderr",
              "margin_sigmas", "verdict", "equality"]
    state = {"violated": False}

    def rows():
        for name, scene in targets:
            vol = volume(scene.body).mean
            for rep in verify_scene(scene, vol, cfg.n, cfg.seed, cfg.threads):
                state["violated"] |= rep.verdict == VIOLATED
                yield [BUILD, name, cfg.seed, cfg.n, rep.name, rep.lhs, rep.rhs, rep.stderr,
                       rep.margin_sigmas, rep.verdict, rep.equality]

    return header, rows, lambda: state["violated"]


def _constants(cfg):
    d = cfg.d
    header = ["build", "quantity", "d", "arg", "value"]

    def rows():
        for k in range(d + 1):
            yield [BUILD, "s", k, "", sphere_area(k)]
        for k in range(d + 1):
            yield [BUILD, "b", k, "", ball_volume(k)]
        yield [BUILD, "c_d(c=0.5,kappa=2)", d, "", c_d(d, 0.5, 2.0)]
        yield [BUILD, "I_slope", d, "", I_slope(d)]
        for j in range(1, 9):
            phi = j * math.pi / 8
            yield [BUILD, "I_d", d, phi, I_d(d, phi)]

    return header, rows, None


def _family(cfg):
    try:
        return family(cfg.family, k=cfg.k, d=cfg.d or 2)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _scan(cfg):
    fam = _family(cfg)
    for p in cfg.grid:
        if len(p) != len(fam.params):
            raise UsageError(f"{fam.name} takes {len(fam.params)} parameter(s) "
                             f"{fam.params}, got {len(p)}")
    header = ["build", "family", "seed", "n", "kappa_target", *fam.params, "valid", "kappa",
              "fhat", "fhat_stderr", "for1_bound", "theorem2_margin_sigmas",
              "trapped_fraction", "error"]

    def rows():
        target = "" if cfg.kappa is None else cfg.kappa
        for ev in scan_family(fam, cfg.grid, cfg.kappa, cfg.n, cfg.seed, cfg.threads):
            yield [BUILD, fam.name, cfg.seed, cfg.n, target, *ev.theta, ev.valid, ev.kappa,
                   ev.fhat, ev.fhat_stderr, ev.for1, ev.theorem2_margin,
                   ev.trapped_fraction, ev.error]

    return header, rows, None


def _search(cfg):
    fam = _family(cfg)
    if cfg.init is not None and len(cfg.init) != len(fam.params):
        raise UsageError(f"--init needs {len(fam.params)} value(s)")
    free = len(fam.params) - (cfg.kappa is not None and fam.pin_index is not None)
    if cfg.budget < free + 2:
        raise UsageError(f"--budget must be >= {free + 2}")
    header = ["build", "family", "seed", "n", "kappa_target", "budget", *fam.params, "kappa",
              "fhat", "fhat_stderr", "for1_bound", "verdict", "converged", "evaluations",
              "initial_fhat"]
    state = {"violated": False}

    def rows():
        res = minimize_reduced_resistance(fam, cfg.kappa, cfg.budget, cfg.n, cfg.seed,
                                          cfg.init, threads=cfg.threads)
        state["violated"] = res.report.verdict == VIOLATED
        target = "" if cfg.kappa is None else cfg.kappa
        yield [BUILD, fam.name, cfg.seed, cfg.n, target, cfg.budget, *res.theta, res.kappa,
               res.fhat, res.fhat_stderr, res.report.rhs, res.report.verdict, res.converged,
               res.evaluations, res.initial_fhat]

    return header, rows, lambda: state["violated"]


def _trace(cfg):
    scene = _scene(cfg)
    d = scene.dim
    v, xi = np.array(cfg.v), np.array(cfg.xi)
    if len(v) != d or len(xi) != d:
        raise UsageError(f"--v and --xi need {d} components")
    nv = np.linalg.norm(v)
    if not nv > 0:
        raise UsageError("--v must be nonzero")
    v = v / nv
    if abs(np.linalg.norm(xi - scene.c) - scene.sphere_radius) > 1e-9 * scene.sphere_radius:
        raise UsageError(f"--xi must lie on the sampling sphere (center "
                         f"{[float(x) for x in scene.c]}, radius {scene.sphere_radius!r})")
    if np.dot(v, xi - scene.c) > 0:
        raise UsageError("--v must point into the sampling sphere at --xi")
    header = ["x", "y", "z"][:d]

    def rows():
        out = trace_batch(scene, v[None], xi[None], cfg.max_reflections, record_paths=True)
        status = STATUS_NAMES.get(int(out.status[0]), "active")
        print(f"status={status} reflections={int(out.reflections[0])} "
              f"length={format(float(out.length[0]), '.17g')}", file=sys.stderr)
        for p in out.paths[0]:
            yield list(p)

    return header, rows, None


_COMMANDS = {"estimate": _estimate, "verify": _verify, "constants": _constants,
             "scan": _scan, "search": _search, "trace": _trace}


def render(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        header, rows, violated = _COMMANDS[cfg.subcommand](cfg)
    except (UsageError, ShapeFileError) as exc:
        print(f"mirrorvis: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        text = render(header, rows())
    except SoundnessAlarm as exc:
        print(f"mirrorvis: soundness alarm: {exc}", file=sys.stderr)
        return EXIT_ALARM
    except Exception:
        traceback.print_exc(file=sys.stderr)
        return EXIT_INTERNAL
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    if violated is not None and violated():
        print("mirrorvis: a bound was violated beyond 4 sigma", file=sys.stderr)
        return EXIT_ALARM
    return EXIT_OK


__all__ = ["RunConfig", "build_parser", "parse_config", "main", "render", "BUILD"]
