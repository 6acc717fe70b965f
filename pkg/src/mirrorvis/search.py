"""Parametric shape families and derivative-free search over them.

The objective is reduced resistance at a prescribed reduced volume.  Every
evaluation in a run reuses the same seed, so the Monte Carlo objective is a
fixed deterministic function of the parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .billiard import Scene
from .bounds import SIGMAS, BoundReport, SoundnessAlarm, for1_bound, theorem2_bound
from .catalog import ring_of_discs
from .constants import ball_volume
from .estimators import mean_resistance, reduced_quantities
from .geometry import Ball, Body, Difference, Polygon, Union
from .sampling import stream_generator


@dataclass(frozen=True)
class Family:
    """Shapes ``build(theta)`` for ``theta`` in the box ``[lo, hi]``.

    ``kappa(theta)`` is the analytic reduced volume and ``pin_index`` names
    the parameter that is solved for when a target reduced volume is given
    (the reduced volume must be monotone in it).
    """

    name: str
    dim: int
    params: tuple
    lo: tuple
    hi: tuple
    build: Callable = field(repr=False)
    volume: Callable = field(repr=False)
    kappa: Callable = field(repr=False)
    pin_index: Optional[int] = None

    def pin(self, theta, kappa_target: float, tol: float = 1e-13):
        """Adjust the pinned parameter so ``kappa(theta) == kappa_target``."""
        theta = np.array(theta, dtype=float)
        if self.pin_index is None:
            if abs(self.kappa(theta) - kappa_target) > 1e-9:
                raise ValueError(f"{self.name} cannot reach kappa={kappa_target}")
            return theta
        i = self.pin_index
        lo, hi = self.lo[i], self.hi[i]

        def k_at(x):
            t = theta.copy()
            t[i] = x
            return self.kappa(t)

        klo, khi = k_at(lo), k_at(hi)
        if not min(klo, khi) - 1e-15 <= kappa_target <= max(klo, khi) + 1e-15:
            raise ValueError(f"kappa={kappa_target} out of reach for {self.name}")
        increasing = khi > klo
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if (k_at(mid) < kappa_target) == increasing:
                lo = mid
            else:
                hi = mid
            if hi - lo < tol:
                break
        theta[i] = 0.5 * (lo + hi)
        return theta


def _disc_radius(d):
    def build(t):
        return Body(d, Ball((0.0,) * d, t[0]))

    return Family("disc-radius" if d == 2 else "ball-radius", d, ("r",),
                  (0.1,), (2.0,), build,
                  lambda t: ball_volume(d) * t[0] ** d, lambda t: 1.0)


def _concentric(d):
    def build(t):
        rho = t[0]
        outer = Ball((0.0,) * d, 1.0)
        if rho <= 0:
            return Body(d, outer)
        return Body(d, Difference(outer, Ball((0.0,) * d, rho)))

    name = "disc-minus-concentric-disc" if d == 2 else "ball-minus-concentric-ball"
    return Family(name, d, ("rho",), (0.0,), (0.95,), build,
                  lambda t: ball_volume(d) * (1 - t[0] ** d),
                  lambda t: 1 - t[0] ** d, pin_index=0)


def _ring(k):
    # the box keeps neighbours apart, (1 - rho) sin(pi/k) >= rho, and the
    # central disc inside the hole, q rho <= rho <= 1 - 2 rho
    s = math.sin(math.pi / k)
    rho_max = min(s / (1 + s), 1 / 3)

    def build(t):
        rho, q = t
        if (1 - rho) * s < rho * (1 - 1e-12) or q * rho > 1 - 2 * rho + 1e-12:
            raise ValueError("discs overlap")
        return ring_of_discs(k, rho, q)

    return Family(f"ring-of-{k}-discs", 2, ("rho", "center_ratio"),
                  (0.02, 0.0), (rho_max, 1.0), build,
                  lambda t: math.pi * t[0] ** 2 * (k + t[1] ** 2),
                  lambda t: t[0] ** 2 * (k + t[1] ** 2), pin_index=0)


def _wedge(angle, half, reach=1.5):
    far = reach / math.cos(half)
    return Polygon(((0.0, 0.0),
                    (far * math.cos(angle - half), far * math.sin(angle - half)),
                    (far * math.cos(angle + half), far * math.sin(angle + half))))


def _slits(k):
    def build(t):
        rho, w = t
        if k * w >= math.pi:
            raise ValueError("slits cover the annulus")
        base = Ball((0.0, 0.0), 1.0)
        if rho > 0:
            base = Difference(base, Ball((0.0, 0.0), rho))
        cuts = Union(tuple(_wedge(2 * math.pi * j / k, w) for j in range(k)))
        return Body(2, Difference(base, cuts))

    # neighbouring wedges never meet
    return Family(f"annulus-with-{k}-slits", 2, ("rho", "half_width"),
                  (0.0, 0.005), (0.95, min(0.35, 0.9 * math.pi / k)), build,
                  lambda t: (1 - t[0] ** 2) * (math.pi - k * t[1]),
                  lambda t: (1 - t[0] ** 2) * (1 - k * t[1] / math.pi), pin_index=0)


def family(name: str, k: int = 3, d: int = 2) -> Family:
    if name in ("disc-radius", "ball-radius"):
        return _disc_radius(3 if name == "ball-radius" else d)
    if name in ("disc-minus-concentric-disc", "ball-minus-concentric-ball"):
        return _concentric(3 if name.startswith("ball") else d)
    if name == "ring-of-discs":
        return _ring(k)
    if name == "annulus-with-slits":
        return _slits(k)
    raise ValueError(f"unknown family {name!r}")


FAMILIES = ("disc-radius", "ball-radius", "disc-minus-concentric-disc",
            "ball-minus-concentric-ball", "ring-of-discs", "annulus-with-slits")


# ---------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class Evaluation:
    theta: tuple
    valid: bool
    kappa: float = math.nan
    fhat: float = math.nan
    fhat_stderr: float = math.nan
    for1: float = math.nan
    theorem2_margin: float = math.nan
    trapped_fraction: float = math.nan
    error: str = ""


def evaluate(fam: Family, theta, n: int, seed: int, threads: int = 1) -> Evaluation:
    """Reduced volume and resistance of one member; raises
    :class:`SoundnessAlarm` if the cubic floor is broken."""
    theta = tuple(float(x) for x in theta)
    slack = 1e-12
    if any(not lo - slack <= x <= hi + slack for x, lo, hi in zip(theta, fam.lo, fam.hi)):
        return Evaluation(theta, False, error="outside the parameter box")
    try:
        body = fam.build(np.array(theta))
        scene = Scene(body)
    except ValueError as exc:
        return Evaluation(theta, False, error=str(exc))
    vol = fam.volume(np.array(theta))
    fres = mean_resistance(scene, n, seed, threads)
    red = reduced_quantities(fam.dim, vol, fres, scene.r0)
    floor = for1_bound(fam.dim, red.kappa)
    if red.fhat < floor - SIGMAS * red.fhat_stderr:
        raise SoundnessAlarm(f"{fam.name} at {theta}: reduced resistance {red.fhat} "
                             f"below the floor {floor}")
    t2 = theorem2_bound(fam.dim, vol, scene.r0)
    margin = float(fres.sigmas_from(t2))
    return Evaluation(theta, True, red.kappa, red.fhat, red.fhat_stderr, floor,
                      margin, fres.trapped_fraction)


def scan_family(fam: Family, grid, kappa_target: Optional[float] = None,
                n: int = 100_000, seed: int = 0, threads: int = 1):
    """Evaluate each grid point (pinned to ``kappa_target`` when given)."""
    grid = [np.atleast_1d(np.asarray(t, dtype=float)) for t in grid]
    if not grid:
        raise ValueError("grid must be nonempty")
    rows = []
    for theta in grid:
        if len(theta) != len(fam.params):
            raise ValueError(f"{fam.name} takes {len(fam.params)} parameter(s)")
        if kappa_target is not None:
            try:
                theta = fam.pin(theta, kappa_target)
            except ValueError as exc:
                rows.append(Evaluation(tuple(theta), False, error=str(exc)))
                continue
        rows.append(evaluate(fam, theta, n, seed, threads))
    return rows


@dataclass(frozen=True)
class SearchResult:
    theta: tuple
    fhat: float
    fhat_stderr: float
    kappa: float
    report: BoundReport
    converged: bool
    evaluations: int
    initial_fhat: float
    initial_stderr: float


def minimize_reduced_resistance(fam: Family, kappa_target: Optional[float], budget: int,
                                n: int, seed: int = 0, theta_init=None,
                                restarts: int = 3, threads: int = 1) -> SearchResult:
    """Nelder-Mead over the free parameters, restarted from random points
    of the box; returns the best member seen."""
    free = [i for i in range(len(fam.params))
            if kappa_target is None or i != fam.pin_index]
    if budget < len(free) + 2:
        raise ValueError(f"budget must be >= {len(free) + 2}")
    lo, hi = np.array(fam.lo), np.array(fam.hi)
    theta0 = 0.5 * (lo + hi) if theta_init is None else np.array(theta_init, dtype=float)
    cache = {}
    best = [None]

    def assemble(x):
        theta = theta0.copy()
        theta[free] = x
        if kappa_target is not None:
            theta = fam.pin(theta, kappa_target)
        return theta

    class Exhausted(Exception):
        pass

    def objective(x):
        try:
            theta = assemble(np.clip(x, lo[free], hi[free]))
        except ValueError:
            return 1e6
        key = tuple(theta)
        if key not in cache:
            if len(cache) >= budget:
                raise Exhausted
            ev = evaluate(fam, theta, n, seed, threads)
            cache[key] = ev
            if ev.valid and (best[0] is None or ev.fhat < best[0].fhat):
                best[0] = ev
        ev = cache[key]
        return ev.fhat if ev.valid else 1e6

    f_init = objective(theta0[free])
    init = cache[tuple(assemble(theta0[free]))] if cache else None
    converged = False
    rng = stream_generator(seed, 1 << 40)
    starts = [theta0[free]] + [rng.uniform(lo[free], hi[free]) for _ in range(restarts)]
    if not free:
        converged = True
        starts = []
    for x0 in starts:
        try:
            res = minimize(objective, x0, method="Nelder-Mead",
                           bounds=list(zip(lo[free], hi[free])),
                           options={"maxfev": budget, "xatol": 1e-4, "fatol": 1e-9})
            converged = bool(res.success)
        except Exhausted:
            converged = False
            break
    ev = best[0]
    if ev is None:
        raise ValueError(f"no valid member of {fam.name} found")
    report = BoundReport.judge("reduced_resistance", ev.fhat, ev.for1, ev.fhat_stderr,
                               seed=seed)
    return SearchResult(ev.theta, ev.fhat, ev.fhat_stderr, ev.kappa, report, converged,
                        len(cache), init.fhat if init and init.valid else f_init,
                        init.fhat_stderr if init and init.valid else math.nan)
