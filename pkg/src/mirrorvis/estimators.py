"""Monte Carlo estimates of visibility indices and mean resistance.

All estimators share one driver: the ``n`` samples are cut into fixed
blocks, block ``k`` draws from stream ``k`` of the seed, and per-block
``(sum, sum of squares, count)`` triples are merged in block order.  The
result is therefore identical for any number of worker threads, and two
calls with the same seed see the same incident rays (common random
numbers).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .billiard import MAX_REFLECTIONS, Scene, TraceBatch, deflection_angle, trace_batch
from .constants import ball_volume, sphere_area
from .sampling import PhaseSample, mu_total, sample_incoming, stream_generator
from .stats import Accumulator, Estimate, merge_all

BLOCK = 1 << 16


# ---------------------------------------------------------------- angle functions


class AngleFunction:
    """Monotone ``f: [0, pi] -> R`` with ``f(0) = 0``.

    ``c`` and ``kappa`` describe the small-angle behaviour ``c * phi**kappa``
    when known.
    """

    c: Optional[float] = None
    kappa: Optional[float] = None

    def __call__(self, theta):
        raise NotImplementedError

    def of_pair(self, v, w):
        """``f`` of the angle between the unit vectors in each row."""
        return self(deflection_angle(v, w))

    def spec(self) -> str:
        raise NotImplementedError


class OneMinusCos(AngleFunction):
    c, kappa = 0.5, 2.0

    def __call__(self, theta):
        return 2.0 * np.sin(np.asarray(theta, dtype=float) / 2.0) ** 2

    def of_pair(self, v, w):
        # 1 - <v, w> = |v - w|^2 / 2 for unit vectors, exact when v == w
        diff = np.atleast_2d(v) - np.atleast_2d(w)
        return 0.5 * np.einsum("ij,ij->i", diff, diff)

    def spec(self):
        return "one-minus-cos"

    def __repr__(self):
        return "OneMinusCos()"


@dataclass(frozen=True)
class PowerLaw(AngleFunction):
    c: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        if not (self.c > 0 and self.kappa > 0):
            raise ValueError("power law needs c > 0 and kappa > 0")

    def __call__(self, theta):
        return self.c * np.asarray(theta, dtype=float) ** self.kappa

    def spec(self):
        return f"power:{self.c!r},{self.kappa!r}"


@dataclass(frozen=True)
class Custom(AngleFunction):
    """Piecewise-linear table ``(angles, values)`` starting at ``(0, 0)``."""

    angles: tuple
    values: tuple

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float)
        f = np.asarray(self.values, dtype=float)
        if a.shape != f.shape or a.size < 2:
            raise ValueError("table needs matching angle and value lists")
        if a[0] != 0 or f[0] != 0 or a[-1] < math.pi:
            raise ValueError("table must start at (0, 0) and reach pi")
        if np.any(np.diff(a) <= 0) or np.any(np.diff(f) < 0):
            raise ValueError("table must be strictly increasing in angle and monotone")
        object.__setattr__(self, "angles", tuple(a))
        object.__setattr__(self, "values", tuple(f))

    def __call__(self, theta):
        return np.interp(theta, self.angles, self.values)

    def spec(self):
        return "custom"


def angle_function(spec: str) -> AngleFunction:
    """Parse ``one-minus-cos`` or ``power:c,kappa``."""
    if spec == "one-minus-cos":
        return OneMinusCos()
    if spec.startswith("power:"):
        try:
            c, k = (float(x) for x in spec[6:].split(","))
        except ValueError:
            raise ValueError(f"bad power spec {spec!r}; expected power:c,kappa") from None
        return PowerLaw(c, k)
    raise ValueError(f"unknown angle function {spec!r}")


# ---------------------------------------------------------------- driver


Integrand = Callable[[PhaseSample, TraceBatch], np.ndarray]


def _block_sizes(n):
    full, rest = divmod(n, BLOCK)
    return [BLOCK] * full + ([rest] if rest else [])


def simulate(scene: Scene, n: int, seed: int, integrand: Integrand,
             threads: int = 1, upper_value: Optional[float] = None,
             max_reflections: int = MAX_REFLECTIONS) -> Estimate:
    """Estimate ``integral integrand d mu`` over the incoming set.

    ``integrand`` receives each block's samples and trace results and
    returns one value per sample.  Samples that did not exit count as 0, or
    as ``upper_value`` when given (the upper bracket).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    d, R = scene.dim, scene.sphere_radius
    sizes = _block_sizes(n)

    def run(k):
        rng = stream_generator(seed, k)
        smp = sample_incoming(d, R, rng, sizes[k], scene.c)
        out = trace_batch(scene, smp.v, smp.xi, max_reflections)
        vals = np.zeros(len(smp))
        ok = out.exited
        if np.any(ok):
            vals = np.where(ok, integrand(smp, out), 0.0)
        if upper_value is not None:
            vals = np.where(ok, vals, upper_value)
        return Accumulator.from_values(
            vals, exited=int(ok.sum()),
            trapped=int(np.count_nonzero(out.status == 2)),
            discarded=int(np.count_nonzero(out.status == 3)))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            accs = list(pool.map(run, range(len(sizes))))
    else:
        accs = [run(k) for k in range(len(sizes))]
    est = merge_all(accs).estimate(mu_total(d, R), seed)
    if est.unreliable:
        warnings.warn(f"trapped fraction {est.trapped_fraction:.3g} exceeds "
                      "1%; estimate is unreliable", RuntimeWarning, stacklevel=2)
    return est


# ---------------------------------------------------------------- estimators


def estimate_F(scene: Scene, f: AngleFunction, n: int, seed: int = 0,
               threads: int = 1, upper_bracket: bool = False) -> Estimate:
    """Visibility index in the distant-background limit: the flux integral
    of ``f`` of the angle between incoming and outgoing velocities."""
    return simulate(scene, n, seed, lambda s, b: f.of_pair(s.v, b.v_plus),
                    threads, float(f(math.pi)) if upper_bracket else None)


def _straight_exit(smp: PhaseSample, R):
    from .billiard import sphere_exit

    t = sphere_exit(smp.xi, smp.v, smp.center, R)
    return smp.xi + t[:, None] * smp.v


def finite_radius_angle(smp: PhaseSample, batch: TraceBatch, R: float):
    """Angle at the centre between the exit point and the point where the
    undeflected half-line leaves the sphere."""
    a = (batch.xi_plus - smp.center) / R
    b = (_straight_exit(smp, R) - smp.center) / R
    return deflection_angle(a, b)


def estimate_F_R(scene: Scene, R: float, f: AngleFunction, n: int, seed: int = 0,
                 threads: int = 1, upper_bracket: bool = False) -> Estimate:
    """Visibility index with the background on the sphere of radius ``R``."""
    if R < scene.r0:
        raise ValueError("R must be >= r0")
    sc = scene.with_radius(R)
    return simulate(sc, n, seed, lambda s, b: f(finite_radius_angle(s, b, R)),
                    threads, float(f(math.pi)) if upper_bracket else None)


def mean_resistance(scene: Scene, n: int, seed: int = 0, threads: int = 1) -> Estimate:
    return estimate_F(scene, OneMinusCos(), n, seed, threads)


def convex_resistance(d: int, boundary_area: float) -> float:
    """Mean resistance of a convex body from its boundary area."""
    if not boundary_area > 0:
        raise ValueError("boundary area must be > 0")
    return 4.0 / (d + 1) * ball_volume(d - 1) * boundary_area


def resistance_scale(d: int, r0: float) -> float:
    """Mean resistance of the ball of radius ``r0``."""
    return 4.0 / (d + 1) * ball_volume(d - 1) * sphere_area(d - 1) * r0 ** (d - 1)


class Reduced(NamedTuple):
    kappa: float
    fhat: float
    fhat_stderr: float


def _value(x):
    if isinstance(x, Estimate):
        return x.mean, x.stderr
    return float(x), 0.0


def reduced_quantities(d: int, volume, resistance, r0: float) -> Reduced:
    """Reduced volume and reduced resistance relative to the ball of radius r0.

    ``volume`` and ``resistance`` may be plain numbers or :class:`Estimate`.
    """
    if not r0 > 0:
        raise ValueError("r0 must be > 0")
    vol, vol_se = _value(volume)
    res, res_se = _value(resistance)
    ball = ball_volume(d) * r0 ** d
    kappa = vol / ball
    if kappa > 1 + 4 * vol_se / ball + 1e-12:
        raise ValueError(f"reduced volume {kappa} exceeds 1: volume and r0 are inconsistent")
    if not 0 < kappa <= 1:
        warnings.warn(f"reduced volume {kappa} outside (0, 1]", RuntimeWarning, stacklevel=2)
    scale = resistance_scale(d, r0)
    return Reduced(kappa, res / scale, res_se / scale)
