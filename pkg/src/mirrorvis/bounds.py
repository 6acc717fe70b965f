"""Exact constants, volume/resistance lower bounds and numeric checks of the
inequalities that lead to them.

The chain being checked, for a body D inside a ball of radius r:

* phase volume ``V = s_{d-1} (b_d r^d - |D|)`` dominates the flux integral
  of trajectory length;
* the transport integral ``int |R_v xi - R_{v+} xi+| d mu`` is at least
  ``s_{d-1} b_d r^d``;
* the rotation mismatch is controlled by ``sin(beta/2) <= h_phi0(alpha)``;
* together these give the finite volume bound :func:`volume_upper_bound`,
  from which the cubic resistance bounds follow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import beta as beta_fn

from .billiard import Scene
from .constants import ball_volume, sphere_area
from .estimators import AngleFunction, OneMinusCos, PowerLaw, estimate_F, simulate
from .sampling import Rotation, stream_generator, uniform_directions
from .stats import Estimate

SIGMAS = 4.0

# literature limits of the infimum of reduced resistance as reduced volume -> 1
M2 = 0.987820
M3 = 0.969445

HOLDS, VIOLATED, INCONCLUSIVE = "holds", "violated", "inconclusive"


class SoundnessAlarm(RuntimeError):
    """A proven inequality failed beyond the statistical tolerance."""


@dataclass(frozen=True)
class BoundReport:
    """``lhs >= rhs`` (or ``lhs == rhs`` when ``equality``) up to ``4 stderr``."""

    name: str
    lhs: float
    rhs: float
    stderr: float
    verdict: str
    equality: bool = False
    seed: int = 0

    @property
    def margin_sigmas(self) -> float:
        diff = self.lhs - self.rhs
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / self.stderr

    @classmethod
    def judge(cls, name, lhs, rhs, stderr, equality=False, reliable=True, seed=0):
        slack = SIGMAS * stderr + 1e-12 * max(abs(lhs), abs(rhs), 1.0)
        if lhs < rhs - slack or (equality and lhs > rhs + slack):
            verdict = VIOLATED
        elif not reliable:
            verdict = INCONCLUSIVE
        else:
            verdict = HOLDS
        return cls(name, float(lhs), float(rhs), float(stderr), verdict, equality, seed)


# ---------------------------------------------------------------- constants


def c_d(d: int, c: float, kappa: float) -> float:
    """Leading coefficient of the small-volume lower bound for ``f ~ c phi^kappa``."""
    if d < 2 or not (c > 0 and kappa > 0):
        raise ValueError("need d >= 2, c > 0, kappa > 0")
    lead = c * kappa ** kappa / (kappa + 1) ** (kappa + 1)
    if d == 2:
        return lead * math.pi / 2 ** kappa
    s1, s2, b1 = sphere_area(d - 1), sphere_area(d - 2), ball_volume(d - 1)
    B = beta_fn((d - 1) / 2, (d - 2) / 2)
    return lead * s1 ** (kappa + 1) * 2.0 ** (-1 - d * kappa + 2 * kappa) / (b1 * s2 * B) ** kappa


def c3_closed_form(c: float, kappa: float) -> float:
    return c * kappa ** kappa / (kappa + 1) ** (kappa + 1) / (2 * math.pi) ** (kappa - 1)


def I_slope(d: int) -> float:
    """``lim I_d(phi) / phi`` as ``phi -> 0``."""
    if d == 2:
        return math.pi / 2
    return 2.0 ** (d - 3) * beta_fn((d - 1) / 2, (d - 2) / 2)


def exp_minimum(alpha: float, beta: float, kappa: float):
    """Minimiser and minimum of ``alpha/kappa * phi**-kappa + beta * phi``."""
    phi = (alpha / beta) ** (1 / (kappa + 1))
    return phi, (kappa + 1) / kappa * alpha ** (1 / (kappa + 1)) * beta ** (kappa / (kappa + 1))


# ---------------------------------------------------------------- I_d


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (rec(a, m, fa, flm, fm, left, tol / 2, depth - 1)
                + rec(m, b, fm, frm, fb, right, tol / 2, depth - 1))

    if b <= a:
        return 0.0
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def I_d_quadrature(d: int, phi: float, tol: float = 1e-10) -> float:
    """Rotation-mismatch integral for ``d >= 3`` by direct quadrature."""
    if d < 3:
        raise ValueError("the integral form is for d >= 3")
    p = d - 2
    first = adaptive_simpson(lambda a: math.sin(a) ** p / math.cos(a / 2), 0.0, math.pi - phi, tol / 2)
    second = adaptive_simpson(lambda a: math.sin(a) ** p, math.pi - phi, math.pi, tol / 2)
    return math.sin(phi / 2) * first + second


def I_d(d: int, phi: float) -> float:
    if not 0.0 <= phi <= math.pi:
        raise ValueError(f"phi must lie in [0, pi], got {phi}")
    if d == 2:
        return math.pi * math.sin(phi / 2)
    if d == 3:
        s = math.sin(phi / 2)
        return 4 * s - 2 * s * s
    return I_d_quadrature(d, phi)


def h_phi0(alpha, phi0: float, d: int = 3):
    """Bound on ``sin(beta / 2)`` for the rotation mismatch."""
    alpha = np.asarray(alpha, dtype=float)
    if d == 2:
        return np.full(alpha.shape, math.sin(phi0 / 2))
    with np.errstate(divide="ignore"):
        val = math.sin(phi0 / 2) / np.cos(alpha / 2)
    return np.where(alpha < math.pi - phi0, val, 1.0)


# ---------------------------------------------------------------- volume bound


def _golden(g, lo, hi, rtol=1e-9, max_iter=200):
    inv = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    x1, x2 = b - inv * (b - a), a + inv * (b - a)
    g1, g2 = g(x1), g(x2)
    for _ in range(max_iter):
        if b - a <= rtol * max(abs(a) + abs(b), 1e-300):
            break
        if g1 <= g2:
            b, x2, g2 = x2, x1, g1
            x1 = b - inv * (b - a)
            g1 = g(x1)
        else:
            a, x1, g1 = x1, x2, g2
            x2 = a + inv * (b - a)
            g2 = g(x2)
    return (x1, g1) if g1 <= g2 else (x2, g2)


BRACKET = (1e-6, math.pi - 1e-6)


def volume_bound_objective(d: int, r0: float, F: float, f: AngleFunction):
    s1 = sphere_area(d - 1)
    k1 = 2 * r0 * F / s1
    k2 = 2 * ball_volume(d - 1) * sphere_area(d - 2) * r0 ** d / s1
    return lambda phi: k1 / float(f(phi)) + k2 * I_d(d, phi)


def volume_upper_bound(d: int, r0: float, F: float, f: AngleFunction = OneMinusCos(),
                       grid: int = 64, cap: bool = True) -> float:
    """Largest volume compatible with visibility index ``F``.

    Minimises the two-term bound over ``phi0`` (coarse grid, then golden
    section).  With ``cap`` the result is capped at the volume of the ball
    of radius r0.
    """
    if F < 0:
        raise ValueError("F must be >= 0")
    top = ball_volume(d) * r0 ** d if cap else math.inf
    if F == 0:
        return 0.0
    g = volume_bound_objective(d, r0, F, f)
    lo, hi = BRACKET
    xs = np.linspace(lo, hi, grid)
    vals = [g(x) for x in xs]
    k = int(np.argmin(vals))
    a, b = xs[max(k - 1, 0)], xs[min(k + 1, grid - 1)]
    _, best = _golden(g, a, b)
    return min(best, vals[k], top)


def theorem2_bound(d: int, volume: float, r0: float) -> float:
    """Cubic lower bound on mean resistance from volume and containing radius."""
    x = volume / r0 ** d
    if d == 2:
        return r0 * math.pi / 54 * x ** 3
    if d == 3:
        return r0 ** 2 / (27 * math.pi) * x ** 3
    raise ValueError("exact cubic bound only for d in {2, 3}")


def for1_bound(d: int, kappa: float) -> float:
    """Cubic lower bound on reduced resistance from reduced volume."""
    if d == 2:
        return math.pi ** 3 / 288 * kappa ** 3
    if d == 3:
        return 16 / 729 * kappa ** 3
    raise ValueError("exact cubic bound only for d in {2, 3}")


# ---------------------------------------------------------------- proof helpers


def d2_infimum(fres: float, r: float):
    """Minimiser and value of ``r f / (2 pi z^2) + 4 r^2 z`` over ``0 < z <= 1``."""
    if fres <= 4 * math.pi * r:
        z = (fres / (4 * math.pi * r)) ** (1 / 3)
    else:
        z = 1.0
    return z, r * fres / (2 * math.pi * z * z) + 4 * r * r * z


def h_tilde(z, ftilde):
    return ftilde / z ** 2 + 2 * z - z ** 2


def theorem2_proof_helpers(ftilde: float, tol: float = 1e-12):
    """Smallest positive critical point ``z*`` of ``h`` and ``h(z*)`` (d = 3).

    Critical points solve ``ftilde = z^3 (1 - z)``, which increases on
    (0, 3/4]; beyond ``27/256`` there is none and ``ValueError`` is raised.
    """
    top = 27 / 256
    if not ftilde > 0:
        raise ValueError("ftilde must be > 0")
    if ftilde > top:
        raise ValueError("ftilde > 27/256: no critical point, use the A <= 2/3 branch")
    if ftilde == top:
        z = 0.75
    else:
        lo, hi = 0.0, 0.75
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if mid ** 3 * (1 - mid) < ftilde:
                lo = mid
            else:
                hi = mid
        z = 0.5 * (lo + hi)
    return z, h_tilde(z, ftilde)


# ---------------------------------------------------------------- quaternions


def quat_mul(p, q):
    """Hamilton product of quaternion arrays ``(..., 4)`` stored (w, x, y, z)."""
    pw, pv = p[..., :1], p[..., 1:]
    qw, qv = q[..., :1], q[..., 1:]
    w = pw * qw - np.sum(pv * qv, axis=-1, keepdims=True)
    v = pw * qv + qw * pv + np.cross(pv, qv)
    return np.concatenate([w, v], axis=-1)


def quat_conj(q):
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_rotate(q, x):
    xq = np.concatenate([np.zeros(x.shape[:-1] + (1,)), x], axis=-1)
    return quat_mul(quat_mul(q, xq), quat_conj(q))[..., 1:]


def pole_quaternion(v):
    """Unit quaternion of ``R_v`` for unit vectors ``v`` in R^3."""
    v = np.atleast_2d(v)
    flat = np.linalg.norm(v[:, :2], axis=1)
    alpha = np.arctan2(flat, v[:, 2])
    axis = np.zeros_like(v)
    nz = flat > 0
    # v x e3 = (v_y, -v_x, 0)
    axis[nz, 0] = v[nz, 1] / flat[nz]
    axis[nz, 1] = -v[nz, 0] / flat[nz]
    axis[~nz & (v[:, 2] < 0), 1] = -1.0
    half = alpha / 2
    return np.concatenate([np.cos(half)[:, None], np.sin(half)[:, None] * axis], axis=1)


def rotation_gap(v, w):
    """Half-angle sine ``sin(beta/2)`` of ``R_w^{-1} R_v`` and the polar angle of v."""
    q = pole_quaternion(v)
    qp = pole_quaternion(w)
    rel = quat_mul(quat_conj(qp), q)
    cos_half = np.minimum(np.abs(rel[:, 0]), 1.0)
    sin_half = np.linalg.norm(rel[:, 1:], axis=1)
    alpha = np.arctan2(np.linalg.norm(v[:, :2], axis=1), v[:, 2])
    return sin_half, cos_half, alpha


def constrained_pairs(rng, n: int, phi0: float, boundary_share: float = 0.1):
    """Random unit pairs with angle at most ``phi0`` (uniform on the cap,
    with ``boundary_share`` of pairs placed exactly on the rim)."""
    v = uniform_directions(rng, n, 3)
    cosg = rng.uniform(math.cos(phi0), 1.0, n)
    rim = rng.uniform(size=n) < boundary_share
    cosg[rim] = math.cos(phi0)
    sing = np.sqrt(np.maximum(1 - cosg ** 2, 0.0))
    # random unit vector orthogonal to v
    g = rng.standard_normal((n, 3))
    g -= np.sum(g * v, axis=1, keepdims=True) * v
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    w = cosg[:, None] * v + sing[:, None] * g
    return v, w / np.linalg.norm(w, axis=1, keepdims=True)


def check_rotation_gap(phi0: float, n: int, seed: int = 0, tol: float = 1e-9) -> BoundReport:
    """Sweep random pairs and report the worst excess of ``sin(beta/2)``
    over ``h_phi0(alpha)``; ``lhs`` is ``-max excess`` so ``lhs >= 0``."""
    if not 0 < phi0 < math.pi:
        raise ValueError("phi0 must lie in (0, pi)")
    worst = -math.inf
    chunk = 1 << 18
    for k, start in enumerate(range(0, n, chunk)):
        m = min(chunk, n - start)
        v, w = constrained_pairs(stream_generator(seed, k), m, phi0)
        sin_half, _, alpha = rotation_gap(v, w)
        worst = max(worst, float(np.max(sin_half - h_phi0(alpha, phi0))))
    return BoundReport.judge(f"rotation_gap[phi0={phi0!r}]", -worst, -tol, 0.0, seed=seed)


# ---------------------------------------------------------------- Monte Carlo checks


def transport_integrand(smp, batch):
    a = Rotation(smp.v).apply(smp.xi - smp.center)
    b = Rotation(batch.v_plus).apply(batch.xi_plus - smp.center)
    return np.linalg.norm(a - b, axis=1)


def check_transport_bound(scene: Scene, n: int, seed: int = 0, threads: int = 1,
                          equality: Optional[bool] = None) -> BoundReport:
    """Flux integral of the rotated endpoint distance against ``s_{d-1} b_d r^d``.

    The empty body realises the vertical transport exactly, so equality is
    also required there.
    """
    d, R = scene.dim, scene.sphere_radius
    est = simulate(scene, n, seed, transport_integrand, threads)
    rhs = sphere_area(d - 1) * ball_volume(d) * R ** d
    eq = scene.body.is_empty if equality is None else equality
    return BoundReport.judge("transport", est.mean, rhs, est.stderr, eq,
                             not est.unreliable, seed)


def check_phase_volume(scene: Scene, volume: float, n: int, seed: int = 0,
                       threads: int = 1, equality: Optional[bool] = None) -> BoundReport:
    """Phase volume ``s_{d-1}(b_d r^d - |D|)`` against the flux integral of
    trajectory length."""
    d, R = scene.dim, scene.sphere_radius
    est = simulate(scene, n, seed, lambda s, b: b.length, threads)
    V = sphere_area(d - 1) * (ball_volume(d) * R ** d - volume)
    eq = scene.body.is_empty if equality is None else equality
    return BoundReport.judge("phase_volume", V, est.mean, est.stderr, eq,
                             not est.unreliable, seed)


def check_chord_bound(scene: Scene, n: int, seed: int = 0, threads: int = 1) -> BoundReport:
    """Flux integrals of path length against the endpoint chord ``|xi - xi+|``."""
    def gap(s, b):
        return b.length - np.linalg.norm(b.xi_plus - s.xi, axis=1)

    est = simulate(scene, n, seed, gap, threads)
    return BoundReport.judge("length_vs_chord", est.mean, 0.0, est.stderr,
                             reliable=not est.unreliable, seed=seed)


def _bound_stderr(fn, F: Estimate):
    if F.stderr == 0:
        return 0.0
    return abs(fn(F.mean + F.stderr) - fn(F.mean))


def check_volume_bound(scene: Scene, volume: float, F: Estimate,
                       f: AngleFunction = OneMinusCos()) -> BoundReport:
    """The finite volume bound evaluated at the measured index must cover |D|."""
    d, r = scene.dim, scene.sphere_radius
    bound = volume_upper_bound(d, r, F.mean, f)
    se = _bound_stderr(lambda x: volume_upper_bound(d, r, max(x, 0.0), f), F)
    return BoundReport.judge("volume_bound", bound, volume, se,
                             reliable=not F.unreliable, seed=F.seed)


def check_theorem2(scene: Scene, volume: float, fres: Estimate) -> BoundReport:
    rhs = theorem2_bound(scene.dim, volume, scene.r0)
    return BoundReport.judge("theorem2", fres.mean, rhs, fres.stderr,
                             reliable=not fres.unreliable, seed=fres.seed)


def check_reduced(scene: Scene, volume: float, fres: Estimate) -> BoundReport:
    from .estimators import reduced_quantities

    red = reduced_quantities(scene.dim, volume, fres, scene.r0)
    return BoundReport.judge("reduced_resistance", red.fhat,
                             for1_bound(scene.dim, red.kappa), red.fhat_stderr,
                             reliable=not fres.unreliable, seed=fres.seed)


def theorem1_scan(d: int, c: float, kappa: float, scenes, volumes, n: int,
                  seed: int = 0, threads: int = 1, f: Optional[AngleFunction] = None):
    """Check the finite volume bound with ``f = c phi^kappa`` on each scene."""
    if not scenes:
        raise ValueError("need at least one scene")
    f = PowerLaw(c, kappa) if f is None else f
    reports = []
    for scene, vol in zip(scenes, volumes):
        if scene.dim != d:
            raise ValueError("scene dimension mismatch")
        F = estimate_F(scene, f, n, seed, threads)
        reports.append(check_volume_bound(scene, vol, F, f))
    return reports


def verify_scene(scene: Scene, volume: float, n: int, seed: int = 0,
                 threads: int = 1):
    """All Monte Carlo checks for one scene, as a list of reports."""
    reports = [check_phase_volume(scene, volume, n, seed, threads),
               check_chord_bound(scene, n, seed, threads),
               check_transport_bound(scene, n, seed, threads)]
    fres = estimate_F(scene, OneMinusCos(), n, seed, threads)
    reports.append(check_volume_bound(scene, volume, fres))
    if scene.dim in (2, 3) and volume > 0:
        reports.append(check_theorem2(scene, volume, fres))
        reports.append(check_reduced(scene, volume, fres))
    return reports
