"""Billiard trajectories outside a body, inside a sampling sphere.

A particle enters the sphere at ``xi`` with velocity ``v``, reflects off
the body under a :class:`ReflectionLaw` and is followed until it crosses
the sphere again.  :func:`trace_batch` advances a whole batch of particles
in lock step; :func:`trace` is the single-particle view of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import EPS_STEP, Body

GRAZING = 1e-12
# tolerance for starting points that round to just inside the body
EPS_START = 1e-9
MAX_REFLECTIONS = 10_000

ACTIVE, EXITED, TRAPPED, DISCARDED = 0, 1, 2, 3
STATUS_NAMES = {EXITED: "exited", TRAPPED: "trapped", DISCARDED: "discarded_singular"}


# ---------------------------------------------------------------- reflection laws


class ReflectionLaw:
    name = "law"

    def outgoing(self, v, n):
        """New velocities for incoming ``v`` at outward normals ``n``.

        Returns ``(u, grazing)``; grazing rows are left for the caller to
        discard.
        """
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}()"


def _dot(a, b):
    return np.einsum("ij,ij->i", a, b)


class Specular(ReflectionLaw):
    name = "specular"

    def outgoing(self, v, n):
        vn = _dot(v, n)
        u = v - 2.0 * vn[:, None] * n
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        return u, np.abs(vn) < GRAZING


class Retro(ReflectionLaw):
    """Velocity reversed at every hit."""

    name = "retro"

    def outgoing(self, v, n):
        return -v, np.abs(_dot(v, n)) < GRAZING


def _flip(phi):
    return -phi


def _identity(phi):
    return phi.copy()


def _swap_halves(phi):
    # exchanges sin(phi) in [-1, 0) with [0, 1): an interval exchange of the
    # invariant measure d(sin phi) = cos phi dphi
    s = np.sin(phi)
    return np.arcsin(np.clip(np.where(s < 0, s + 1.0, s - 1.0), -1.0, 1.0))


@dataclass(frozen=True, eq=False)
class PseudoBilliard2D(ReflectionLaw):
    """Planar reflection through a bijection of the incidence angle.

    With ``-v = cos(phi) n + sin(phi) t`` (``t`` is ``n`` turned by +90
    degrees) the particle leaves along ``cos(psi) n + sin(psi) t`` where
    ``psi = angle_map(phi)``.  The map must preserve ``cos(phi) dphi`` on
    ``[-pi/2, pi/2]``; ``phi -> -phi`` is ordinary specular reflection.
    """

    angle_map: Callable = _flip
    label: str = "custom"

    @property
    def name(self):
        return f"pseudo:{self.label}"

    def outgoing(self, v, n):
        if v.shape[1] != 2:
            raise ValueError("pseudo-billiard laws are planar")
        t = np.stack([-n[:, 1], n[:, 0]], axis=1)
        cphi = -_dot(v, n)
        sphi = -_dot(v, t)
        psi = self.angle_map(np.arctan2(sphi, cphi))
        u = np.cos(psi)[:, None] * n + np.sin(psi)[:, None] * t
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        return u, np.abs(cphi) < GRAZING

    def __repr__(self):
        return f"PseudoBilliard2D({self.label!r})"


PSEUDO_LAWS = {
    "specular": PseudoBilliard2D(_flip, "specular"),
    "reverse": PseudoBilliard2D(_identity, "reverse"),
    "swap": PseudoBilliard2D(_swap_halves, "swap"),
}


def law_from_name(name: str) -> ReflectionLaw:
    if name == "specular":
        return Specular()
    if name == "retro":
        return Retro()
    if name.startswith("pseudo:") and name[7:] in PSEUDO_LAWS:
        return PSEUDO_LAWS[name[7:]]
    raise ValueError(f"unknown reflection law {name!r}")


def preserves_cosine_measure(angle_map, bins: int = 200, per_bin: int = 50,
                             tol: float = 1e-9) -> bool:
    """Grid check that ``angle_map`` pushes ``cos(phi) dphi`` onto itself.

    In the coordinate ``u = sin(phi)`` the measure is uniform on [-1, 1];
    equally spaced ``u`` points are mapped and re-binned, and every bin must
    receive the same share.
    """
    m = bins * per_bin
    u = -1.0 + (np.arange(m) + 0.5) * (2.0 / m)
    out = np.sin(angle_map(np.arcsin(u)))
    if np.any(np.abs(out) > 1 + tol):
        return False
    counts, _ = np.histogram(np.clip(out, -1, 1), bins=bins, range=(-1.0, 1.0))
    return bool(np.all(np.abs(counts - per_bin) <= 1))


# ---------------------------------------------------------------- scenes


@dataclass(frozen=True)
class Scene:
    """A body with its sampling sphere and reflection law."""

    body: Body
    law: ReflectionLaw = field(default_factory=Specular)
    center: Optional[tuple] = None
    r0: Optional[float] = None
    sphere_radius: Optional[float] = None

    def __post_init__(self):
        c_enc, r_enc = self.body.enclosing_ball
        center = c_enc if self.center is None else np.asarray(self.center, float)
        r0 = self.r0
        if r0 is None:
            r0 = r_enc if r_enc > 0 else self.sphere_radius
            if r0 is None:
                raise ValueError("an empty body needs an explicit r0 or sphere_radius")
        R = r0 if self.sphere_radius is None else self.sphere_radius
        if not r0 > 0:
            raise ValueError(f"r0 must be > 0, got {r0}")
        if R < r0:
            raise ValueError("sphere_radius must be >= r0")
        if r_enc > 0 and np.linalg.norm(c_enc - center) + r_enc > r0 * (1 + 1e-12):
            raise ValueError("body is not contained in ball(center, r0)")
        object.__setattr__(self, "center", tuple(float(x) for x in center))
        object.__setattr__(self, "r0", float(r0))
        object.__setattr__(self, "sphere_radius", float(R))

    @property
    def dim(self) -> int:
        return self.body.dim

    @property
    def c(self) -> np.ndarray:
        return np.array(self.center)

    def with_radius(self, R: float) -> "Scene":
        return Scene(self.body, self.law, self.center, self.r0, R)

    def with_law(self, law: ReflectionLaw) -> "Scene":
        return Scene(self.body, law, self.center, self.r0, self.sphere_radius)


# ---------------------------------------------------------------- tracing


@dataclass
class TraceBatch:
    v_plus: np.ndarray
    xi_plus: np.ndarray
    length: np.ndarray
    reflections: np.ndarray
    status: np.ndarray
    paths: Optional[list] = None

    @property
    def exited(self):
        return self.status == EXITED


@dataclass(frozen=True)
class TraceOutcome:
    v_plus: np.ndarray
    xi_plus: np.ndarray
    path_length: float
    reflections: int
    status: str
    path: Optional[np.ndarray] = None


def sphere_exit(O, U, center, R):
    """Largest ray parameter at which ``O + t U`` meets the sphere."""
    w = O - center
    b = _dot(U, w)
    cc = _dot(w, w) - R * R
    s = np.sqrt(np.maximum(b * b - cc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(b > 0, -cc / (b + s), s - b)
    return np.where(np.isfinite(t), t, 0.0)


def trace_batch(scene: Scene, v, xi, max_reflections: int = MAX_REFLECTIONS,
                record_paths: bool = False) -> TraceBatch:
    """Follow every particle ``(v[i], xi[i])`` until it leaves the sphere."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    N, d = v.shape
    c, R = scene.c, scene.sphere_radius
    comp = scene.body._compiled
    eps_step = EPS_STEP * scene.r0
    O, U = xi.copy(), v.copy()
    length = np.zeros(N)
    refl = np.zeros(N, dtype=np.int64)
    status = np.zeros(N, dtype=np.int8)
    paths = [[p.copy()] for p in xi] if record_paths else None
    active = np.arange(N)
    first = True
    while active.size:
        o, u = O[active], U[active]
        t_exit = sphere_exit(o, u, c, R)
        if comp.prims:
            t_min = -EPS_START * scene.r0 if first else eps_step
            found, t, n, edge, _ = comp.next_event(o, u, t_min, entry_only=True)
            found &= t <= t_exit
        else:
            found = np.zeros(len(active), bool)
        first = False

        leave = active[~found]
        if leave.size:
            te = t_exit[~found]
            O[leave] = o[~found] + te[:, None] * u[~found]
            length[leave] += te
            status[leave] = EXITED
            if record_paths:
                for i in leave:
                    paths[i].append(O[i].copy())

        idx = active[found]
        if idx.size:
            th = np.maximum(t[found], 0.0)
            p = o[found] + th[:, None] * u[found]
            newu, grazing = scene.law.outgoing(u[found], n[found])
            O[idx] = p
            length[idx] += th
            bad = edge[found] | grazing
            status[idx[bad]] = DISCARDED
            ok = ~bad
            U[idx[ok]] = newu[ok]
            refl[idx[ok]] += 1
            over = idx[ok][refl[idx[ok]] > max_reflections]
            status[over] = TRAPPED
            if record_paths:
                for i in idx:
                    paths[i].append(O[i].copy())
        active = active[status[active] == ACTIVE]
    return TraceBatch(U, O, length, refl, status,
                      [np.array(p) for p in paths] if record_paths else None)


def trace(scene: Scene, v, xi, max_reflections: int = MAX_REFLECTIONS,
          record_path: bool = False) -> TraceOutcome:
    """Trace one particle entering the sphere at ``xi`` with velocity ``v``."""
    v = np.asarray(v, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if np.dot(v, xi - scene.c) >= 0:
        raise ValueError("velocity must point into the sphere")
    b = trace_batch(scene, v[None], xi[None], max_reflections, record_path)
    return TraceOutcome(b.v_plus[0], b.xi_plus[0], float(b.length[0]),
                        int(b.reflections[0]), STATUS_NAMES[int(b.status[0])],
                        b.paths[0] if record_path else None)


def reversibility_error(scene: Scene, batch: TraceBatch, v, xi,
                        max_reflections: int = MAX_REFLECTIONS) -> np.ndarray:
    """Per-sample error of tracing back from ``(-v+, xi+)``.

    The error is the larger of the positional miss and ``r0`` times the
    velocity miss; rows that did not exit (either way) get NaN.
    """
    v = np.atleast_2d(v)
    xi = np.atleast_2d(xi)
    ok = batch.exited
    err = np.full(len(v), np.nan)
    if not np.any(ok):
        return err
    back = trace_batch(scene, -batch.v_plus[ok], batch.xi_plus[ok], max_reflections)
    pos = np.linalg.norm(back.xi_plus - xi[ok], axis=1)
    vel = np.linalg.norm(back.v_plus + v[ok], axis=1) * scene.r0
    e = np.maximum(pos, vel)
    e[~back.exited] = np.nan
    err[ok] = e
    return err


def reversibility_check(scene: Scene, outcome: TraceOutcome, original) -> float:
    """Error of the time-reversed trajectory for one exited outcome."""
    if outcome.status != "exited":
        raise ValueError("reversibility needs an exited trajectory")
    v, xi = (np.asarray(a, dtype=float) for a in original)
    back = trace(scene, -outcome.v_plus, outcome.xi_plus)
    return max(float(np.linalg.norm(back.xi_plus - xi)),
               float(np.linalg.norm(back.v_plus + v)) * scene.r0)


def specular_reflect(v, n):
    """``v - 2 <v, n> n``; raises for grazing incidence."""
    v = np.asarray(v, dtype=float)
    n = np.asarray(n, dtype=float)
    vn = float(np.dot(v, n))
    if abs(vn) < GRAZING:
        raise ValueError("grazing reflection")
    if vn > 0:
        raise ValueError("velocity must point against the outward normal")
    return v - 2.0 * vn * n


def deflection_angle(v, w):
    """Angle between unit vectors, accurate at both ends of [0, pi]."""
    v = np.atleast_2d(v)
    w = np.atleast_2d(w)
    return 2.0 * np.arctan2(np.linalg.norm(v - w, axis=1), np.linalg.norm(v + w, axis=1))
