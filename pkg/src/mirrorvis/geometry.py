"""Bodies built from primitives, ray casting, containment, volume and
enclosing balls in two and three dimensions.

A :class:`Body` is an immutable CSG tree.  Ray queries are vectorised: the
tree is compiled once into a flat list of primitives plus a boolean
expression, and every primitive reports its candidate boundary crossings
for a whole batch of rays.  A candidate is a true boundary point of the
body when toggling the owning primitive's membership changes the tree's
membership there; the outward normal is the primitive normal, flipped when
the primitive enters the tree negatively (the subtracted side of a
``Difference``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union as TUnion

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .constants import ball_volume, sphere_area
from .stats import Estimate

EPS_STEP = 1e-12
EPS_EDGE = 1e-9

REGULAR = "regular"
NEAR_EDGE = "near_edge"


def _as_point(p, dim=None) -> tuple:
    pt = tuple(float(x) for x in p)
    if dim is not None and len(pt) != dim:
        raise ValueError(f"expected a {dim}-dimensional point, got {pt}")
    if not all(math.isfinite(x) for x in pt):
        raise ValueError(f"non-finite coordinate in {pt}")
    return pt


# ---------------------------------------------------------------- nodes


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError(f"ball radius must be > 0, got {self.radius}")

    @property
    def dim(self):
        return len(self.center)


@dataclass(frozen=True)
class Box:
    min: tuple
    max: tuple

    def __post_init__(self):
        object.__setattr__(self, "min", _as_point(self.min))
        object.__setattr__(self, "max", _as_point(self.max, len(self.min)))
        if not all(a < b for a, b in zip(self.min, self.max)):
            raise ValueError(f"box needs min < max componentwise: {self.min}, {self.max}")

    @property
    def dim(self):
        return len(self.min)


@dataclass(frozen=True)
class Polygon:
    """Simple polygon in the plane, vertices counter-clockwise."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple(_as_point(v, 2) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if _signed_area(np.array(verts)) <= 0:
            raise ValueError("polygon vertices must be counter-clockwise")
        if not _is_simple(np.array(verts)):
            raise ValueError("polygon is not simple")

    @property
    def dim(self):
        return 2

    @property
    def is_convex(self) -> bool:
        v = np.array(self.vertices)
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        return bool(np.all(cross >= 0))


@dataclass(frozen=True)
class Polytope:
    """Bounded intersection of halfspaces ``normal . x <= offset``."""

    normals: tuple
    offsets: tuple

    def __post_init__(self):
        normals = tuple(_as_point(n) for n in self.normals)
        offsets = tuple(float(b) for b in self.offsets)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        if len(normals) != len(offsets) or not normals:
            raise ValueError("polytope needs matching, nonempty normals and offsets")
        dim = len(normals[0])
        if any(len(n) != dim for n in normals):
            raise ValueError("polytope normals have mixed dimensions")
        if any(math.hypot(*n) == 0 for n in normals):
            raise ValueError("polytope normal of zero length")
        # raises for unbounded or empty polytopes
        _ = self.vertices

    @property
    def dim(self):
        return len(self.normals[0])

    def unit_halfspaces(self):
        A = np.array(self.normals)
        b = np.array(self.offsets)
        norms = np.linalg.norm(A, axis=1)
        return A / norms[:, None], b / norms

    @cached_property
    def vertices(self) -> np.ndarray:
        A, b = self.unit_halfspaces()
        m, d = A.shape
        # Chebyshev centre: maximise r subject to A x + r <= b
        cost = np.zeros(d + 1)
        cost[-1] = -1.0
        res = linprog(cost, A_ub=np.hstack([A, np.ones((m, 1))]), b_ub=b,
                      bounds=[(None, None)] * d + [(0, None)], method="highs")
        if res.status == 3:
            raise ValueError("polytope is unbounded")
        if res.status != 0 or res.x[-1] <= 1e-12:
            raise ValueError("polytope is empty or degenerate")
        interior = res.x[:d]
        hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), interior)
        return np.unique(np.round(hs.intersections, 14), axis=0)

    @cached_property
    def hull(self) -> ConvexHull:
        return ConvexHull(self.vertices)


@dataclass(frozen=True)
class Union:
    children: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


@dataclass(frozen=True)
class Difference:
    base: object
    subtract: object


Node = TUnion[Ball, Box, Polygon, Polytope, Union, Difference]


def _leaf_dims(node):
    if isinstance(node, Union):
        for child in node.children:
            yield from _leaf_dims(child)
    elif isinstance(node, Difference):
        yield from _leaf_dims(node.base)
        yield from _leaf_dims(node.subtract)
    elif isinstance(node, (Ball, Box, Polygon, Polytope)):
        yield node.dim
    else:
        raise TypeError(f"not a shape node: {node!r}")


@dataclass(frozen=True)
class Body:
    """A bounded body: a dimension tag plus a CSG tree of primitives."""

    dim: int
    node: Node = field(default_factory=Union)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        bad = [d for d in _leaf_dims(self.node) if d != self.dim]
        if bad:
            raise ValueError(f"leaf of dimension {bad[0]} in a {self.dim}-dimensional body")

    @cached_property
    def is_empty(self) -> bool:
        return not self._compiled.prims

    @cached_property
    def enclosing_ball(self):
        c, r = _enclosing(self.node, self.dim)
        return np.asarray(c, dtype=float), float(r)

    @cached_property
    def scale(self) -> float:
        r = self.enclosing_ball[1]
        return r if r > 0 else 1.0

    @cached_property
    def _compiled(self) -> "_Compiled":
        return _Compiled(self.node, self.dim, self.scale)


# ---------------------------------------------------------------- helpers


def _signed_area(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return ((o1 == 0 and on_seg(p1, p2, q1)) or (o2 == 0 and on_seg(p1, p2, q2))
            or (o3 == 0 and on_seg(q1, q2, p1)) or (o4 == 0 and on_seg(q1, q2, p2)))


def _is_simple(v) -> bool:
    n = len(v)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                return False
    return True


def _unit(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


# ---------------------------------------------------------------- enclosing balls


def _tangent_ball(centers, radii):
    """Smallest ball internally tangent to every ball in the support set,
    with centre in the affine hull of their centres; ``None`` if degenerate."""
    c0, r0 = centers[0], radii[0]
    if len(centers) == 1:
        return c0, r0
    A = (centers[1:] - c0).T
    G = 2.0 * A.T @ A
    if np.linalg.cond(G) > 1e12:
        return None
    rhs = (np.sum(centers[1:] ** 2, axis=1) - c0 @ c0
           - radii[1:] ** 2 + r0 ** 2 - 2.0 * (centers[1:] - c0) @ c0)
    lam_a = np.linalg.solve(G, rhs)
    lam_b = np.linalg.solve(G, 2.0 * (radii[1:] - r0))
    p, q = A @ lam_a, A @ lam_b
    qa, qb, qc = q @ q - 1.0, 2.0 * (p @ q + r0), p @ p - r0 ** 2
    if abs(qa) < 1e-14:
        roots = [-qc / qb] if qb != 0 else []
    else:
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0:
            return None
        sq = math.sqrt(disc)
        roots = [(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)]
    rmax = radii.max()
    roots = sorted(r for r in roots if r >= rmax - 1e-12)
    if not roots:
        return None
    r = roots[0]
    return c0 + p + q * r, r


def min_enclosing_ball(centers, radii=None):
    """Minimal ball containing the given balls (points when ``radii`` is None).

    Exhaustive over support sets of size <= d + 1, which is exact and fast
    for the handful of objects a CSG tree or a small polytope produces.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    k, d = centers.shape
    radii = np.zeros(k) if radii is None else np.asarray(radii, dtype=float)
    # a single ball may already contain the rest
    big = int(np.argmax(radii))
    reach = np.linalg.norm(centers - centers[big], axis=1) + radii
    if np.all(reach <= radii[big] * (1 + 1e-15)):
        return centers[big].copy(), float(radii[big])
    best = None
    for size in range(1, min(d + 1, k) + 1):
        for idx in itertools.combinations(range(k), size):
            idx = list(idx)
            sol = _tangent_ball(centers[idx], radii[idx])
            if sol is None:
                continue
            c, r = sol
            if best is not None and r >= best[1]:
                continue
            reach = np.linalg.norm(centers - c, axis=1) + radii
            if np.all(reach <= r + 1e-12 * max(r, 1.0)):
                best = (c, r)
    c, _ = best
    # the returned radius always contains every ball exactly
    r = float(np.max(np.linalg.norm(centers - c, axis=1) + radii))
    return c, r


def _enclosing(node, dim):
    if isinstance(node, Ball):
        return np.array(node.center), node.radius
    if isinstance(node, Box):
        lo, hi = np.array(node.min), np.array(node.max)
        return 0.5 * (lo + hi), 0.5 * float(np.linalg.norm(hi - lo))
    if isinstance(node, Polygon):
        return min_enclosing_ball(np.array(node.vertices))
    if isinstance(node, Polytope):
        return min_enclosing_ball(node.vertices)
    if isinstance(node, Difference):
        return _enclosing(node.base, dim)
    balls = [_enclosing(ch, dim) for ch in node.children]
    balls = [(c, r) for c, r in balls if r > 0]
    if not balls:
        return np.zeros(dim), 0.0
    return min_enclosing_ball(np.array([c for c, _ in balls]),
                              np.array([r for _, r in balls]))


# ---------------------------------------------------------------- primitives


class _BallPrim:
    def __init__(self, ball: Ball):
        self.c = np.array(ball.center)
        self.r = ball.radius

    def events(self, O, U, eps_edge):
        w = O - self.c
        b = np.einsum("ij,ij->i", U, w)
        cc = np.einsum("ij,ij->i", w, w) - self.r ** 2
        disc = b * b - cc
        valid = disc > 0
        s = np.sqrt(np.where(valid, disc, 0.0))
        q = -(b + np.copysign(s, b))
        with np.errstate(divide="ignore", invalid="ignore"):
            r2 = np.where(q != 0, cc / q, 0.0)
        t = np.stack([np.minimum(q, r2), np.maximum(q, r2)], axis=1)
        X = O[:, None, :] + t[..., None] * U[:, None, :]
        nrm = _unit(X - self.c)
        ent = np.zeros(t.shape, bool)
        ent[:, 0] = True
        valid = np.stack([valid, valid], axis=1)
        return t, nrm, ent, valid, np.zeros(t.shape, bool)

    def sdist(self, X):
        return np.linalg.norm(X - self.c, axis=-1) - self.r


class _ConvexPrim:
    def __init__(self, A, b):
        self.A, self.b = A, b

    def events(self, O, U, eps_edge):
        A, b = self.A, self.b
        denom = U @ A.T
        num = b - O @ A.T
        with np.errstate(divide="ignore", invalid="ignore"):
            tp = num / denom
        t_in = np.where(denom < 0, tp, -np.inf)
        t_out = np.where(denom > 0, tp, np.inf)
        j_in = np.argmax(t_in, axis=1)
        j_out = np.argmin(t_out, axis=1)
        rows = np.arange(len(O))
        ti, to = t_in[rows, j_in], t_out[rows, j_out]
        blocked = np.any((denom == 0) & (num < 0), axis=1)
        valid = (ti < to) & np.isfinite(ti) & np.isfinite(to) & ~blocked
        t = np.stack([np.where(valid, ti, 0.0), np.where(valid, to, 0.0)], axis=1)
        nrm = np.stack([A[j_in], A[j_out]], axis=1)
        X = O[:, None, :] + t[..., None] * U[:, None, :]
        vals = X @ A.T - b
        vals[rows, 0, j_in] = -np.inf
        vals[rows, 1, j_out] = -np.inf
        edge = vals.max(axis=2) > -eps_edge
        ent = np.zeros(t.shape, bool)
        ent[:, 0] = True
        return t, nrm, ent, np.stack([valid, valid], axis=1), edge

    def sdist(self, X):
        return np.max(X @ self.A.T - self.b, axis=-1)


class _PolygonPrim:
    def __init__(self, poly: Polygon):
        v = np.array(poly.vertices)
        self.a = v
        self.e = np.roll(v, -1, axis=0) - v
        self.len = np.linalg.norm(self.e, axis=1)
        self.n = np.stack([self.e[:, 1], -self.e[:, 0]], axis=1) / self.len[:, None]

    def events(self, O, U, eps_edge):
        e = self.e
        denom = U[:, None, 0] * e[None, :, 1] - U[:, None, 1] * e[None, :, 0]
        w = self.a[None] - O[:, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (w[..., 0] * e[None, :, 1] - w[..., 1] * e[None, :, 0]) / denom
            s = (w[..., 0] * U[:, None, 1] - w[..., 1] * U[:, None, 0]) / denom
        valid = (denom != 0) & (s >= 0) & (s <= 1)
        t = np.where(valid, t, 0.0)
        ent = (U @ self.n.T) < 0
        nrm = np.broadcast_to(self.n, t.shape + (2,))
        edge = (s * self.len < eps_edge) | ((1 - s) * self.len < eps_edge)
        return t, nrm, ent, valid, edge & valid

    def sdist(self, X):
        P = X[..., None, :]
        w = P - self.a
        s = np.clip(np.sum(w * self.e, axis=-1) / self.len ** 2, 0.0, 1.0)
        dist = np.min(np.linalg.norm(w - s[..., None] * self.e, axis=-1), axis=-1)
        ay, by = self.a[:, 1], self.a[:, 1] + self.e[:, 1]
        y, x = X[..., None, 1], X[..., None, 0]
        straddle = (ay > y) != (by > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xc = self.a[:, 0] + (y - ay) * self.e[:, 0] / self.e[:, 1]
        inside = (np.sum(straddle & (x < xc), axis=-1) % 2) == 1
        return np.where(inside, -dist, dist)


def _halfspaces_of(node):
    if isinstance(node, Box):
        d = node.dim
        eye = np.eye(d)
        return np.vstack([eye, -eye]), np.concatenate([node.max, -np.array(node.min)])
    return node.unit_halfspaces()


class _Compiled:
    def __init__(self, node, dim, scale):
        self.dim = dim
        self.eps_edge = EPS_EDGE * scale
        self.prims = []
        self.tree = self._compile(node)

    def _compile(self, node):
        if isinstance(node, Ball):
            self.prims.append(_BallPrim(node))
        elif isinstance(node, (Box, Polytope)):
            self.prims.append(_ConvexPrim(*_halfspaces_of(node)))
        elif isinstance(node, Polygon):
            self.prims.append(_PolygonPrim(node))
        elif isinstance(node, Union):
            return ("union", tuple(self._compile(ch) for ch in node.children))
        elif isinstance(node, Difference):
            return ("diff", self._compile(node.base), self._compile(node.subtract))
        else:
            raise TypeError(f"not a shape node: {node!r}")
        return ("leaf", len(self.prims) - 1)

    def evaluate(self, tree, M):
        kind = tree[0]
        if kind == "leaf":
            return M[..., tree[1]]
        if kind == "union":
            out = np.zeros(M.shape[:-1], bool)
            for ch in tree[1]:
                out |= self.evaluate(ch, M)
            return out
        return self.evaluate(tree[1], M) & ~self.evaluate(tree[2], M)

    def contains(self, X):
        X = np.asarray(X, dtype=float)
        if not self.prims:
            return np.zeros(X.shape[:-1], bool)
        M = np.stack([p.sdist(X) <= 0 for p in self.prims], axis=-1)
        return self.evaluate(self.tree, M)

    def next_event(self, O, U, t_min, entry_only):
        """Nearest boundary crossing of each ray with ``t > t_min``.

        Returns ``(found, t, normal, near_edge, entering)`` arrays.
        """
        N = len(O)
        best_t = np.full(N, np.inf)
        best_n = np.zeros((N, self.dim))
        best_edge = np.zeros(N, bool)
        best_ent = np.zeros(N, bool)
        P = len(self.prims)
        t_min = np.broadcast_to(np.asarray(t_min, dtype=float), (N,))
        for p, prim in enumerate(self.prims):
            t, nrm, ent, valid, edge = prim.events(O, U, self.eps_edge)
            if P == 1:
                t_in = np.ones(t.shape, bool)
                boundary = np.ones(t.shape, bool)
                seam = np.zeros(t.shape, bool)
            else:
                X = O[:, None, :] + t[..., None] * U[:, None, :]
                M = np.empty(t.shape + (P,), bool)
                seam = np.zeros(t.shape, bool)
                for q, other in enumerate(self.prims):
                    if q == p:
                        continue
                    sd = other.sdist(X)
                    M[..., q] = sd <= 0
                    seam |= np.abs(sd) < self.eps_edge
                M[..., p] = True
                t_in = self.evaluate(self.tree, M)
                M[..., p] = False
                boundary = t_in != self.evaluate(self.tree, M)
            entering = np.where(ent, t_in, ~t_in)
            probe = seam & valid & np.isfinite(t)
            if np.any(probe):
                # where boundaries meet, the in/out rule is ambiguous: probe
                # the body just before and just after the event instead
                step = 10.0 * self.eps_edge * U[:, None, :]
                Xp = X[probe]
                before = self.contains(Xp - np.broadcast_to(step, X.shape)[probe])
                after = self.contains(Xp + np.broadcast_to(step, X.shape)[probe])
                boundary[probe] = before != after
                entering[probe] = after
                # orient the normal against the motion when entering
                un = np.einsum("ij,ij->i", nrm[probe], np.broadcast_to(U[:, None, :], X.shape)[probe])
                t_in[probe] = (un < 0) == after
            ok = valid & boundary & (t > t_min[:, None])
            if entry_only:
                ok &= entering
            cand = np.where(ok, t, np.inf)
            k = np.argmin(cand, axis=1)
            rows = np.arange(N)
            tk = cand[rows, k]
            better = tk < best_t
            if not np.any(better):
                continue
            sign = np.where(t_in[rows, k], 1.0, -1.0)
            best_t = np.where(better, tk, best_t)
            best_n[better] = (sign[:, None] * nrm[rows, k])[better]
            best_edge[better] = (edge | seam)[rows, k][better]
            best_ent[better] = entering[rows, k][better]
        found = np.isfinite(best_t)
        return found, best_t, best_n, best_edge, best_ent


# ---------------------------------------------------------------- public queries


@dataclass(frozen=True)
class Hit:
    t: float
    point: np.ndarray
    normal: np.ndarray
    feature_quality: str = REGULAR


def ray_intersect(body: Body, origin, direction) -> Optional[Hit]:
    """Nearest crossing of the boundary of ``body`` along a ray."""
    o = np.asarray(origin, dtype=float).reshape(1, body.dim)
    u = np.asarray(direction, dtype=float).reshape(1, body.dim)
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    found, t, n, edge, _ = body._compiled.next_event(
        o, u, EPS_STEP * body.scale, entry_only=False)
    if not found[0]:
        return None
    return Hit(float(t[0]), o[0] + t[0] * u[0], n[0],
               NEAR_EDGE if edge[0] else REGULAR)


def contains(body: Body, p):
    """Closed-set membership; accepts one point or an array of points."""
    p = np.asarray(p, dtype=float)
    out = body._compiled.contains(p)
    return bool(out) if p.ndim == 1 else out


def enclosing_radius(body: Body):
    """Centre and radius of a ball containing ``body``.

    Minimal for single primitives and for unions of balls; for a
    ``Difference`` the base's ball is used.
    """
    c, r = body.enclosing_ball
    return c.copy(), r


def boundary_area(body: Body) -> Optional[float]:
    """(d-1)-dimensional boundary measure of a convex primitive, else None."""
    node = body.node
    d = body.dim
    if isinstance(node, Ball):
        return sphere_area(d - 1) * node.radius ** (d - 1)
    if isinstance(node, Box):
        sides = np.array(node.max) - np.array(node.min)
        if d == 2:
            return 2.0 * float(sides.sum())
        a, b, c = sides
        return 2.0 * float(a * b + b * c + c * a)
    if isinstance(node, Polygon):
        if not node.is_convex:
            return None
        v = np.array(node.vertices)
        return float(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum())
    if isinstance(node, Polytope):
        return float(node.hull.area)
    return None


@dataclass(frozen=True)
class VolumeConfig:
    samples: int = 1_000_000
    seed: int = 0
    method: str = "auto"  # "auto" or "mc"


def _analytic_volume(node, d):
    if isinstance(node, Ball):
        return ball_volume(d) * node.radius ** d
    if isinstance(node, Box):
        return float(np.prod(np.array(node.max) - np.array(node.min)))
    if isinstance(node, Polygon):
        return _signed_area(np.array(node.vertices))
    if isinstance(node, Polytope):
        return float(node.hull.volume)
    if isinstance(node, Union):
        kids = node.children
        balls = [_enclosing(ch, d) for ch in kids]
        for (ci, ri), (cj, rj) in itertools.combinations(balls, 2):
            if np.linalg.norm(ci - cj) < ri + rj:
                return None
        vols = [_analytic_volume(ch, d) for ch in kids]
        return None if any(v is None for v in vols) else float(sum(vols))
    if isinstance(node, Difference):
        base = _analytic_volume(node.base, d)
        sub = _analytic_volume(node.subtract, d)
        if base is None or sub is None:
            return None
        cs, rs = _enclosing(node.subtract, d)
        if rs == 0:
            return base
        cb, rb = _enclosing(node.base, d)
        if np.linalg.norm(cs - cb) >= rs + rb:
            return base
        if _ball_inside(cs, rs, node.base):
            return base - sub
        return None
    return None


def _ball_inside(c, r, node):
    """Whether the ball (c, r) provably lies inside a primitive node."""
    if isinstance(node, Ball):
        return np.linalg.norm(c - np.array(node.center)) + r <= node.radius
    if isinstance(node, (Box, Polytope)):
        A, b = _halfspaces_of(node)
        return bool(np.all(A @ c + r <= b))
    return False


def volume(body: Body, cfg: VolumeConfig = VolumeConfig()) -> Estimate:
    """Exact volume when it is provable, otherwise hit-or-miss Monte Carlo
    over the box around the enclosing ball."""
    d = body.dim
    if cfg.method not in ("auto", "mc"):
        raise ValueError(f"unknown volume method {cfg.method!r}")
    if body.is_empty:
        return Estimate.exact(0.0, cfg.seed)
    if cfg.method == "auto":
        exact = _analytic_volume(body.node, d)
        if exact is not None:
            return Estimate.exact(exact, cfg.seed)
    from .sampling import stream_generator

    c, r = body.enclosing_ball
    rng = stream_generator(cfg.seed, 0)
    box_vol = (2.0 * r) ** d
    hits = 0
    chunk = 1 << 18
    done = 0
    while done < cfg.samples:
        m = min(chunk, cfg.samples - done)
        pts = c + r * rng.uniform(-1.0, 1.0, size=(m, d))
        hits += int(np.count_nonzero(body._compiled.contains(pts)))
        done += m
    p = hits / cfg.samples
    se = box_vol * math.sqrt(p * (1 - p) / cfg.samples)
    return Estimate(box_vol * p, se, cfg.samples, 0.0, 0.0, cfg.seed)


# ---------------------------------------------------------------- builders


def disc(radius=1.0, center=(0.0, 0.0)) -> Body:
    return Body(2, Ball(center, radius))


def ball(radius=1.0, center=(0.0, 0.0, 0.0)) -> Body:
    return Body(3, Ball(center, radius))


def empty(dim: int) -> Body:
    return Body(dim, Union(()))


def shell(outer=1.0, inner=0.5, dim=2) -> Body:
    """Ball with a concentric ball removed (annulus for ``dim=2``)."""
    c = (0.0,) * dim
    return Body(dim, Difference(Ball(c, outer), Ball(c, inner)))


def regular_polygon(k: int, radius=1.0, center=(0.0, 0.0), phase=0.0) -> Body:
    ang = phase + 2 * np.pi * np.arange(k) / k
    verts = np.stack([center[0] + radius * np.cos(ang),
                      center[1] + radius * np.sin(ang)], axis=1)
    return Body(2, Polygon(tuple(map(tuple, verts))))
