"""Sampling incoming phase points and the rotations that flatten them.

Incoming pairs ``(v, xi)`` are drawn through the flat parameterisation:
``v`` uniform on the unit sphere, ``eta'`` uniform on the (d-1)-ball of
radius R, ``eta = (eta', -sqrt(R^2 - |eta'|^2))`` and ``xi = R_v^{-1} eta``.
Because ``xi -> R_v xi`` carries the cosine-weighted sphere measure onto
``d eta'``, this draws exactly from the normalised flux measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import ball_volume, sphere_area

# Philox4x64 counter words are (lo, ., ., hi); streams are separated by the
# high word, leaving 2**192 draws per stream.
_STREAM_WORD = 3


def stream_generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for ``(seed, stream)``.

    Identical arguments give identical sequences; distinct streams occupy
    disjoint counter ranges of the same Philox key.
    """
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative")
    counter = [0, 0, 0, 0]
    counter[_STREAM_WORD] = int(stream)
    return np.random.Generator(np.random.Philox(key=int(seed), counter=counter))


@dataclass(frozen=True)
class PhaseSample:
    """Batch of incoming pairs; ``v`` and ``xi`` have shape (n, d)."""

    v: np.ndarray
    xi: np.ndarray
    center: np.ndarray

    def __len__(self):
        return len(self.v)

    def inward_cosine(self):
        """``-<v, n(xi)>`` for each pair (non-negative for incoming pairs)."""
        n = self.xi - self.center
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        return -np.einsum("ij,ij->i", self.v, n)


def uniform_directions(rng: np.random.Generator, size: int, d: int) -> np.ndarray:
    if d == 2:
        phi = rng.uniform(0.0, 2.0 * np.pi, size)
        return np.stack([np.cos(phi), np.sin(phi)], axis=1)
    g = rng.standard_normal((size, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def uniform_in_ball(rng: np.random.Generator, size: int, k: int, R: float) -> np.ndarray:
    """Uniform points in the k-ball of radius R."""
    if k == 1:
        return rng.uniform(-R, R, (size, 1))
    g = rng.standard_normal((size, k))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = R * rng.uniform(0.0, 1.0, size) ** (1.0 / k)
    return g * rad[:, None]


def mu_total(d: int, R: float) -> float:
    """Total flux measure of the incoming set, ``s_{d-1} b_{d-1} R^{d-1}``."""
    if not R > 0:
        raise ValueError(f"R must be > 0, got {R}")
    return sphere_area(d - 1) * ball_volume(d - 1) * R ** (d - 1)


# ---------------------------------------------------------------- rotations


class Rotation:
    """Rotation ``R_v`` taking the unit vector(s) ``v`` to the last axis.

    It acts in the plane spanned by ``v`` and the pole and fixes the
    orthogonal complement.  For ``v = -pole`` it is the half-turn in the
    plane of the pole and the first axis.  Works on a single vector or on
    a batch (shape (n, d)); application is matrix-free.
    """

    def __init__(self, v):
        v = np.asarray(v, dtype=float)
        self.single = v.ndim == 1
        self.v = np.atleast_2d(v)
        n, d = self.v.shape
        self.d = d
        self.cos = self.v[:, -1].copy()
        flat = self.v[:, :-1]
        self.sin = np.linalg.norm(flat, axis=1)
        # unit direction of v's component orthogonal to the pole
        self.w = np.zeros((n, d - 1))
        nz = self.sin > 0
        self.w[nz] = flat[nz] / self.sin[nz, None]
        antipode = ~nz & (self.cos < 0)
        self.w[antipode, 0] = 1.0

    def _apply(self, x, sign):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        c, s, w = self.cos[:, None], sign * self.sin[:, None], self.w
        xw = np.einsum("ij,ij->i", x[:, :-1], w)[:, None]
        xb = x[:, -1:]
        out = x.copy()
        out[:, :-1] += (xw * (c - 1.0) - xb * s) * w
        out[:, -1:] += xw * s + xb * (c - 1.0)
        return out

    def apply(self, x):
        out = self._apply(x, 1.0)
        return out[0] if self.single and np.ndim(x) == 1 else out

    def inverse(self, x):
        out = self._apply(x, -1.0)
        return out[0] if self.single and np.ndim(x) == 1 else out

    def matrix(self):
        if not self.single:
            raise ValueError("matrix() is only defined for a single rotation")
        return self.apply(np.eye(self.d)).T


def rotation_to_pole(v) -> Rotation:
    return Rotation(v)


def project_hemisphere(v, xi, sign: int, center=None):
    """``pi_±(v, xi) = R_v (xi - center)``; the last coordinate of the result
    has the requested sign for pairs in the corresponding phase set."""
    xi = np.asarray(xi, dtype=float)
    if center is not None:
        xi = xi - np.asarray(center, dtype=float)
    eta = Rotation(v).apply(xi)
    last = eta[..., -1]
    if np.any(sign * last < -1e-9 * np.max(np.abs(eta))):
        raise ValueError("pair is not in the requested phase set")
    return eta


def sample_incoming(d: int, R: float, rng: np.random.Generator, size: int = 1,
                    center=None) -> PhaseSample:
    """Draw ``size`` incoming pairs from the normalised flux measure on the
    sphere of radius R (total mass is :func:`mu_total`)."""
    if not R > 0:
        raise ValueError(f"R must be > 0, got {R}")
    center = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    v = uniform_directions(rng, size, d)
    flat = uniform_in_ball(rng, size, d - 1, R)
    h = np.sqrt(np.maximum(R * R - np.sum(flat ** 2, axis=1), 0.0))
    eta = np.concatenate([flat, -h[:, None]], axis=1)
    xi = center + Rotation(v).inverse(eta)
    return PhaseSample(v, xi, center)
