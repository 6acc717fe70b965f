"""Unit sphere areas and unit ball volumes."""

from __future__ import annotations

import math
from dataclasses import dataclass


def sphere_area(k: int) -> float:
    """Area ``s_k`` of the unit k-sphere (the boundary of the unit (k+1)-ball).

    Uses the two-step recursion ``s_k = 2 pi s_{k-2} / (k - 1)`` so that the
    low-dimensional values come out as the exact floats 2, 2*pi, 4*pi, ...
    """
    if k < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {k}")
    s = 2.0 if k % 2 == 0 else 2.0 * math.pi
    for j in range(k % 2 + 2, k + 1, 2):
        s = 2.0 * math.pi * s / (j - 1)
    return s


def ball_volume(d: int) -> float:
    """Volume ``b_d`` of the unit d-ball; ``b_0 = 1``."""
    if d < 0:
        raise ValueError(f"ball dimension must be >= 0, got {d}")
    if d == 0:
        return 1.0
    return sphere_area(d - 1) / d


def sphere_area_gamma(k: int) -> float:
    """Gamma-function form of :func:`sphere_area`, kept as a cross-check."""
    return 2.0 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def ball_volume_gamma(d: int) -> float:
    return 2.0 * math.pi ** (d / 2) / (d * math.gamma(d / 2))


@dataclass(frozen=True)
class Constants:
    d: int
    s: float  # s_{d-1}
    b: float  # b_d

    @classmethod
    def for_dim(cls, d: int) -> "Constants":
        return cls(d, sphere_area(d - 1), ball_volume(d))
