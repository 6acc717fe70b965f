"""Named test bodies used by the verification suite, demos and tests."""

from __future__ import annotations

import math

import numpy as np

from .geometry import Ball, Body, Union, ball, disc, shell


def two_disc_union(radius=0.45, offset=0.55) -> Body:
    return Body(2, Union((Ball((-offset, 0.0), radius), Ball((offset, 0.0), radius))))


def two_ball_union(radius=0.45, offset=0.55) -> Body:
    return Body(3, Union((Ball((-offset, 0.0, 0.0), radius), Ball((offset, 0.0, 0.0), radius))))


def ring_of_discs(k=3, rho=0.3, center_ratio=0.0) -> Body:
    """``k`` discs of radius ``rho`` touching the unit circle from inside,
    plus an optional central disc of radius ``center_ratio * rho``."""
    a = 1.0 - rho
    ang = 2 * math.pi * np.arange(k) / k
    kids = [Ball((a * math.cos(t), a * math.sin(t)), rho) for t in ang]
    if center_ratio > 0:
        kids.append(Ball((0.0, 0.0), center_ratio * rho))
    return Body(2, Union(tuple(kids)))


SHIPPED = {
    "disc": lambda: disc(),
    "annulus": lambda: shell(1.0, 0.5, 2),
    "two-disc-union": two_disc_union,
    "ring-of-discs": ring_of_discs,
    "ball": lambda: ball(),
    "spherical-shell": lambda: shell(1.0, 0.5, 3),
    "two-ball-union": two_ball_union,
}


def shipped(name: str) -> Body:
    return SHIPPED[name]()


# ball-with-cavity is the spherical shell under another name
SHIPPED["ball-with-cavity"] = SHIPPED["spherical-shell"]

__all__ = ["SHIPPED", "shipped", "two_disc_union", "two_ball_union", "ring_of_discs"]
