"""Billiard simulation of mirror bodies: visibility index, mean resistance
and numerical checks of the lower bounds relating them to volume."""

__version__ = "0.1.0"

from .billiard import Retro, Scene, Specular, law_from_name, trace, trace_batch
from .constants import ball_volume, sphere_area
from .estimators import (OneMinusCos, PowerLaw, estimate_F, estimate_F_R, mean_resistance,
                         reduced_quantities)
from .geometry import Ball, Body, Box, Difference, Polygon, Polytope, Union, volume
from .stats import Estimate

__all__ = [
    "Ball", "Body", "Box", "Difference", "Estimate", "OneMinusCos", "Polygon", "Polytope",
    "PowerLaw", "Retro", "Scene", "Specular", "Union", "ball_volume", "estimate_F",
    "estimate_F_R", "law_from_name", "mean_resistance", "reduced_quantities",
    "sphere_area", "trace", "trace_batch", "volume",
]
