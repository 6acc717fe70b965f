"""Mean resistance of a few bodies against their closed forms.

Run:  python demos/resistance_of_simple_bodies.py
"""

import math

from mirrorvis import Retro, Scene, mean_resistance, reduced_quantities
from mirrorvis.catalog import shipped
from mirrorvis.estimators import convex_resistance

N = 400_000

cases = [
    ("disc", 16 * math.pi / 3, math.pi),
    ("ball", 4 * math.pi ** 2, 4 * math.pi / 3),
]
for name, exact, vol in cases:
    scene = Scene(shipped(name))
    est = mean_resistance(scene, N, seed=0)
    print(f"{name:5s} resistance {est.mean:9.4f} +- {est.stderr:.4f}   exact {exact:.4f}")

    # retro-reflection sends every particle straight back
    retro = mean_resistance(scene.with_law(Retro()), N, seed=0)
    red = reduced_quantities(scene.dim, vol, retro, scene.r0)
    print(f"{'':5s} retro reduced resistance {red.fhat:.4f}")

# any convex body: only the boundary area matters
print("unit square (perimeter 4):", convex_resistance(2, 4.0))
