"""Every Monte Carlo bound check on the spherical shell, then the volume
bound turned around: how large could a body be given its resistance?

Run:  python demos/bounds_on_a_shell.py
"""

import math

from mirrorvis import Scene, mean_resistance
from mirrorvis.bounds import verify_scene, volume_upper_bound
from mirrorvis.catalog import shipped

scene = Scene(shipped("spherical-shell"))
vol = 4 * math.pi / 3 * (1 - 0.5 ** 3)

# the shell fills its enclosing ball's boundary, so every particle reflects
# where it enters: path lengths vanish and the phase volume check is slack
for rep in verify_scene(scene, vol, 300_000, seed=1):
    print(f"{rep.name:20s} lhs={rep.lhs:10.5f} rhs={rep.rhs:10.5f} "
          f"margin={rep.margin_sigmas:9.3g} sigma  {rep.verdict}")

F = mean_resistance(scene, 300_000, seed=1)
print()
print(f"|D| = {vol:.4f}")
print(f"volume bound from F = {F.mean:.3f}: "
      f"{volume_upper_bound(3, 1.0, F.mean, cap=False):.4f} (uncapped)")
