"""Scan and then search the ring-of-discs family at fixed reduced volume.

Run:  python demos/search_ring_of_discs.py
"""

import numpy as np

from mirrorvis.bounds import for1_bound
from mirrorvis.search import family, minimize_reduced_resistance, scan_family

fam = family("ring-of-discs", k=3)
kappa = 0.3
print(f"floor for kappa={kappa}: {for1_bound(2, kappa):.5f}")

grid = [(0.3, q) for q in np.linspace(0.0, 1.0, 5)]
for row in scan_family(fam, grid, kappa, n=50_000, seed=0):
    if row.valid:
        rho, q = row.theta
        print(f"rho={rho:.4f} q={q:.2f}  fhat={row.fhat:.4f} +- {row.fhat_stderr:.4f}")
    else:
        print(f"{row.theta}: {row.error}")

res = minimize_reduced_resistance(fam, kappa, budget=40, n=50_000, seed=0)
print(f"best theta={np.round(res.theta, 4)} fhat={res.fhat:.4f} "
      f"after {res.evaluations} evaluations ({res.report.verdict})")
