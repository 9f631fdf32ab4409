"""
The finite-stiffness system at increasing k.

Pressure is transported along -DW and relaxed by the exact logistic step.
As k grows the density inside the tumour approaches 1 and the pressure
approaches H(W).
"""

import numpy as np

from brinkman_lab import Grid, KLevelConfig, Omega0, make_linear_growth, run_klevel
from brinkman_lab.growth import H_inverse

law = make_linear_growth(1.0, 1.0)
grid = Grid(1, 8.0, 512)
for k in (20, 80, 320):
    cfg = KLevelConfig(grid, law, k, t_end=0.5, omega0=Omega0.ball(4.0, 1.0))
    run = run_klevel(cfg, [0.1, 0.5])
    s = run.snapshots[-1]
    c = grid.n_cells // 2
    gap = abs(s.p.values[c] - H_inverse(law, s.W.values[c]))
    print(f"k = {k:4d}: {run.steps} steps, n(centre) = {s.n.values[c]:.4f}, "
          f"|p - H(W)| at centre = {gap:.2e}, audit clean: {not run.audit}")
