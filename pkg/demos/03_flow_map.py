"""
Characteristics of a Brinkman velocity field.

A log-Lipschitz velocity gives flow maps that are Holder continuous with
exponent exp(-N t).  We build the flow map of the velocity produced by a
disc of tumour and check the pair bound, then move a patch with it.
"""

import numpy as np

from brinkman_lab import (
    Grid, Omega0, VelocitySampler, empirical_log_lipschitz, evolve_patch, flow_map,
    holder_pair_excess, solve_brinkman, velocity_from_potential,
)
from brinkman_lab.limit import interface_cells, level_set

g = Grid(2, 8.0, 128)
theta0 = level_set(Omega0.ball((4.0, 4.0), 1.0), g)
W, _ = solve_brinkman(theta0.with_values((theta0.values > 0).astype(float)))
V, M = velocity_from_potential(W)
N = empirical_log_lipschitz(V)
sampler = VelocitySampler([V])

fmap = flow_map(g, 0.0, 1.0, sampler)
print(f"max displacement {fmap.max_displacement():.4f} <= M t = {M:.4f}")
excess = holder_pair_excess(fmap, N, n_pairs=1000)
print(f"Holder pair excess {excess:.3e} (slack allowed: 4h = {4 * g.h:.3e})")

# The patch moves along -DW, so the disc expands.
theta = evolve_patch(theta0, VelocitySampler([velocity_from_potential(W)[0]]), 1.0)
area = lambda th: (th.values > 0).sum() * g.cell_volume
print(f"area {area(theta0):.3f} -> {area(theta):.3f} after t = 1 with a frozen potential")
print(f"interface measure {interface_cells(theta)[1]:.3f}")
