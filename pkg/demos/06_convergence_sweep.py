"""
k-ladder against the limit, measured off a band around the interface.

This is the 1D acceptance run: errors in pressure and density fall with k
until they reach the grid floor, and the k = 320 positivity set sits within
a cell of the limit region.
"""

from brinkman_lab import Grid, KLevelConfig, Omega0, convergence_sweep, make_linear_growth

cfg = KLevelConfig(Grid(1, 8.0, 1024), make_linear_growth(1.0, 1.0), 20.0, 0.5,
                   Omega0.ball(4.0, 1.0))
report = convergence_sweep(cfg, [20, 80, 320], [0.25, 0.5], delta=0.1)
print(report.summary())
print()
print(report.to_csv())
