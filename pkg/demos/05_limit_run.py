"""
The incompressible limit: a moving patch with a pressure jump at its edge.

Inside the region the pressure equals H(W) >= H(0) = 1/2, so it jumps from
at least 1/2 to 0 across the interface.  Two discs grow and merge.
"""

from brinkman_lab import Grid, Omega0, make_linear_growth, run_limit

law = make_linear_growth(1.0, 1.0)
grid = Grid(2, 8.0, 96)
omega0 = Omega0("balls", ((3.3, 4.0), (4.9, 4.0)), (0.7, 0.6))
for s in run_limit(omega0, law, grid, [0.0, 0.5, 1.0]):
    inside = s.theta.values > 0
    print(f"t = {s.t:.1f}: area {inside.sum() * grid.cell_volume:.3f}, "
          f"min p inside {s.p.values[inside].min():.4f}, max |V| {s.V.max_norm():.3f}, "
          f"fixed-point sweeps {s.stats.sweeps}")
