"""Finite-stiffness Brinkman tumour growth and its incompressible limit on periodic grids."""

from .elliptic import EllipticSolveStats, empirical_log_lipschitz, solve_brinkman, velocity_from_potential
from .errors import *  # noqa: F401,F403
from .flowmap import (
    FlowMapField, VelocitySampler, evolve_patch, flow_map, holder_pair_excess,
    integrate_trajectory, time_shift_gap, transport_by_characteristics,
)
from .grid import (
    Grid, ScalarField, VectorField, central_gradient, interpolate, lp_norm, mollify_space,
    upwind_advect,
)
from .growth import (
    GrowthLaw, H_inverse, exact_reaction_step, make_custom_growth, make_linear_growth,
    make_table_growth, omega_exact, reaction_bounds_check, sigma_log_lipschitz, theta_alpha,
)
from .harness import (
    ConvergenceReport, compare_at_time, convergence_sweep, exclusion_band, initial_layer_probe,
)
from .klevel import (
    KLevelConfig, KLevelState, density_from_pressure, pressure_from_density, run_klevel,
    step_klevel,
)
from .limit import LimitState, Omega0, init_limit, interface_cells, run_limit, solve_w_infinity, step_limit

__version__ = "0.1.0"
