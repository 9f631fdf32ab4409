"""
Finite-stiffness pressure system

    p_t - Dp . DW = k p (W - p + G(p)),      -Lap W + W = p.

Each step splits into transport of ``p`` along ``-DW`` and an exact
reaction substep with ``W`` frozen, followed by a fresh elliptic solve so
that every returned state carries ``W = solve(p)``.  The density is a
diagnostic: ``p = k/(k-1) n^(k-1)``.

Transport is semi-Lagrangian by default.  Because the reaction never
seeds empty cells, the support of ``p`` is carried by the flow; with
``track_support`` a level-set function of the support is transported
alongside ``p`` and cells that leave it are zeroed.  This stops the
interpolation from leaking tiny positive values ahead of the front, which
the stiff reaction would otherwise amplify into a spurious front speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .elliptic import solve_brinkman, velocity_from_potential
from .errors import BoundViolation, CflViolation, InvalidParams, SeedTooClose
from .flowmap import VelocitySampler, transport_by_characteristics
from .grid import CFL_MAX, Grid, ScalarField, VectorField, seam_clearance, upwind_advect
from .growth import GrowthLaw, exact_reaction_step
from .limit import Omega0, level_set

P_TOL = 1e-10


def density_from_pressure(p: ScalarField, k: float) -> ScalarField:
    """``n = ((k-1) p / k)^(1/(k-1))``, zero where ``p = 0``."""
    if p.min() < 0:
        raise InvalidParams("pressure must be nonnegative")
    return p.with_values(((k - 1.0) * p.values / k) ** (1.0 / (k - 1.0)))


def pressure_from_density(n: ScalarField, k: float) -> ScalarField:
    return n.with_values(k / (k - 1.0) * n.values ** (k - 1.0))


@dataclass(frozen=True)
class KLevelConfig:
    grid: Grid
    law: GrowthLaw
    k: float
    t_end: float
    omega0: Omega0
    cfl: float = 0.9
    amplitude: float = 0.2
    margin_cells: float = 2.0
    dt_max: float = 0.01
    advection: str = "semi-lagrangian"
    track_support: bool = True
    elliptic_method: str = "spectral"
    elliptic_tol: float = 1e-10
    elliptic_max_iter: int = 100_000

    def __post_init__(self):
        if self.k < 2:
            raise InvalidParams("k must be >= 2")
        if self.advection not in ("semi-lagrangian", "upwind"):
            raise InvalidParams(f"unknown advection scheme {self.advection!r}")
        if not 0 < self.amplitude <= 1:
            raise InvalidParams("amplitude is a fraction of p_max in (0, 1]")
        if self.t_end < 0 or self.cfl <= 0 or self.dt_max <= 0:
            raise InvalidParams("t_end >= 0, cfl > 0 and dt_max > 0 required")
        if self.law.nu != 1.0:
            raise InvalidParams("solvers work with the rescaled system (nu = 1)")


@dataclass(frozen=True, eq=False)
class KLevelState:
    t: float
    k: float
    p: ScalarField
    n: ScalarField
    W: ScalarField
    V: VectorField
    support: Optional[ScalarField] = None

    @property
    def grid(self) -> Grid:
        return self.p.grid


def initial_pressure(config: KLevelConfig) -> ScalarField:
    """
    ``a * smoothstep(d / margin)`` with ``d`` the depth inside the region.

    The profile vanishes outside the region and equals the amplitude once
    at least ``margin_cells`` cells deep.
    """
    g = config.grid
    d = config.omega0.signed_distance(g)
    s = np.clip(d / (config.margin_cells * g.h), 0.0, 1.0)
    a = config.amplitude * config.law.p_max
    return ScalarField(g, a * s * s * (3.0 - 2.0 * s))


def make_state(t, k, p, law, support=None, method="spectral", tol=1e-10,
               max_iter=100_000) -> KLevelState:
    W, _ = solve_brinkman(p, law.nu, tol, method, max_iter)
    V, _ = velocity_from_potential(W)
    return KLevelState(float(t), float(k), p, density_from_pressure(p, k), W, V, support)


def init_klevel(config: KLevelConfig, p0: Optional[ScalarField] = None) -> KLevelState:
    if config.omega0.seam_margin(config.grid) < config.grid.extent / 8:
        raise SeedTooClose("initial region too close to the periodic seam")
    p = initial_pressure(config) if p0 is None else p0
    support = level_set(config.omega0, config.grid) if config.track_support else None
    return make_state(0.0, config.k, p, config.law, support, config.elliptic_method,
                      config.elliptic_tol, config.elliptic_max_iter)


def check_bounds(state: KLevelState, law: GrowthLaw) -> list:
    """Violations of ``0 <= p <= p_max`` and ``W >= 0`` (empty when clean)."""
    issues = []
    if state.p.min() < -P_TOL:
        issues.append(f"t={state.t}: min p = {state.p.min():.3e} < 0")
    if state.p.max() > law.p_max + P_TOL:
        issues.append(f"t={state.t}: max p = {state.p.max():.6f} > p_max")
    if state.W.min() < -P_TOL:
        issues.append(f"t={state.t}: min W = {state.W.min():.3e} < 0")
    return issues


def transport_pressure(p: ScalarField, V: VectorField, dt: float, advection: str,
                       support: Optional[ScalarField] = None):
    """Carry ``p`` (and the support level set) along ``-V`` for ``dt``."""
    if advection == "upwind":
        p_new = upwind_advect(p, V, dt)
        s_new = None if support is None else upwind_advect(support, V, dt)
    else:
        sampler = -VelocitySampler([V])
        p_new = transport_by_characteristics(p, sampler, dt, 0.0)
        s_new = None if support is None else transport_by_characteristics(support, sampler, dt, 0.0)
    if s_new is not None:
        p_new = p_new.with_values(np.where(s_new.values > 0, p_new.values, 0.0))
    return p_new, s_new


def step_klevel(state: KLevelState, dt: float, law: GrowthLaw,
                advection: str = "semi-lagrangian", method: str = "spectral",
                tol: float = 1e-10, max_iter: int = 100_000) -> KLevelState:
    """
    One split step: transport, exact reaction with frozen ``W``, elliptic solve.

    Raises
    ------
    CflViolation
        If ``dt > CFL_MAX * h / max(sum_d |V_d|)``.
    BoundViolation
        If the new state leaves ``0 <= p <= p_max`` or ``W >= 0``.
    """
    g = state.grid
    speed = state.V.max_l1_speed()
    if speed * dt > CFL_MAX * g.h * (1.0 + 1e-12):
        raise CflViolation(f"dt={dt:.3e} exceeds CFL limit {CFL_MAX * g.h / speed:.3e}")
    p, support = transport_pressure(state.p, state.V, dt, advection, state.support)
    reacted = exact_reaction_step(law, np.clip(p.values, 0.0, law.p_max),
                                  np.maximum(state.W.values, 0.0), state.k, dt)
    p = p.with_values(reacted)
    new = make_state(state.t + dt, state.k, p, law, support, method, tol, max_iter)
    issues = check_bounds(new, law)
    if issues:
        raise BoundViolation("; ".join(issues))
    return new


@dataclass
class KLevelRun:
    snapshots: list
    speed_history: list = field(default_factory=list)
    audit: list = field(default_factory=list)
    steps: int = 0


def _next_dt(t, t_stop, speed, h, cfl, dt_max):
    dt = dt_max if speed <= 0 else min(dt_max, cfl * h / speed)
    remaining = t_stop - t
    if dt >= remaining * (1 - 1e-12):
        return remaining
    if remaining - dt < 0.25 * dt:
        return 0.5 * remaining
    return dt


def run_klevel(config: KLevelConfig, snapshot_times: Sequence[float],
               p0: Optional[ScalarField] = None) -> KLevelRun:
    """
    March to each snapshot time with the CFL-limited step.

    Returns a :class:`KLevelRun` holding the snapshots, the history of
    ``max |V|`` (the empirical speed bound) and the bound audit.
    """
    times = sorted(float(s) for s in snapshot_times)
    if times and (times[0] < 0 or times[-1] > config.t_end + 1e-12):
        raise InvalidParams("snapshot times must lie in [0, t_end]")
    g = config.grid
    if config.cfl > CFL_MAX:
        raise CflViolation(f"cfl={config.cfl} exceeds the stability limit {CFL_MAX}")
    state = init_klevel(config, p0)
    run = KLevelRun([])
    run.audit.extend(check_bounds(state, config.law))
    run.speed_history.append((state.t, state.V.max_norm()))
    for target in times:
        while state.t < target - 1e-13:
            dt = _next_dt(state.t, target, state.V.max_l1_speed(), g.h, config.cfl, config.dt_max)
            state = step_klevel(state, dt, config.law, config.advection,
                                config.elliptic_method, config.elliptic_tol,
                                config.elliptic_max_iter)
            run.steps += 1
            run.speed_history.append((state.t, state.V.max_norm()))
            run.audit.extend(check_bounds(state, config.law))
            if seam_clearance(state.p.values > 0, g) < g.extent / 8:
                raise SeedTooClose("pressure support reached the periodic seam guard")
        run.snapshots.append(replace(state, t=target))
    return run
