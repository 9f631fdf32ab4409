"""
The incompressible-limit free-boundary system.

The tumour region is the positive set of a level-set function ``theta``
transported by ``theta_t - D theta . DW = 0``.  On the region the pressure
sits on the stable root ``p = H(W)``; ``W`` solves the screened Poisson
equation with that pressure as source, which makes ``W`` the fixed point
of ``W -> solve(H(W) * mask)``.  The map is a sup-norm contraction with
ratio ``max H' < 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .elliptic import solve_brinkman, velocity_from_potential
from .errors import InvalidParams, NoContraction, SeedTooClose
from .flowmap import VelocitySampler, evolve_patch
from .grid import Grid, ScalarField, VectorField, seam_clearance
from .growth import GrowthLaw, H_inverse


@dataclass(frozen=True)
class Omega0:
    """
    Initial tumour region.

    ``shape`` is one of ``ball``, ``balls``, ``annulus`` or ``empty``.
    For balls, ``radii[i]`` belongs to ``centers[i]``; an annulus takes a
    single centre and ``radii = (r_inner, r_outer)``.
    """

    shape: str
    centers: tuple = ()
    radii: tuple = ()

    def __post_init__(self):
        centers = tuple(tuple(float(c) for c in np.atleast_1d(cen)) for cen in self.centers)
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)
        if self.shape not in ("ball", "balls", "annulus", "empty"):
            raise InvalidParams(f"unknown omega0 shape {self.shape!r}")
        if self.shape == "ball" and (len(centers) != 1 or len(radii) != 1):
            raise InvalidParams("ball needs one centre and one radius")
        if self.shape == "balls" and (len(centers) != len(radii) or not centers):
            raise InvalidParams("balls needs matching centres and radii")
        if self.shape == "annulus" and (len(centers) != 1 or len(radii) != 2
                                         or not 0 < radii[0] < radii[1]):
            raise InvalidParams("annulus needs one centre and 0 < r_in < r_out")
        if any(r <= 0 for r in radii):
            raise InvalidParams("radii must be positive")

    @classmethod
    def ball(cls, center, radius) -> "Omega0":
        return cls("ball", (tuple(np.atleast_1d(center)),), (radius,))

    def signed_distance(self, grid: Grid) -> np.ndarray:
        """Distance to the boundary, positive inside (unclamped)."""
        c = grid.coords()
        if self.shape == "empty":
            return np.full(grid.shape, -grid.extent)

        def dist_to(center):
            d = [c[k] - center[k] for k in range(grid.dim)]
            return np.sqrt(sum(x ** 2 for x in d))

        if self.shape == "annulus":
            r = dist_to(self.centers[0])
            r_in, r_out = self.radii
            return np.minimum(r - r_in, r_out - r)
        return np.max([rad - dist_to(cen) for cen, rad in zip(self.centers, self.radii)], axis=0)

    def seam_margin(self, grid: Grid) -> float:
        if self.shape == "empty":
            return np.inf
        rmax = self.radii[-1] if self.shape == "annulus" else None
        margin = np.inf
        for cen, rad in zip(self.centers, self.radii if rmax is None else [rmax]):
            for x in cen:
                margin = min(margin, x - rad, grid.extent - (x + rad))
        return margin

    @property
    def diameter(self) -> float:
        if self.shape == "empty":
            return 0.0
        if self.shape == "annulus":
            return 2.0 * self.radii[1]
        pts = np.array(self.centers)
        rad = np.array(self.radii)
        best = 2.0 * rad.max()
        for i in range(len(rad)):
            for j in range(len(rad)):
                best = max(best, np.linalg.norm(pts[i] - pts[j]) + rad[i] + rad[j])
        return float(best)


def level_set(omega0: Omega0, grid: Grid) -> ScalarField:
    """Signed distance to the boundary of the region, clamped to ``[-1, 1]``."""
    return ScalarField(grid, np.clip(omega0.signed_distance(grid), -1.0, 1.0))


@dataclass(frozen=True)
class FixedPointStats:
    sweeps: int
    final_delta: float
    deltas: tuple = field(default=(), repr=False)


@dataclass(frozen=True, eq=False)
class LimitState:
    t: float
    theta: ScalarField
    W: ScalarField
    p: ScalarField
    n: ScalarField
    V: VectorField
    stats: Optional[FixedPointStats] = None

    @property
    def grid(self) -> Grid:
        return self.theta.grid


def _require_unit_nu(law: GrowthLaw):
    if law.nu != 1.0:
        raise InvalidParams("solvers work with the rescaled system (nu = 1)")


def solve_w_infinity(mask: ScalarField, law: GrowthLaw, tol: float = 1e-11,
                     W_guess: Optional[ScalarField] = None, method: str = "spectral",
                     elliptic_tol: float = 1e-10, max_sweeps: int = 10_000,
                     elliptic_max_iter: int = 100_000):
    """
    Fixed point ``W = solve_brinkman(H(W) * mask)``.

    Returns
    -------
    W, p : ScalarField
        Potential and pressure ``p = H(W) * mask``.
    stats : FixedPointStats

    Raises
    ------
    NoContraction
        If the sweep-to-sweep change fails to decrease ten times running.
    """
    m = mask.values
    if not np.all((m == 0) | (m == 1)):
        raise InvalidParams("mask must be binary")
    grid = mask.grid
    W = grid.zeros() if W_guess is None else W_guess
    if W.min() < 0:
        raise InvalidParams("W_guess must be nonnegative")
    deltas = []
    stalls = 0
    for sweep in range(1, max_sweeps + 1):
        p = ScalarField(grid, H_inverse(law, W.values) * m)
        W_new, _ = solve_brinkman(p, law.nu, elliptic_tol, method, elliptic_max_iter)
        W_new = W_new.with_values(np.maximum(W_new.values, 0.0))
        delta = float(np.abs(W_new.values - W.values).max())
        W = W_new
        stalls = stalls + 1 if deltas and delta >= deltas[-1] else 0
        deltas.append(delta)
        if delta <= tol:
            break
        if stalls >= 10:
            raise NoContraction(f"sweep delta stalled at {delta:.3e}")
    else:
        raise NoContraction(f"no convergence in {max_sweeps} sweeps")
    p = ScalarField(grid, H_inverse(law, W.values) * m)
    return W, p, FixedPointStats(sweep, deltas[-1], tuple(deltas))


def _assemble(t, theta, W, p, stats):
    n = ScalarField(theta.grid, (theta.values > 0).astype(float))
    V, _ = velocity_from_potential(W)
    return LimitState(float(t), theta, W, p, n, V, stats)


def init_limit(omega0: Omega0, law: GrowthLaw, grid: Grid, tol: float = 1e-11,
               method: str = "spectral") -> LimitState:
    """
    Initial limit state: clamped signed distance and the matching potential.

    Raises
    ------
    SeedTooClose
        If the region comes within ``extent / 8`` of the periodic seam.
    """
    _require_unit_nu(law)
    if omega0.seam_margin(grid) < grid.extent / 8:
        raise SeedTooClose("initial region too close to the periodic seam")
    theta = level_set(omega0, grid)
    mask = ScalarField(grid, (theta.values > 0).astype(float))
    W, p, stats = solve_w_infinity(mask, law, tol, None, method)
    return _assemble(0.0, theta, W, p, stats)


def step_limit(state: LimitState, dt: float, law: GrowthLaw, tol: float = 1e-11,
               method: str = "spectral", corrector: bool = False) -> LimitState:
    """
    Transport the region over ``dt``, then re-solve the potential.

    With ``corrector`` the transport is repeated using velocity frames at
    both ends of the step (Heun-type), which makes the interface motion
    second order in ``dt``.
    """
    grid = state.grid
    sampler = VelocitySampler([state.V])
    theta = evolve_patch(state.theta, sampler, dt, 0.0)
    mask = ScalarField(grid, (theta.values > 0).astype(float))
    W, p, stats = solve_w_infinity(mask, law, tol, state.W, method)
    if corrector:
        V_pred, _ = velocity_from_potential(W)
        sampler = VelocitySampler([state.V, V_pred], [0.0, dt])
        theta = evolve_patch(state.theta, sampler, dt, 0.0)
        mask = ScalarField(grid, (theta.values > 0).astype(float))
        W, p, stats = solve_w_infinity(mask, law, tol, W, method)
    return _assemble(state.t + dt, theta, W, p, stats)


def _next_dt(t, t_stop, speed, h, cfl, dt_max):
    dt = dt_max if speed <= 0 else min(dt_max, cfl * h / speed)
    remaining = t_stop - t
    if dt >= remaining * (1 - 1e-12):
        return remaining
    # avoid leaving a sliver step before the stop time
    if remaining - dt < 0.25 * dt:
        return 0.5 * remaining
    return dt


def run_limit(omega0: Omega0, law: GrowthLaw, grid: Grid, snapshot_times: Sequence[float],
              cfl: float = 0.9, dt_max: float = 0.01, tol: float = 1e-11,
              method: str = "spectral", corrector: bool = False) -> list:
    """March the limit system and return states at the requested times."""
    times = sorted(float(s) for s in snapshot_times)
    if times and times[0] < 0:
        raise InvalidParams("snapshot times must be nonnegative")
    state = init_limit(omega0, law, grid, tol, method)
    out = []
    for target in times:
        while state.t < target - 1e-13:
            dt = _next_dt(state.t, target, state.V.max_l1_speed(), grid.h, cfl, dt_max)
            state = step_limit(state, dt, law, tol, method, corrector)
            if seam_clearance(state.theta.values > 0, grid) < grid.extent / 8:
                raise SeedTooClose("tumour region reached the periodic seam guard")
        state = LimitState(target, state.theta, state.W, state.p, state.n, state.V, state.stats)
        out.append(state)
    return out


def interface_cells(theta: ScalarField):
    """
    Cells on the inner side of the zero level set.

    A cell is an interface cell when ``theta > 0`` there and ``theta <= 0``
    in at least one face neighbour.  Returns ``(mask, measure)`` with
    ``measure = count * h^dim``.
    """
    g = theta.grid
    pos = theta.values > 0
    edge = np.zeros_like(pos)
    for d in range(g.dim):
        edge |= pos & ~np.roll(pos, 1, axis=d)
        edge |= pos & ~np.roll(pos, -1, axis=d)
    mask = ScalarField(g, edge.astype(float))
    return mask, float(edge.sum()) * g.cell_volume
