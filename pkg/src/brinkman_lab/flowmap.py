"""
Characteristics of ``u_t + V . Du = 0``.

The flow map ``X(x, s, t)`` is the position at time ``t`` of the
trajectory ``dX/dr = V(X, r)`` that passes through ``x`` at time ``s``.
Transport is done semi-Lagrangian style: the value at ``x`` and time ``t``
is the initial value at the foot point ``X(x, t, t0)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidParams, OutOfSpan
from .grid import Grid, ScalarField, VectorField, interpolate, mollify_vector


class VelocitySampler:
    """
    Velocity field evaluated anywhere in space and time.

    Built either from gridded frames (multilinear in space, linear in
    time between frame timestamps) or from an analytic callable.  A single
    frame is treated as time independent.

    Parameters
    ----------
    frames : sequence of VectorField
    times : sequence of float, optional
        Strictly increasing timestamps, one per frame.
    eps : float
        Spatial mollification radius applied to every frame (0 disables).
    """

    def __init__(self, frames: Sequence[VectorField], times=None, eps: float = 0.0):
        if len(frames) == 0:
            raise InvalidParams("need at least one velocity frame")
        self.grid: Grid = frames[0].grid
        if times is None:
            if len(frames) != 1:
                raise InvalidParams("times required for more than one frame")
            times = [0.0]
        times = np.asarray(times, dtype=float)
        if times.size != len(frames):
            raise InvalidParams("one timestamp per frame")
        if np.any(np.diff(times) <= 0):
            raise InvalidParams("timestamps must be strictly increasing")
        if eps > 0:
            frames = [mollify_vector(f, eps) for f in frames]
        self.eps = float(eps)
        self.times = times
        self._stack = np.stack([f.components for f in frames])
        self._func: Optional[Callable] = None
        self.max_speed = float(np.sqrt((self._stack ** 2).sum(axis=1)).max())

    @classmethod
    def from_function(cls, func: Callable, grid: Grid, t_span=(-np.inf, np.inf),
                      max_speed: Optional[float] = None) -> "VelocitySampler":
        """
        Wrap ``func(points, t) -> (dim, M)`` velocities.

        ``grid`` supplies the length scale for the ODE substep; ``max_speed``
        defaults to the sup over the grid at ``t_span[0]`` (or 0 if unbounded).
        """
        self = cls.__new__(cls)
        self.grid = grid
        self.eps = 0.0
        self.times = np.asarray(t_span, dtype=float)
        self._stack = None
        self._func = func
        if max_speed is None:
            t0 = self.times[0] if np.isfinite(self.times[0]) else 0.0
            vals = np.asarray(func(grid.points(), t0)).reshape(grid.dim, -1)
            max_speed = float(np.sqrt((vals ** 2).sum(axis=0)).max())
        self.max_speed = float(max_speed)
        return self

    @property
    def frozen(self) -> bool:
        return self._func is None and self.times.size == 1

    @property
    def span(self) -> tuple:
        if self.frozen:
            return (-np.inf, np.inf)
        return (float(self.times[0]), float(self.times[-1]))

    def __neg__(self) -> "VelocitySampler":
        out = VelocitySampler.__new__(VelocitySampler)
        out.__dict__.update(self.__dict__)
        if self._func is not None:
            f = self._func
            out._func = lambda x, t: -np.asarray(f(x, t))
        else:
            out._stack = -self._stack
        return out

    def __call__(self, points: np.ndarray, t: float) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(self.grid.dim, -1)
        if self._func is not None:
            return np.asarray(self._func(pts, t), dtype=float).reshape(self.grid.dim, -1)
        if self.frozen:
            return interpolate(self._stack[0], self.grid, pts)
        ts = self.times
        j = int(np.clip(np.searchsorted(ts, t, side="right") - 1, 0, ts.size - 2))
        lam = (t - ts[j]) / (ts[j + 1] - ts[j])
        lam = min(max(lam, 0.0), 1.0)
        a = interpolate(self._stack[j], self.grid, pts)
        if lam == 0.0:
            return a
        b = interpolate(self._stack[j + 1], self.grid, pts)
        return (1.0 - lam) * a + lam * b


def _check_span(V: VelocitySampler, s: float, t: float) -> None:
    lo, hi = V.span
    tol = 1e-12 * max(1.0, abs(s), abs(t))
    if min(s, t) < lo - tol or max(s, t) > hi + tol:
        raise OutOfSpan(f"[{min(s, t)}, {max(s, t)}] leaves velocity span [{lo}, {hi}]")


def ode_substeps(V: VelocitySampler, s: float, t: float) -> int:
    """Substep count giving ``dt_ode = min(h / (4M), |t - s| / 8)``."""
    span = abs(t - s)
    if span == 0:
        return 0
    n = 8
    if V.max_speed > 0:
        n = max(n, int(np.ceil(span * 4.0 * V.max_speed / V.grid.h)))
    return n


def integrate_trajectory(x, s: float, t: float, V: VelocitySampler, n_sub: Optional[int] = None):
    """
    Classical RK4 for ``dX/dr = V(X, r)`` from ``(x, s)`` to time ``t``.

    ``x`` may be a single point ``(dim,)`` or a batch ``(dim, M)``; positions
    are left unwrapped (the sampler itself is periodic).
    """
    _check_span(V, s, t)
    x = np.asarray(x, dtype=float)
    X = x.reshape(V.grid.dim, -1).copy()
    n = ode_substeps(V, s, t) if n_sub is None else n_sub
    if n == 0:
        return X.reshape(x.shape)
    dt = (t - s) / n
    for i in range(n):
        r = s + i * dt
        k1 = V(X, r)
        k2 = V(X + 0.5 * dt * k1, r + 0.5 * dt)
        k3 = V(X + 0.5 * dt * k2, r + 0.5 * dt)
        k4 = V(X + dt * k3, r + dt)
        X = X + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return X.reshape(x.shape)


@dataclass(frozen=True)
class FlowMapField:
    grid: Grid
    source_time: float
    target_time: float
    displacement: VectorField

    def image(self) -> np.ndarray:
        """Images ``X(x, s, t)`` of the cell centres, shape ``(dim, N)``."""
        return self.grid.points() + self.displacement.components.reshape(self.grid.dim, -1)

    def max_displacement(self) -> float:
        return self.displacement.max_norm()


def flow_map(grid: Grid, s: float, t: float, V: VelocitySampler) -> FlowMapField:
    """``X(x, s, t)`` at every cell centre."""
    pts = grid.points()
    X = integrate_trajectory(pts, s, t, V)
    disp = (X - pts).reshape((grid.dim,) + grid.shape)
    return FlowMapField(grid, float(s), float(t), VectorField(grid, disp))


def holder_pair_excess(fmap: FlowMapField, N: float, n_pairs: int = 1000,
                       max_sep: float = 0.5, seed: int = 0) -> float:
    """
    Largest ``|X(x1) - X(x2)| - |x1 - x2|^exp(-N |t - s|)`` over random pairs.

    Pairs are cell centres at separation ``h <= |x1 - x2| <= max_sep``.
    """
    g = fmap.grid
    rng = np.random.default_rng(seed)
    pts = g.points()
    img = fmap.image()
    ncell = pts.shape[1]
    i1 = rng.integers(0, ncell, n_pairs)
    jmax = max(1, int(np.floor(max_sep / g.h / np.sqrt(g.dim))))
    off = rng.integers(-jmax, jmax + 1, size=(g.dim, n_pairs))
    off[0, np.all(off == 0, axis=0)] = 1
    idx1 = np.array(np.unravel_index(i1, g.shape))
    idx2 = (idx1 + off) % g.n_cells
    i2 = np.ravel_multi_index(tuple(idx2), g.shape)
    # unwrap the partner so both points sit in one chart
    x1, x2 = pts[:, i1], pts[:, i1] + off * g.h
    y1 = img[:, i1]
    y2 = img[:, i2] + (x2 - pts[:, i2])
    sep = np.sqrt(((x1 - x2) ** 2).sum(axis=0))
    gap = np.sqrt(((y1 - y2) ** 2).sum(axis=0))
    expo = np.exp(-N * abs(fmap.target_time - fmap.source_time))
    return float(np.max(gap - sep ** expo))


def time_shift_gap(x, t1: float, t2: float, t: float, V: VelocitySampler) -> np.ndarray:
    """``|X(x, t1, t) - X(x, t2, t)|`` for trajectories started at two times."""
    a = integrate_trajectory(x, t1, t, V)
    b = integrate_trajectory(x, t2, t, V)
    a = np.asarray(a).reshape(V.grid.dim, -1)
    b = np.asarray(b).reshape(V.grid.dim, -1)
    return np.sqrt(((a - b) ** 2).sum(axis=0))


def transport_by_characteristics(u0: ScalarField, V: VelocitySampler, t: float,
                                 t0: Optional[float] = None) -> ScalarField:
    """
    Solve ``u_t + V . Du = 0`` from ``u(t0) = u0`` to time ``t``.

    ``u(x, t) = u0(X(x, t, t0))``; multilinear interpolation keeps the
    result inside the range of ``u0``.  ``t0`` defaults to the start of the
    sampler's span (0 for a frozen field).
    """
    if t0 is None:
        lo = V.span[0]
        t0 = 0.0 if not np.isfinite(lo) else lo
    g = u0.grid
    if t == t0:
        return u0
    foot = integrate_trajectory(g.points(), t, t0, V)
    vals = interpolate(u0.values, g, foot).reshape(g.shape)
    return ScalarField(g, np.clip(vals, u0.values.min(), u0.values.max()))


def evolve_patch(theta0: ScalarField, grad_potential: VelocitySampler, t: float,
                 t0: Optional[float] = None) -> ScalarField:
    """
    Level-set transport ``theta_t - D theta . DW = 0``.

    The caller passes the potential gradient ``DW``; characteristics run
    with ``-DW``, so an expanding tumour (``W`` peaked inside) moves its
    zero level set outward.
    """
    if theta0.min() < -1 - 1e-12 or theta0.max() > 1 + 1e-12:
        raise InvalidParams("theta0 must lie in [-1, 1]")
    return transport_by_characteristics(theta0, -grad_potential, t, t0)
