"""
Uniform periodic grids and the discrete fields that live on them.

Cells are indexed ``i = 0 .. n_cells-1`` per axis with centres at
``(i + 1/2) h`` and ``h = extent / n_cells``; the box ``[0, extent)^dim``
wraps around in every direction.  Every operation in this module is pure:
inputs are never modified and fresh, read-only fields are returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .errors import CflViolation, EmptyMask, InvalidParams, NonFiniteField

#: Largest admissible Courant number for the donor-cell update.
CFL_MAX = 0.9


@dataclass(frozen=True)
class Grid:
    """Uniform periodic box in one or two space dimensions."""

    dim: int
    extent: float
    n_cells: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidParams(f"dim must be 1 or 2, got {self.dim}")
        if self.n_cells < 8:
            raise InvalidParams(f"n_cells must be >= 8, got {self.n_cells}")
        if not self.extent > 0:
            raise InvalidParams(f"extent must be positive, got {self.extent}")
        object.__setattr__(self, "extent", float(self.extent))
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def h(self) -> float:
        return self.extent / self.n_cells

    @property
    def shape(self) -> tuple:
        return (self.n_cells,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    def axis(self) -> np.ndarray:
        """Cell-centre coordinates along one axis."""
        return (np.arange(self.n_cells) + 0.5) * self.h

    def coords(self) -> np.ndarray:
        """Cell centres as an array of shape ``(dim, *shape)``."""
        ax = self.axis()
        return np.stack(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def points(self) -> np.ndarray:
        """Cell centres flattened to shape ``(dim, n_cells**dim)``."""
        return self.coords().reshape(self.dim, -1)

    def zeros(self) -> "ScalarField":
        return ScalarField(self, np.zeros(self.shape))

    def full(self, value: float) -> "ScalarField":
        return ScalarField(self, np.full(self.shape, float(value)))

    def from_function(self, func) -> "ScalarField":
        """Sample ``func(*coords)`` at the cell centres."""
        c = self.coords()
        return ScalarField(self, np.broadcast_to(func(*c), self.shape))

    def refine(self, factor: int = 2) -> "Grid":
        return Grid(self.dim, self.extent, self.n_cells * factor)


def _frozen(values: np.ndarray, shape: tuple) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.shape != shape:
        raise InvalidParams(f"values have shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteField("field contains NaN or Inf")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One real value per cell."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, self.grid.shape))

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.grid, values)

    def __add__(self, other):
        return self.with_values(self.values + _raw(other))

    def __sub__(self, other):
        return self.with_values(self.values - _raw(other))

    def __mul__(self, other):
        return self.with_values(self.values * _raw(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True, eq=False)
class VectorField:
    """``dim`` real components per cell, stored as ``(dim, *shape)``."""

    grid: Grid
    components: np.ndarray

    def __post_init__(self):
        shape = (self.grid.dim,) + self.grid.shape
        object.__setattr__(self, "components", _frozen(self.components, shape))

    def __neg__(self):
        return VectorField(self.grid, -self.components)

    def magnitude(self) -> ScalarField:
        return ScalarField(self.grid, np.sqrt((self.components ** 2).sum(axis=0)))

    def max_norm(self) -> float:
        """Largest Euclidean length over the grid."""
        return float(np.sqrt((self.components ** 2).sum(axis=0)).max())

    def max_l1_speed(self) -> float:
        """Largest ``sum_d |v_d|``; this is the speed the explicit CFL rule uses."""
        return float(np.abs(self.components).sum(axis=0).max())


def _raw(x):
    if isinstance(x, ScalarField):
        return x.values
    return x


def check_same_grid(*fields) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise InvalidParams("fields live on different grids")
    return grid


def central_gradient(f: ScalarField) -> VectorField:
    """Second-order centred differences with periodic wraparound."""
    g = f.grid
    comps = [
        (np.roll(f.values, -1, axis=d) - np.roll(f.values, 1, axis=d)) / (2.0 * g.h)
        for d in range(g.dim)
    ]
    return VectorField(g, np.stack(comps))


def second_differences(f: ScalarField) -> list:
    """All second-order centred partial differences ``D_ij f`` (i <= j)."""
    g = f.grid
    u = f.values
    out = []
    for i in range(g.dim):
        for j in range(i, g.dim):
            if i == j:
                d2 = (np.roll(u, -1, axis=i) - 2.0 * u + np.roll(u, 1, axis=i)) / g.h ** 2
            else:
                up = np.roll(u, -1, axis=i)
                dn = np.roll(u, 1, axis=i)
                d2 = (
                    np.roll(up, -1, axis=j) - np.roll(up, 1, axis=j)
                    - np.roll(dn, -1, axis=j) + np.roll(dn, 1, axis=j)
                ) / (4.0 * g.h ** 2)
            out.append(d2)
    return out


def upwind_advect(f: ScalarField, v: VectorField, dt: float) -> ScalarField:
    """
    One donor-cell step of ``f_t - v . Df = 0``.

    Information travels with velocity ``-v``, so the stencil reaches into
    the cell the characteristic comes from.  The update is a convex
    combination of neighbouring values whenever
    ``dt * max(sum_d |v_d|) <= h``; anything beyond ``CFL_MAX`` of that
    limit is rejected.

    Raises
    ------
    CflViolation
        If ``dt > CFL_MAX * h / max(sum_d |v_d|)``.
    """
    g = check_same_grid(f, v)
    speed = v.max_l1_speed()
    if dt < 0:
        raise InvalidParams("dt must be nonnegative")
    if speed * dt > CFL_MAX * g.h * (1.0 + 1e-12):
        raise CflViolation(
            f"dt={dt:.3e} exceeds CFL limit {CFL_MAX * g.h / speed:.3e}"
        )
    u = f.values
    lam = dt / g.h
    out = u.copy()
    for d in range(g.dim):
        c = -v.components[d]  # characteristic velocity
        back = u - np.roll(u, 1, axis=d)
        fwd = np.roll(u, -1, axis=d) - u
        out -= lam * (np.maximum(c, 0.0) * back + np.minimum(c, 0.0) * fwd)
    return ScalarField(g, out)


def lp_norm(f: ScalarField, p: float, mask: Optional[ScalarField] = None) -> float:
    """
    Discrete ``L^p`` norm ``(sum |f|^p h^dim)^(1/p)``, or the max for ``p = inf``.

    Raises
    ------
    EmptyMask
        If a mask is given and selects no cells.
    """
    vals = np.abs(f.values)
    if mask is not None:
        check_same_grid(f, mask)
        sel = mask.values > 0.5
        if not sel.any():
            raise EmptyMask("mask selects no cells")
        vals = vals[sel]
    if np.isinf(p):
        return float(vals.max())
    if p < 1:
        raise InvalidParams(f"p must be >= 1, got {p}")
    return float((np.sum(vals ** p) * f.grid.cell_volume) ** (1.0 / p))


def bump_kernel(grid: Grid, eps: float) -> np.ndarray:
    """Discrete ``exp(-1/(1-|x/eps|^2))`` bump on the cell lattice, mass 1."""
    m = int(np.floor(eps / grid.h))
    offs = np.arange(-m, m + 1) * grid.h
    mesh = np.meshgrid(*([offs] * grid.dim), indexing="ij")
    r2 = sum(x ** 2 for x in mesh) / eps ** 2
    kern = np.zeros_like(r2)
    inside = r2 < 1.0
    kern[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return kern / kern.sum()


def mollify_space(f: ScalarField, eps: float) -> ScalarField:
    """
    Periodic convolution with a nonnegative bump of radius ``eps``.

    The discrete kernel is renormalised to unit mass, so constants are
    reproduced and the output stays inside ``[min f, max f]``.
    """
    if eps < f.grid.h:
        raise InvalidParams(f"eps={eps} must be >= h={f.grid.h}")
    kern = bump_kernel(f.grid, eps)
    out = ndimage.convolve(f.values, kern, mode="wrap")
    # keep rounding from leaking outside the input range
    out = np.clip(out, f.values.min(), f.values.max())
    return f.with_values(out)


def mollify_vector(v: VectorField, eps: float) -> VectorField:
    comps = [mollify_space(ScalarField(v.grid, c), eps).values for c in v.components]
    return VectorField(v.grid, np.stack(comps))


def interpolate(values: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """
    Periodic multilinear interpolation of cell-centred ``values``.

    ``points`` has shape ``(dim, M)``; the result has shape ``(M,)``.
    Leading axes of ``values`` beyond the grid shape are interpolated
    componentwise, giving shape ``(*lead, M)``.
    """
    pts = np.asarray(points, dtype=float).reshape(grid.dim, -1)
    n = grid.n_cells
    lead = values.shape[: values.ndim - grid.dim]
    flat = values.reshape(lead + (-1,))
    s = pts / grid.h - 0.5
    base = np.floor(s)
    w = s - base
    base = base.astype(np.int64) % n
    out = 0.0
    for corner in range(2 ** grid.dim):
        idx = 0
        weight = 1.0
        for d in range(grid.dim):
            bit = (corner >> d) & 1
            i = (base[d] + bit) % n
            idx = idx * n + i
            weight = weight * (w[d] if bit else 1.0 - w[d])
        out = out + weight * flat[..., idx]
    return out


def periodic_delta(a: np.ndarray, b: np.ndarray, extent: float) -> np.ndarray:
    """Shortest periodic displacement ``a - b`` per component."""
    d = np.asarray(a) - np.asarray(b)
    return d - extent * np.round(d / extent)


def seam_clearance(mask: np.ndarray, grid: Grid) -> float:
    """Distance from the cells selected by ``mask`` to the wrap seam."""
    if not mask.any():
        return np.inf
    ax = grid.axis()
    dist = np.minimum(ax, grid.extent - ax)
    clearance = np.inf
    for d in range(grid.dim):
        occupied = mask.any(axis=tuple(a for a in range(grid.dim) if a != d))
        clearance = min(clearance, float(dist[occupied].min()))
    return clearance - 0.5 * grid.h
