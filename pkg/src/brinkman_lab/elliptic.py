"""
Screened Poisson solves ``-nu Lap_h W + W = p`` on the periodic grid.

Both backends target the same discrete operator (3-point / 5-point
Laplacian).  The spectral backend divides by the stencil's Fourier symbol,
so it is exact up to rounding; red-black SOR is kept as an independently
coded cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, NoConvergence
from .grid import ScalarField, VectorField, central_gradient


@dataclass(frozen=True)
class EllipticSolveStats:
    iterations: int
    residual_linf: float
    method: str


def apply_operator(W: ScalarField, nu: float) -> np.ndarray:
    """``-nu Lap_h W + W`` as a plain array."""
    g = W.grid
    u = W.values
    lap = sum(np.roll(u, 1, axis=d) + np.roll(u, -1, axis=d) for d in range(g.dim))
    lap = (lap - 2 * g.dim * u) / g.h ** 2
    return -nu * lap + u


def _symbol(grid, nu):
    n = grid.n_cells
    m_full = np.arange(n)
    m_half = np.arange(n // 2 + 1)
    eig = 4.0 * np.sin(np.pi * m_full / n) ** 2 / grid.h ** 2
    eig_half = 4.0 * np.sin(np.pi * m_half / n) ** 2 / grid.h ** 2
    if grid.dim == 1:
        return 1.0 + nu * eig_half
    return 1.0 + nu * (eig[:, None] + eig_half[None, :])


def _solve_spectral(p, nu):
    g = p.grid
    rhs = np.fft.rfftn(p.values)
    W = np.fft.irfftn(rhs / _symbol(g, nu), s=g.shape, axes=tuple(range(g.dim)))
    return W, 1


def _solve_sor(p, nu, tol, max_iter, W0=None):
    g = p.grid
    h2 = g.h ** 2
    diag = 1.0 + 2 * g.dim * nu / h2
    rho = (2 * g.dim * nu / h2) / diag  # Jacobi spectral radius bound
    omega = 2.0 / (1.0 + np.sqrt(1.0 - rho ** 2))
    idx = np.indices(g.shape).sum(axis=0)
    colors = [(idx % 2) == 0, (idx % 2) == 1]
    u = np.zeros(g.shape) if W0 is None else np.array(W0, dtype=float)
    f = p.values
    target = tol * (1.0 + np.abs(f).max())
    for it in range(1, max_iter + 1):
        for color in colors:
            nb = sum(np.roll(u, 1, axis=d) + np.roll(u, -1, axis=d) for d in range(g.dim))
            gs = (f + nu * nb / h2) / diag
            u = np.where(color, (1.0 - omega) * u + omega * gs, u)
        if it % 10 == 0 or it == max_iter:
            res = np.abs(apply_operator(ScalarField(g, u), nu) - f).max()
            if res <= target:
                return u, it
    raise NoConvergence(f"SOR did not converge in {max_iter} sweeps")


def solve_brinkman(p: ScalarField, nu: float = 1.0, tol: float = 1e-10,
                   method: str = "spectral", max_iter: int = 100_000):
    """
    Solve ``-nu Lap_h W + W = p``.

    Returns
    -------
    W : ScalarField
    stats : EllipticSolveStats

    Raises
    ------
    NoConvergence
        If the residual target ``tol * (1 + |p|_inf)`` is not met.
    """
    if nu <= 0:
        raise InvalidParams("nu must be positive")
    if not (1e-13 <= tol <= 1e-6):
        raise InvalidParams(f"tol={tol} outside [1e-13, 1e-6]")
    if method == "spectral":
        W, iters = _solve_spectral(p, nu)
    elif method == "sor":
        W, iters = _solve_sor(p, nu, tol, max_iter)
    else:
        raise InvalidParams(f"unknown elliptic method {method!r}")
    Wf = ScalarField(p.grid, W)
    res = float(np.abs(apply_operator(Wf, nu) - p.values).max())
    if res > tol * (1.0 + np.abs(p.values).max()):
        raise NoConvergence(f"residual {res:.3e} above tolerance")
    return Wf, EllipticSolveStats(iters, res, method)


def velocity_from_potential(W: ScalarField):
    """
    Gradient of the potential and its sup norm.

    Returns ``(V, M)`` where ``M = max |V|`` bounds the speed of every
    characteristic.
    """
    V = central_gradient(W)
    return V, V.max_norm()


def _offsets(grid, samples):
    h = grid.h
    jmax = int(np.floor(0.5 / h))
    if grid.dim == 1:
        offs = [(j,) for j in range(1, jmax + 1)]
    else:
        offs = [
            (i, j)
            for i in range(-jmax, jmax + 1)
            for j in range(0, jmax + 1)
            if (j > 0 or i > 0) and np.hypot(i, j) * h <= 0.5
        ]
    offs.sort(key=lambda o: np.linalg.norm(o))
    if len(offs) > samples:
        # keep a log-spread subset so short and long separations both appear
        pick = np.unique(np.round(np.geomspace(1, len(offs), samples)).astype(int) - 1)
        offs = [offs[i] for i in pick]
    return offs


def empirical_log_lipschitz(V: VectorField, samples: int = 200) -> float:
    """
    Empirical log-Lipschitz constant of a velocity field.

    For each sampled lattice offset ``r`` with ``h <= |r| <= 1/2`` the
    ratio ``|V(x) - V(x + r)| / (|r| |ln |r||)`` is maximised over *every*
    base cell ``x``.  Sweeping all base cells makes the estimate
    nonincreasing under convolution with a probability kernel.
    """
    if samples < 100:
        raise InvalidParams("samples must be >= 100")
    g = V.grid
    best = 0.0
    for off in _offsets(g, samples):
        r = float(np.linalg.norm(off)) * g.h
        shifted = np.roll(V.components, tuple(-o for o in off), axis=tuple(range(1, g.dim + 1)))
        diff = np.sqrt(((shifted - V.components) ** 2).sum(axis=0)).max()
        best = max(best, float(diff) / (r * abs(np.log(r))))
    return best
