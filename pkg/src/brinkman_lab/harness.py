"""
k-ladder convergence diagnostics against the limit run.

Every error is measured off an exclusion band around the limit interface,
because uniform convergence can only hold away from the moving boundary.
The lower/upper weak limits over ``k`` cannot be formed from a finite
ladder; positivity sets at threshold ``tol_pos`` and their Hausdorff
distance to the limit region stand in for them.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import astuple, dataclass, fields, replace
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import BandTooNarrow, BandTooWide, ConvergenceAssertionError, GridMismatch, InvalidParams
from .grid import Grid, ScalarField, central_gradient, lp_norm, second_differences
from .growth import H_inverse
from .io import rows_csv
from .klevel import KLevelConfig, KLevelState, run_klevel
from .limit import LimitState, interface_cells, run_limit

CSV_HEADER = (
    "k", "t", "delta", "sup_err_p", "sup_err_n", "w2p_err",
    "interface_measure", "min_p_interface", "hausdorff_pos_set",
)

REPORT_NOTES = (
    "Positivity sets are thresholded at tol_pos and compared by Hausdorff distance;"
    " they stand in for the lower/upper weak limits in k, which a finite ladder cannot form.",
    "Convergence holds along a subsequence; trends over a finite k-ladder are evidence, not proof.",
)

MONOTONE_SLACK = 1.10


def _periodic_tree(points: np.ndarray, grid: Grid):
    # cKDTree needs coordinates in [0, boxsize)
    return cKDTree(np.mod(points.T, grid.extent), boxsize=grid.extent)


def _sign_change_cells(theta: ScalarField) -> np.ndarray:
    pos = theta.values > 0
    edge = np.zeros_like(pos)
    for d in range(theta.grid.dim):
        for shift in (1, -1):
            edge |= pos != np.roll(pos, shift, axis=d)
    return edge


def distance_to_set(cells: np.ndarray, grid: Grid) -> np.ndarray:
    """Periodic Euclidean distance from every cell centre to the selected cells."""
    if not cells.any():
        return np.full(grid.shape, np.inf)
    pts = grid.points()
    tree = _periodic_tree(pts[:, cells.reshape(-1)], grid)
    d, _ = tree.query(np.mod(pts.T, grid.extent))
    return d.reshape(grid.shape)


def exclusion_band(theta: ScalarField, delta: float) -> ScalarField:
    """
    Cells farther than ``delta`` from the interface.

    The interface is the set of cells with a sign change of ``theta``
    across some face.

    Raises
    ------
    BandTooNarrow
        If ``delta < 2h``.
    BandTooWide
        If no cell survives on the inside or on the outside.
    """
    g = theta.grid
    if delta < 2.0 * g.h * (1 - 1e-12):
        raise BandTooNarrow(f"delta={delta} is below 2h={2 * g.h}")
    far = distance_to_set(_sign_change_cells(theta), g) > delta
    inside = theta.values > 0
    if not (far & inside).any() or not (far & ~inside).any():
        raise BandTooWide(f"delta={delta} leaves one side of the interface empty")
    return ScalarField(g, far.astype(float))


def hausdorff_cells(a: np.ndarray, b: np.ndarray, grid: Grid) -> float:
    """
    Discrete Hausdorff distance between two cell sets (periodic metric).

    Two empty sets are at distance 0; an empty and a nonempty set are
    reported at the box extent, the largest meaningful distance.
    """
    if not a.any() and not b.any():
        return 0.0
    if not a.any() or not b.any():
        return float(grid.extent)
    da = distance_to_set(b, grid)[a].max()
    db = distance_to_set(a, grid)[b].max()
    return float(max(da, db))


@dataclass(frozen=True)
class ReportRow:
    k: float
    t: float
    delta: float
    sup_err_p: float
    sup_err_n: float
    w2p_err: float
    interface_measure: float
    min_p_interface: float
    hausdorff_pos_set: float
    n_inner_dev: float = 0.0
    p_norm: float = 2.0

    def csv_values(self) -> tuple:
        return astuple(self)[: len(CSV_HEADER)]


def default_window(grid: Grid) -> ScalarField:
    """The middle half of the box along every axis."""
    ax = grid.axis()
    inside = (ax >= 0.25 * grid.extent) & (ax <= 0.75 * grid.extent)
    mesh = np.meshgrid(*([inside] * grid.dim), indexing="ij")
    return ScalarField(grid, np.logical_and.reduce(mesh).astype(float))


def w2p_distance(Wa: ScalarField, Wb: ScalarField, p: float,
                 window: Optional[ScalarField] = None) -> float:
    """``|D|_p + |grad D|_p + |D^2 D|_p`` on the window, ``D = Wa - Wb``."""
    window = default_window(Wa.grid) if window is None else window
    diff = Wa - Wb
    total = lp_norm(diff, p, window)
    grad = central_gradient(diff)
    total += lp_norm(grad.magnitude(), p, window)
    hess = np.sqrt(sum(d2 ** 2 for d2 in second_differences(diff)))
    total += lp_norm(diff.with_values(hess), p, window)
    return total


def compare_at_time(kstate: KLevelState, lstate: LimitState, delta: float,
                    p_norm: float = 2.0, tol_pos: float = 1e-3,
                    window: Optional[ScalarField] = None, time_tol: float = 1e-9) -> ReportRow:
    """
    All convergence diagnostics for one ``(k, t)`` pair.

    ``tol_pos`` is an absolute pressure threshold for the positivity set
    of ``p_k``.

    Raises
    ------
    GridMismatch
        If the two states live on different grids or at different times.
    """
    g = lstate.grid
    if kstate.grid != g:
        raise GridMismatch("k-level and limit states use different grids")
    if abs(kstate.t - lstate.t) > time_tol:
        raise GridMismatch(f"times differ: {kstate.t} vs {lstate.t}")
    band = exclusion_band(lstate.theta, delta)
    inner = band.values * (lstate.theta.values > 0)
    sup_err_p = lp_norm(kstate.p - lstate.p, np.inf, band)
    sup_err_n = lp_norm(kstate.n - lstate.n, np.inf, band)
    n_inner = lp_norm(kstate.n - 1.0, np.inf, band.with_values(inner))
    ring, measure = interface_cells(lstate.theta)
    ring_sel = ring.values > 0
    min_p = float(lstate.p.values[ring_sel].min()) if ring_sel.any() else 0.0
    haus = hausdorff_cells(kstate.p.values > tol_pos, lstate.theta.values > 0, g)
    w2p = w2p_distance(kstate.W, lstate.W, p_norm, window)
    return ReportRow(float(kstate.k), float(lstate.t), float(delta), sup_err_p, sup_err_n,
                     w2p, measure, min_p, haus, n_inner, float(p_norm))


@dataclass
class ConvergenceReport:
    rows: list
    notes: tuple = REPORT_NOTES

    def to_csv(self) -> str:
        return rows_csv(CSV_HEADER, [r.csv_values() for r in self.rows])

    def at_time(self, t: float) -> list:
        return sorted((r for r in self.rows if abs(r.t - t) < 1e-12), key=lambda r: r.k)

    def times(self) -> list:
        return sorted({r.t for r in self.rows})

    def summary(self) -> str:
        lines = ["# " + note for note in self.notes]
        for t in self.times():
            lines.append(f"t = {t:g}")
            for r in self.at_time(t):
                lines.append(
                    f"  k={r.k:>7g}  sup|p_k-p|={r.sup_err_p:.3e}  sup|n_k-n|={r.sup_err_n:.3e}"
                    f"  W2p={r.w2p_err:.3e}  hausdorff={r.hausdorff_pos_set:.3e}"
                    f"  min p ring={r.min_p_interface:.4f}"
                )
        return "\n".join(lines)

    def monotonicity_failures(self, slack: float = MONOTONE_SLACK,
                              columns=("sup_err_p", "sup_err_n")) -> list:
        """Pairs along the ladder where an error grows by more than ``slack``."""
        bad = []
        for t in self.times():
            rows = self.at_time(t)
            for a, b in zip(rows, rows[1:]):
                for col in columns:
                    ea, eb = getattr(a, col), getattr(b, col)
                    if eb > slack * ea + 1e-12:
                        bad.append(f"t={t:g} {col}: k={a.k:g} -> {b.k:g} grew {ea:.3e} -> {eb:.3e}")
        return bad


def worker_count() -> int:
    raw = os.environ.get("BRINKMAN_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def convergence_sweep(config: KLevelConfig, ks: Sequence[float], times: Sequence[float],
                      delta: float, p_norm: float = 2.0, tol_pos: Optional[float] = None,
                      check: bool = True, limit_corrector: bool = False) -> ConvergenceReport:
    """
    Run the limit system once and the k-level system for every ``k``.

    ``config`` supplies grid, law, initial region and step policy; its
    ``k`` is replaced by each ladder entry.  With ``check`` the sup errors
    for ``p`` and ``n`` must be nonincreasing along the ladder up to a 10%
    slack.

    Raises
    ------
    ConvergenceAssertionError
        If ``check`` is set and the ladder is not monotone.
    """
    ks = [float(k) for k in ks]
    if len(ks) < 2 or any(b < a for a, b in zip(ks, ks[1:])):
        raise InvalidParams("ks must hold at least two nondecreasing entries")
    times = sorted(float(t) for t in times)
    if not times or times[0] <= 0:
        raise InvalidParams("comparison times must be positive")
    if delta < 2.0 * config.grid.h:
        raise BandTooNarrow(f"delta={delta} is below 2h={2 * config.grid.h}")
    tol_pos = 1e-3 * config.law.p_max if tol_pos is None else tol_pos
    t_end = max(config.t_end, times[-1])
    limit_states = run_limit(config.omega0, config.law, config.grid, times,
                             cfl=config.cfl, dt_max=config.dt_max,
                             method=config.elliptic_method, corrector=limit_corrector)

    def one(k):
        return run_klevel(replace(config, k=k, t_end=t_end), times)

    with ThreadPoolExecutor(max_workers=min(worker_count(), len(ks))) as pool:
        runs = list(pool.map(one, ks))
    rows = []
    for k, run in zip(ks, runs):
        for ks_state, ls_state in zip(run.snapshots, limit_states):
            rows.append(compare_at_time(ks_state, ls_state, delta, p_norm, tol_pos))
    report = ConvergenceReport(rows)
    if check:
        bad = report.monotonicity_failures()
        if bad:
            raise ConvergenceAssertionError("; ".join(bad))
    return report


def initial_layer_probe(config: KLevelConfig, k: float, t_probe: float,
                        amplitude: Optional[float] = None, erosion: Optional[float] = None,
                        p0: Optional[ScalarField] = None) -> float:
    """
    ``sup |p_k - H(W_k)|`` over the eroded initial region at ``t_probe``.

    ``erosion`` defaults to a tenth of the region's diameter.
    """
    law = config.law
    if t_probe < 10.0 / (k * law.alpha_bar * law.p_max) * (1 - 1e-12):
        raise InvalidParams("t_probe is shorter than ten reaction relaxation times")
    cfg = replace(config, k=float(k), t_end=max(config.t_end, t_probe),
                  amplitude=config.amplitude if amplitude is None else amplitude)
    run = run_klevel(cfg, [t_probe], p0)
    state = run.snapshots[-1]
    erosion = 0.1 * config.omega0.diameter if erosion is None else erosion
    core = config.omega0.signed_distance(config.grid) >= erosion
    if not core.any():
        raise InvalidParams("erosion leaves no interior cells")
    gap = np.abs(state.p.values - H_inverse(law, state.W.values))
    return float(gap[core].max())
