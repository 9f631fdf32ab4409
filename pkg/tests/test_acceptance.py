"""
Acceptance criteria 1-7 at their stated tolerances and time budgets.

Each test records one PASS/FAIL line; the lines are printed together at the
end of the pytest run (see ``conftest.pytest_terminal_summary``) and also
when this file is executed directly.
"""

import time

import numpy as np
import pytest

from brinkman_lab.elliptic import empirical_log_lipschitz, solve_brinkman, velocity_from_potential
from brinkman_lab.flowmap import (
    VelocitySampler, flow_map, holder_pair_excess, integrate_trajectory, time_shift_gap,
    transport_by_characteristics,
)
from brinkman_lab.grid import Grid, ScalarField, VectorField, lp_norm, upwind_advect
from brinkman_lab.growth import H_inverse, make_linear_growth
from brinkman_lab.harness import convergence_sweep, initial_layer_probe
from brinkman_lab.klevel import KLevelConfig
from brinkman_lab.limit import Omega0, interface_cells, level_set, run_limit, solve_w_infinity
from brinkman_lab.selftest import (
    check_h_slope, check_omega, check_reaction_sandwich, check_theta_bound,
)

RESULTS = {}


def record(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({detail})"
    RESULTS[number] = line
    print(line)
    return passed


def main_config(k=20.0, amplitude=0.2):
    return KLevelConfig(Grid(1, 8.0, 1024), make_linear_growth(1.0, 1.0), k, 0.5,
                        Omega0.ball(4.0, 1.0), amplitude=amplitude)


# --- 1 --------------------------------------------------------------------

def test_criterion_1_analytic_lemmas():
    t0 = time.perf_counter()
    checks = [check_h_slope(), check_omega(), check_reaction_sandwich(), check_theta_bound()]
    elapsed = time.perf_counter() - t0
    ok = all(c.passed for c in checks) and elapsed < 5.0
    detail = "; ".join(f"{c.name}: {c.value:.2e}" for c in checks) + f"; {elapsed:.1f}s"
    assert record(1, "analytic lemmas", ok, detail)


# --- 2 --------------------------------------------------------------------

def test_criterion_2_elliptic():
    t0 = time.perf_counter()
    errs = []
    for n in (32, 64, 128, 256):
        g = Grid(1, 2 * np.pi, n)
        W, _ = solve_brinkman(g.from_function(np.cos))
        errs.append(np.abs(W.values - 0.5 * np.cos(g.axis())).max())
    ratios = np.array(errs[:-1]) / np.array(errs[1:])

    rng = np.random.default_rng(2)
    g = Grid(2, 4.0, 32)
    x, y = g.coords()
    k = 2 * np.pi / g.extent
    p = ScalarField(g, sum(rng.normal() * np.cos(k * (i * x + j * y) + rng.uniform(0, 6))
                           for i in range(3) for j in range(3)))
    Ws, _ = solve_brinkman(p, tol=1e-12)
    Wr, _ = solve_brinkman(p, tol=1e-12, method="sor")
    agree = np.abs(Ws.values - Wr.values).max()

    g = Grid(2, 2.0, 32)
    worst = 0.0
    for _ in range(100):
        q = ScalarField(g, rng.random(g.shape))
        W, _ = solve_brinkman(q)
        worst = max(worst, -W.min(), W.max() - q.max())
    elapsed = time.perf_counter() - t0
    ok = (np.all((ratios >= 3) & (ratios <= 5)) and agree <= 1e-8 and worst <= 1e-12
          and elapsed < 30)
    detail = (f"ratios {np.round(ratios, 3).tolist()}, spectral-SOR {agree:.1e}, "
              f"max-principle excess {worst:.1e}, {elapsed:.1f}s")
    assert record(2, "elliptic solver", ok, detail)


# --- 3 --------------------------------------------------------------------

def _ball_velocity(g, radius):
    r2 = ((g.coords() - 0.5 * g.extent) ** 2).sum(axis=0)
    W, _ = solve_brinkman(ScalarField(g, (r2 < radius ** 2).astype(float)))
    return velocity_from_potential(W)[0]


def _cross_scheme_gap(n, T=1.0):
    g = Grid(1, 8.0, n)
    x = g.axis()
    r = np.abs(x - 3.0) / 1.5
    u0 = ScalarField(g, np.where(r < 1, np.cos(0.5 * np.pi * r) ** 2, 0.0))
    comps = (0.5 + 0.3 * np.sin(2 * np.pi * x / 8.0))[None, :]
    sl = transport_by_characteristics(u0, VelocitySampler([VectorField(g, comps)]), T)
    steps = int(np.ceil(T * np.abs(comps).max() / (0.5 * g.h)))
    f = u0
    v = VectorField(g, -comps)
    for _ in range(steps):
        f = upwind_advect(f, v, T / steps)
    return lp_norm(sl - f, 1)


def test_criterion_3_flow_map():
    t0 = time.perf_counter()
    g = Grid(2, 4.0, 64)
    x, y = g.coords()
    k = 2 * np.pi / g.extent
    V = VelocitySampler([VectorField(g, np.stack([0.3 * np.sin(k * y) + 0.1,
                                                  0.15 * np.cos(k * x)]))])
    fwd = flow_map(g, 0.0, 1.0, V).image()
    inverse_err = np.abs(integrate_trajectory(fwd, 1.0, 0.0, V) - g.points()).max()
    inverse_ok = inverse_err <= 10 * g.h ** 2

    g = Grid(2, 8.0, 128)
    Vf = _ball_velocity(g, 1.0)
    N = empirical_log_lipschitz(Vf)
    T = 1.0
    sampler = VelocitySampler([Vf])
    holder = holder_pair_excess(flow_map(g, 0.0, T, sampler), N, n_pairs=1000, seed=0)
    holder_ok = holder <= 4 * g.h

    rng = np.random.default_rng(0)
    pts = rng.uniform(2.0, 6.0, size=(2, 1000))
    shift_excess = -np.inf
    for t1, t2 in ((0.0, 0.05), (0.0, 0.2), (0.3, 0.5)):
        gap = time_shift_gap(pts, t1, t2, T, sampler)
        bound = (sampler.max_speed * abs(t1 - t2)) ** np.exp(-N * T) + 4 * g.h
        shift_excess = max(shift_excess, float((gap - bound).max()))
    shift_ok = shift_excess <= 0

    gaps = [_cross_scheme_gap(n) for n in (128, 256, 512, 1024)]
    ratios = np.array(gaps[:-1]) / np.array(gaps[1:])
    ratio_ok = bool(np.all((ratios >= 1.6) & (ratios <= 2.6)))
    elapsed = time.perf_counter() - t0
    ok = inverse_ok and holder_ok and shift_ok and ratio_ok and elapsed < 60
    detail = (f"inverse {inverse_err:.1e} <= {10 * 0.0625 ** 2:.1e}, Holder excess {holder:.1e}, "
              f"time-shift excess {shift_excess:.1e}, L1 gap ratios {np.round(ratios, 2).tolist()}, "
              f"{elapsed:.1f}s")
    assert record(3, "flow map", ok, detail)


# --- 4 --------------------------------------------------------------------

def test_criterion_4_limit_solver():
    t0 = time.perf_counter()
    law = make_linear_growth(1.0, 1.0)
    g = Grid(2, 8.0, 64)
    theta = level_set(Omega0.ball((4.0, 4.0), 1.5), g)
    mask = ScalarField(g, (theta.values > 0).astype(float))
    _, _, stats = solve_w_infinity(mask, law, tol=1e-12)
    d = np.array(stats.deltas)
    d = d[d > 1e-13]
    ratio = float((d[1:] / d[:-1]).max())
    ratio_ok = ratio <= 1 / (1 + law.alpha_bar) + 0.05

    W, _, _ = solve_w_infinity(g.full(1.0), law, tol=1e-12)
    torus_err = float(np.abs(W.values - law.p_max).max())

    states = run_limit(Omega0("balls", ((3.5, 4.0), (5.0, 4.3)), (0.9, 0.7)), law, g,
                       [0.0, 0.25, 0.5])
    H0 = H_inverse(law, 0.0)
    min_p = min(float(s.p.values[s.theta.values > 0].min()) for s in states)

    measures = []
    for n in (64, 128, 256):
        gg = Grid(2, 8.0, n)
        measures.append(interface_cells(level_set(Omega0.ball((4.0, 4.0), 1.3), gg))[1])
    halving = np.array(measures[1:]) / np.array(measures[:-1])
    halving_ok = bool(np.all(np.abs(halving - 0.5) <= 0.4 * 0.5))
    elapsed = time.perf_counter() - t0
    ok = ratio_ok and torus_err <= 1e-10 and min_p >= H0 - 1e-9 and halving_ok and elapsed < 60
    detail = (f"delta ratio {ratio:.3f}, torus error {torus_err:.1e}, min p {min_p:.4f}, "
              f"measure ratios {np.round(halving, 3).tolist()}, {elapsed:.1f}s")
    assert record(4, "limit solver", ok, detail)


# --- 5 --------------------------------------------------------------------

def _nonincreasing(values, slack=1.0):
    return all(b <= slack * a + 1e-12 for a, b in zip(values, values[1:]))


def test_criterion_5_main_convergence():
    t0 = time.perf_counter()
    cfg = main_config()
    h = cfg.grid.h
    report = convergence_sweep(cfg, [20, 80, 320], [0.25, 0.5], 0.1, check=False)
    elapsed = time.perf_counter() - t0
    mono = report.monotonicity_failures() == []
    parts = [f"{elapsed:.0f}s"]
    ok = mono and elapsed <= 300
    for t in report.times():
        rows = report.at_time(t)
        top = rows[-1]
        w2p = [r.w2p_err for r in rows]
        ok &= top.sup_err_p <= 0.05 and top.n_inner_dev <= 0.05
        ok &= _nonincreasing(w2p) and top.hausdorff_pos_set <= 5 * h
        parts.append(f"t={t:g}: sup_p {[f'{r.sup_err_p:.1e}' for r in rows]}, "
                     f"sup|n-1| {top.n_inner_dev:.1e}, W2p {[f'{v:.3f}' for v in w2p]}, "
                     f"hausdorff {top.hausdorff_pos_set / h:.1f}h")
    assert record(5, "main 1D convergence run", bool(ok), "; ".join(parts))


# --- 6 --------------------------------------------------------------------

def test_criterion_6_initial_layer():
    gaps = [initial_layer_probe(main_config(k=320.0), 320.0, 0.1, amplitude=a) for a in (0.2, 0.6)]
    ok = max(gaps) <= 0.02 and abs(gaps[0] - gaps[1]) <= 0.01
    assert record(6, "initial-layer probe", ok, f"gaps {gaps[0]:.2e}, {gaps[1]:.2e}")


# --- 7 --------------------------------------------------------------------

def test_criterion_7_two_dimensional_smoke():
    t0 = time.perf_counter()
    cfg = KLevelConfig(Grid(2, 8.0, 256), make_linear_growth(1.0, 1.0), 20.0, 0.25,
                       Omega0.ball((4.0, 4.0), 1.0))
    report = convergence_sweep(cfg, [20, 80], [0.25], 0.1, check=False)
    elapsed = time.perf_counter() - t0
    rows = report.at_time(0.25)
    ok = report.monotonicity_failures() == [] and rows[-1].sup_err_p <= 0.1 and elapsed <= 600
    detail = (f"sup_p {[f'{r.sup_err_p:.2e}' for r in rows]}, "
              f"sup_n {[f'{r.sup_err_n:.2e}' for r in rows]}, {elapsed:.0f}s")
    assert record(7, "2D smoke run", bool(ok), detail)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
