import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brinkman_lab.elliptic import empirical_log_lipschitz, solve_brinkman, velocity_from_potential
from brinkman_lab.errors import InvalidParams, OutOfSpan
from brinkman_lab.flowmap import (
    VelocitySampler, evolve_patch, flow_map, holder_pair_excess, integrate_trajectory,
    ode_substeps, time_shift_gap, transport_by_characteristics,
)
from brinkman_lab.grid import CFL_MAX, Grid, ScalarField, VectorField, lp_norm, upwind_advect

from conftest import smooth_bump


def fine_rk4(func, x, s, t, dt):
    n = int(round(abs(t - s) / dt))
    h = (t - s) / n
    X = np.array(x, dtype=float)
    for i in range(n):
        r = s + i * h
        k1 = func(X, r)
        k2 = func(X + 0.5 * h * k1, r + 0.5 * h)
        k3 = func(X + 0.5 * h * k2, r + 0.5 * h)
        k4 = func(X + h * k3, r + h)
        X = X + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return X


def frozen(grid, comps):
    return VelocitySampler([VectorField(grid, comps)])


def smooth_velocity_2d(grid, amp=0.3):
    x, y = grid.coords()
    k = 2 * np.pi / grid.extent
    return np.stack([amp * np.sin(k * y) + 0.1, amp * np.cos(k * x) * 0.5])


def ball_velocity(grid, radius):
    c = 0.5 * grid.extent
    r2 = ((grid.coords() - c) ** 2).sum(axis=0)
    p = ScalarField(grid, (r2 < radius ** 2).astype(float))
    W, _ = solve_brinkman(p)
    return velocity_from_potential(W)[0]


# --- trajectories ---------------------------------------------------------

def test_constant_velocity_is_exact():
    g = Grid(2, 4.0, 16)
    V = frozen(g, np.stack([np.full(g.shape, 0.3), np.full(g.shape, -0.2)]))
    x = np.array([1.0, 2.0])
    X = integrate_trajectory(x, 0.5, 2.5, V)
    assert np.allclose(X, x + 2.0 * np.array([0.3, -0.2]), atol=1e-13)


def test_linear_velocity_matches_exponential():
    g = Grid(1, 16.0, 512)
    V = VelocitySampler.from_function(lambda x, t: x, g, max_speed=4.0)
    x = np.linspace(0.2, 2.0, 10)[None, :]
    n = ode_substeps(V, 0.0, 0.7)
    err = np.abs(integrate_trajectory(x, 0.0, 0.7, V) - x * np.exp(0.7)).max()
    dt = 0.7 / n
    assert err <= 10 * dt ** 4 * np.exp(0.7) * x.max()


def test_time_dependent_velocity_matches_fine_oracle():
    g = Grid(1, 2 * np.pi, 128)
    func = lambda x, t: np.sin(x) * np.cos(t)
    V = VelocitySampler.from_function(func, g, t_span=(0.0, 3.0), max_speed=1.0)
    x = np.linspace(0.3, 6.0, 8)[None, :]
    ref = fine_rk4(func, x, 0.0, 2.0, 1e-5)
    assert np.abs(integrate_trajectory(x, 0.0, 2.0, V) - ref).max() <= 1e-7


def test_out_of_span_is_rejected():
    g = Grid(1, 1.0, 16)
    frames = [VectorField(g, np.zeros((1, 16))), VectorField(g, np.ones((1, 16)))]
    V = VelocitySampler(frames, [0.0, 1.0])
    with pytest.raises(OutOfSpan):
        integrate_trajectory(np.array([0.5]), 0.0, 1.5, V)
    with pytest.raises(InvalidParams):
        VelocitySampler(frames, [1.0, 0.0])


def test_time_interpolation_between_frames():
    g = Grid(1, 1.0, 16)
    frames = [VectorField(g, np.zeros((1, 16))), VectorField(g, np.ones((1, 16)))]
    V = VelocitySampler(frames, [0.0, 1.0])
    # dX/dt = t gives X = x + t^2 / 2
    assert integrate_trajectory(np.array([0.2]), 0.0, 1.0, V)[0] == pytest.approx(0.7, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 1000), s=st.floats(0, 1), t=st.floats(0, 1))
def test_displacement_bound(seed, s, t):
    rng = np.random.default_rng(seed)
    g = Grid(2, 2.0, 16)
    V = frozen(g, rng.normal(size=(2,) + g.shape))
    fmap = flow_map(g, s, t, V)
    assert fmap.max_displacement() <= V.max_speed * abs(t - s) + 1e-12


def test_flow_map_identity_at_equal_times():
    g = Grid(2, 2.0, 16)
    V = frozen(g, smooth_velocity_2d(g))
    assert flow_map(g, 0.4, 0.4, V).max_displacement() == 0.0


def test_forward_backward_is_inverse():
    g = Grid(2, 4.0, 64)
    V = frozen(g, smooth_velocity_2d(g))
    T = 1.0
    fwd = flow_map(g, 0.0, T, V).image()
    back = integrate_trajectory(fwd, T, 0.0, V)
    assert np.abs(back - g.points()).max() <= 10 * g.h ** 2


def test_group_property():
    g = Grid(2, 4.0, 64)
    k = 2 * np.pi / g.extent

    def func(x, t):
        return np.stack([0.3 * np.sin(k * x[1]) + 0.1, 0.15 * np.cos(k * x[0])])

    x = g.points()[:, ::37]
    analytic = VelocitySampler.from_function(func, g, max_speed=0.5)
    direct = integrate_trajectory(x, 0.0, 1.0, analytic)
    split = integrate_trajectory(integrate_trajectory(x, 0.0, 0.4, analytic), 0.4, 1.0, analytic)
    assert np.abs(direct - split).max() <= 1e-10
    # gridded frames are only piecewise smooth, so RK4 drops order at cell faces
    V = frozen(g, smooth_velocity_2d(g))
    direct = integrate_trajectory(x, 0.0, 1.0, V)
    split = integrate_trajectory(integrate_trajectory(x, 0.0, 0.4, V), 0.4, 1.0, V)
    assert np.abs(direct - split).max() <= g.h ** 2


def test_holder_pair_bound_for_brinkman_velocity():
    g = Grid(2, 8.0, 128)
    Vf = ball_velocity(g, 1.0)
    N = empirical_log_lipschitz(Vf)
    T = 1.0
    fmap = flow_map(g, 0.0, T, VelocitySampler([Vf]))
    assert holder_pair_excess(fmap, N, n_pairs=1000, seed=3) <= 4 * g.h


def test_time_shift_bound():
    g = Grid(2, 8.0, 128)
    Vf = ball_velocity(g, 1.0)
    V = VelocitySampler([Vf])
    N = empirical_log_lipschitz(Vf)
    rng = np.random.default_rng(5)
    x = rng.uniform(2.0, 6.0, size=(2, 200))
    T = 1.0
    for t1, t2 in ((0.0, 0.1), (0.0, 0.3), (0.2, 0.25)):
        gap = time_shift_gap(x, t1, t2, T, V)
        bound = (V.max_speed * abs(t1 - t2)) ** np.exp(-N * T) + 4 * g.h
        assert np.all(gap <= bound)


# --- transport ------------------------------------------------------------

def test_transport_with_zero_velocity_is_identity(rng):
    g = Grid(2, 1.0, 16)
    u0 = ScalarField(g, rng.random(g.shape))
    out = transport_by_characteristics(u0, frozen(g, np.zeros((2,) + g.shape)), 0.7)
    assert np.allclose(out.values, u0.values, atol=1e-15)


def test_transport_translates_with_constant_velocity():
    for n in (128, 256):
        g = Grid(1, 8.0, n)
        u0 = g.from_function(lambda x: smooth_bump(x, 4.0, 1.5))
        V = frozen(g, np.full((1, n), 0.37))
        out = transport_by_characteristics(u0, V, 1.3)
        exact = smooth_bump(g.axis() - 0.37 * 1.3, 4.0, 1.5)
        assert np.abs(out.values - exact).max() <= 2.0 * g.h ** 2


def _scheme_gap(n, T=1.0):
    g = Grid(1, 8.0, n)
    x = g.axis()
    u0 = g.from_function(lambda x: smooth_bump(x, 3.0, 1.5))
    comps = (0.5 + 0.3 * np.sin(2 * np.pi * x / 8.0))[None, :]
    sl = transport_by_characteristics(u0, frozen(g, comps), T)
    v = VectorField(g, -comps)  # upwind carries f along -v
    steps = int(np.ceil(T * np.abs(comps).max() / (0.5 * g.h)))
    f = u0
    for _ in range(steps):
        f = upwind_advect(f, v, T / steps)
    return lp_norm(sl - f, 1)


def test_characteristics_and_upwind_agree_at_first_order():
    gaps = [_scheme_gap(n) for n in (128, 256, 512, 1024)]
    ratios = np.array(gaps[:-1]) / np.array(gaps[1:])
    assert np.all((ratios >= 1.6) & (ratios <= 2.6)), ratios


def test_transport_preserves_range(rng):
    g = Grid(2, 2.0, 32)
    u0 = ScalarField(g, rng.random(g.shape))
    out = transport_by_characteristics(u0, frozen(g, rng.normal(size=(2,) + g.shape)), 0.5)
    assert out.min() >= u0.min() and out.max() <= u0.max()


# --- patches --------------------------------------------------------------

def _disc(grid, c, r):
    d = r - np.sqrt(((grid.coords() - np.asarray(c)[:, None, None]) ** 2).sum(axis=0))
    return ScalarField(grid, np.clip(d, -1, 1))


def test_patch_static_without_velocity():
    g = Grid(2, 4.0, 32)
    th = _disc(g, (2, 2), 1.0)
    out = evolve_patch(th, frozen(g, np.zeros((2,) + g.shape)), 1.0)
    assert np.array_equal(out.values > 0, th.values > 0)


def test_patch_translates_rigidly():
    g = Grid(2, 8.0, 128)
    th = _disc(g, (3.0, 4.0), 1.0)
    grad = frozen(g, np.stack([np.full(g.shape, -0.5), np.zeros(g.shape)]))  # -DW = (0.5, 0)
    out = evolve_patch(th, grad, 2.0)
    ref = _disc(g, (4.0, 4.0), 1.0)
    assert np.abs(out.values - ref.values).max() <= 2 * g.h ** 2 / 0.1 + 1e-12
    assert np.sum((out.values > 0) != (ref.values > 0)) <= 4


def test_patch_radius_follows_radial_ode():
    g = Grid(2, 8.0, 256)
    c = 4.0
    rel = g.coords() - c
    r2 = (rel ** 2).sum(axis=0)
    outward = 0.5 * rel * np.exp(-r2 / 4.0)
    grad = frozen(g, -outward)  # characteristics move along +outward
    th = _disc(g, (c, c), 1.0)
    T = 1.0
    out = evolve_patch(th, grad, T)
    r_ode = fine_rk4(lambda r, t: 0.5 * r * np.exp(-r ** 2 / 4.0), np.array(1.0), 0.0, T, 1e-4)
    # radius along the x axis through the centre, from the zero crossing of theta
    row = out.values[:, g.n_cells // 2 - 1: g.n_cells // 2 + 1].mean(axis=1)
    x = g.axis()
    i = np.where((row[:-1] > 0) & (row[1:] <= 0))[0][-1]
    x0 = x[i] + g.h * row[i] / (row[i] - row[i + 1])
    assert abs((x0 - c) - r_ode) <= 2 * g.h


def test_patch_comparison(rng):
    g = Grid(2, 4.0, 48)
    small = _disc(g, (2.0, 2.0), 0.6)
    big = _disc(g, (2.0, 2.0), 0.9)
    V = frozen(g, rng.normal(scale=0.3, size=(2,) + g.shape))
    a = evolve_patch(small, V, 0.5)
    b = evolve_patch(big, V, 0.5)
    assert np.all(a.values <= b.values + 1e-14)


def test_patch_rejects_unbounded_level_set():
    g = Grid(1, 4.0, 16)
    with pytest.raises(InvalidParams):
        evolve_patch(g.full(2.0), frozen(g, np.zeros((1, 16))), 0.1)


def test_mollified_sampler_keeps_bound(rng):
    g = Grid(2, 2.0, 32)
    comps = rng.normal(size=(2,) + g.shape)
    raw = VelocitySampler([VectorField(g, comps)])
    smooth = VelocitySampler([VectorField(g, comps)], eps=2 * g.h)
    assert smooth.max_speed <= raw.max_speed
    vals = smooth(rng.uniform(0, 2, size=(2, 500)), 0.0)
    assert np.sqrt((vals ** 2).sum(axis=0)).max() <= smooth.max_speed + 1e-12
