"""
Analytic-identity checks for the growth law and the flow map.

Each check returns a :class:`CheckResult`; :func:`run_selftest` runs them
all and :func:`format_table` renders the pass/fail table printed by the
``selftest`` command.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundViolation
from .flowmap import VelocitySampler, integrate_trajectory
from .grid import Grid
from .growth import (
    GrowthLaw, H_inverse, logistic_f, make_custom_growth, make_linear_growth, omega_exact,
    reaction_bounds_check, sigma_log_lipschitz, theta_alpha,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34} {self.value:.3e}  (limit {self.limit:.1e})"


def perturbed_law(alpha_bar: float = 1.0, p_max: float = 1.0) -> GrowthLaw:
    """``G(p) = a (P - p)(1 + 0.1 (p - P)^2 / P^2)``; its slope is at most ``-a``."""

    def G(p):
        p = np.asarray(p, dtype=float)
        return alpha_bar * (p_max - p) * (1.0 + 0.1 * (p - p_max) ** 2 / p_max ** 2)

    def G_prime(p):
        p = np.asarray(p, dtype=float)
        return -alpha_bar * (1.0 + 0.3 * (p - p_max) ** 2 / p_max ** 2)

    return make_custom_growth(G, G_prime, alpha_bar, p_max, kind="cubic-perturbed")


def h_slope_range(law: GrowthLaw, n: int = 1000):
    """Min and max finite-difference slope of ``w -> H(w)`` on ``[0, p_max]``."""
    w = np.linspace(0.0, law.p_max, n)
    slope = np.diff(H_inverse(law, w)) / np.diff(w)
    return float(slope.min()), float(slope.max())


def check_h_slope() -> CheckResult:
    worst = 0.0
    ok = True
    for law in (make_linear_growth(1.0, 1.0), make_linear_growth(2.0, 3.0), perturbed_law()):
        lo, hi = h_slope_range(law)
        ok &= lo >= 0.0 and hi < 1.0
        worst = max(worst, hi)
    return CheckResult("H' slope in [0, 1)", bool(ok), worst, 1.0)


def rk4_omega(law: GrowthLaw, xi: np.ndarray, t_out: np.ndarray, dt: float = 1e-3) -> np.ndarray:
    """Fixed-step RK4 for ``omega' = f(omega)`` recorded at ``t_out`` (multiples of dt)."""
    f = lambda u: logistic_f(law, u)
    u = np.asarray(xi, dtype=float).copy()
    stops = np.rint(np.asarray(t_out) / dt).astype(int)
    out = np.empty((len(stops),) + u.shape)
    step = 0
    for j, stop in enumerate(stops):
        while step < stop:
            k1 = f(u)
            k2 = f(u + 0.5 * dt * k1)
            k3 = f(u + 0.5 * dt * k2)
            k4 = f(u + dt * k3)
            u = u + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            step += 1
        out[j] = u
    return out


def check_omega() -> CheckResult:
    law = make_linear_growth(1.0, 1.0)
    xi = np.linspace(0.0, 1.0, 41)
    t = np.linspace(0.0, 10.0, 21)
    ref = rk4_omega(law, xi, t)
    exact = np.array([omega_exact(law, xi, tt) for tt in t])
    err = float(np.abs(ref - exact).max())
    return CheckResult("omega exact vs RK4", err <= 1e-8, err, 1e-8)


def check_reaction_sandwich(n: int = 10_000, seed: int = 0) -> CheckResult:
    # the upper envelope needs G(0) = alpha_bar p_max, which with the slope
    # bound forces the law to be linear on [0, p_max]
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(n // 100):
        law = make_linear_growth(rng.uniform(0.1, 5.0), rng.uniform(0.1, 5.0))
        u = rng.uniform(0.0, law.p_max, 100)
        W = rng.uniform(0.0, law.p_max, 100)
        try:
            reaction_bounds_check(law, u, W)
        except BoundViolation:
            failures += 1
    return CheckResult("reaction sandwich (10^4 triples)", failures == 0, float(failures), 0.0)


def theta_derivative_excess(n: int = 200, seed: int = 0) -> float:
    """
    Largest ``(|theta'| - theta / sigma) / (theta / sigma)`` over random samples.

    For the explicit formula ``|theta'| sigma / theta = N r^2 |ln r| / (s^2 |ln s|)``
    with ``s = sqrt(alpha^2 + r^2)``, which is at most ``N`` while ``s < e^-1``.
    The bound therefore holds for ``N <= 1`` only, and that is where ``N`` is drawn.
    """
    rng = np.random.default_rng(seed)
    worst = -np.inf
    s_cap = np.exp(-1.0) * 0.95
    for _ in range(n):
        N = rng.uniform(0.1, 1.0)
        alpha = rng.uniform(0.01, 0.3)
        r_max = np.sqrt(s_cap ** 2 - alpha ** 2)
        r = rng.uniform(0.01 * r_max, 0.99 * r_max)
        step = 1e-6 * r
        deriv = (theta_alpha(N, alpha, r + step) - theta_alpha(N, alpha, r - step)) / (2 * step)
        bound = theta_alpha(N, alpha, r) / sigma_log_lipschitz(N, r)
        worst = max(worst, (abs(deriv) - bound) / bound)
    return float(worst)


def check_theta_bound() -> CheckResult:
    excess = theta_derivative_excess()
    return CheckResult("theta' <= theta / sigma", excess <= 1e-6, max(excess, 0.0), 1e-6)


def check_constant_flow() -> CheckResult:
    grid = Grid(1, 2 * np.pi, 64)
    v0 = 0.7
    V = VelocitySampler.from_function(lambda x, t: np.full_like(x, v0), grid, max_speed=v0)
    x = grid.points()
    err = float(np.abs(integrate_trajectory(x, 0.0, 1.3, V) - (x + v0 * 1.3)).max())
    return CheckResult("flow map, constant velocity", err <= 1e-12, err, 1e-12)


def check_linear_flow() -> CheckResult:
    grid = Grid(1, 8.0, 256)
    V = VelocitySampler.from_function(lambda x, t: x, grid, max_speed=4.0)
    x = np.linspace(0.1, 1.0, 10)[None, :]
    err = float(np.abs(integrate_trajectory(x, 0.0, 0.5, V) - x * np.exp(0.5)).max())
    return CheckResult("flow map, V(x) = x", err <= 1e-9, err, 1e-9)


CHECKS = (check_h_slope, check_omega, check_reaction_sandwich, check_theta_bound,
          check_constant_flow, check_linear_flow)


def run_selftest() -> list:
    return [check() for check in CHECKS]


def format_table(results) -> str:
    return "\n".join(r.line() for r in results)
