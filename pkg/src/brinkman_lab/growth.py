"""
Growth laws and the closed-form scalar identities built on them.

A growth law ``G`` is decreasing with slope at most ``-alpha_bar`` and
vanishes at the homeostatic pressure ``p_max``.  In the rescaled system the
pressure obeys ``p_t - Dp.DW = k p (W - p + G(p))``; with the linear law
``G(p) = alpha_bar (p_max - p)`` and ``W`` frozen this reaction is a logistic
equation and can be integrated exactly for any stiffness ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, interpolate, optimize, sparse

from .errors import BoundViolation, InvalidParams, NoBracket, OutOfRange

_SLOPE_SAMPLES = 1024


@dataclass(frozen=True)
class GrowthLaw:
    alpha_bar: float
    p_max: float
    nu: float
    G: Callable = field(repr=False, compare=False)
    G_prime: Callable = field(repr=False, compare=False)
    kind: str = "linear"
    table: Optional[tuple] = None

    def __post_init__(self):
        if not (self.alpha_bar > 0 and self.p_max > 0 and self.nu > 0):
            raise InvalidParams(
                f"need alpha_bar, p_max, nu > 0; got {self.alpha_bar}, {self.p_max}, {self.nu}"
            )
        u = np.linspace(0.0, self.p_max, _SLOPE_SAMPLES)
        slope = np.asarray(self.G_prime(u))
        if np.any(slope > -self.alpha_bar * (1.0 - 1e-9)):
            raise InvalidParams("G' exceeds -alpha_bar somewhere on [0, p_max]")
        if abs(float(self.G(self.p_max))) > 1e-12 * max(1.0, self.alpha_bar * self.p_max):
            raise InvalidParams("G(p_max) must vanish")
        if float(self.G(0.0)) < self.alpha_bar * self.p_max * (1.0 - 1e-12):
            raise InvalidParams("G(0) < alpha_bar * p_max")

    @property
    def is_linear(self) -> bool:
        return self.kind == "linear"

    @property
    def h_slope(self) -> float:
        """Exact slope of ``H`` for the linear law, ``1/(1 + nu alpha_bar)``."""
        return 1.0 / (1.0 + self.nu * self.alpha_bar)

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "alpha_bar": repr(self.alpha_bar),
            "p_max": repr(self.p_max),
            "nu": repr(self.nu),
        }
        if self.kind == "custom-table":
            ps, gs = self.table
            out["p_samples"] = ",".join(repr(float(v)) for v in ps)
            out["g_samples"] = ",".join(repr(float(v)) for v in gs)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "GrowthLaw":
        kind = d.get("kind", "linear")
        alpha = float(d["alpha_bar"])
        nu = float(d.get("nu", 1.0))
        if kind == "linear":
            return make_linear_growth(alpha, float(d["p_max"]), nu=nu)
        if kind == "custom-table":
            ps = [float(v) for v in str(d["p_samples"]).split(",")]
            gs = [float(v) for v in str(d["g_samples"]).split(",")]
            return make_table_growth(ps, gs, alpha, nu=nu)
        raise InvalidParams(f"unknown growth law kind {kind!r}")


def make_linear_growth(alpha_bar: float, p_max: float, nu: float = 1.0) -> GrowthLaw:
    """``G(p) = alpha_bar (p_max - p)``."""
    if not (alpha_bar > 0 and p_max > 0):
        raise InvalidParams("alpha_bar and p_max must be positive")
    a, pm = float(alpha_bar), float(p_max)
    return GrowthLaw(
        alpha_bar=a,
        p_max=pm,
        nu=float(nu),
        G=lambda p: a * (pm - np.asarray(p, dtype=float)),
        G_prime=lambda p: np.full_like(np.asarray(p, dtype=float), -a),
        kind="linear",
    )


def make_custom_growth(G, G_prime, alpha_bar: float, p_max: float, nu: float = 1.0,
                       kind: str = "custom") -> GrowthLaw:
    return GrowthLaw(float(alpha_bar), float(p_max), float(nu), G, G_prime, kind=kind)


def make_table_growth(p_samples, g_samples, alpha_bar: float, nu: float = 1.0) -> GrowthLaw:
    """
    Growth law from a decreasing sample table.

    Monotone cubic (PCHIP) interpolation inside the table, linear
    extrapolation with the end slopes outside it.  ``p_max`` is the root
    of the interpolant.
    """
    ps = np.asarray(p_samples, dtype=float)
    gs = np.asarray(g_samples, dtype=float)
    if ps.size < 2 or ps.shape != gs.shape or np.any(np.diff(ps) <= 0):
        raise InvalidParams("p_samples must be strictly increasing and match g_samples")
    if np.any(np.diff(gs) >= 0):
        raise InvalidParams("g_samples must be strictly decreasing")
    if not (gs[0] > 0 > gs[-1] or gs[-1] == 0):
        raise InvalidParams("table must bracket a root of G")
    spline = interpolate.PchipInterpolator(ps, gs, extrapolate=False)
    dspline = spline.derivative()
    lo, hi = ps[0], ps[-1]
    s_lo, s_hi = float(dspline(lo)), float(dspline(hi))

    def G(p):
        p = np.asarray(p, dtype=float)
        inside = np.clip(p, lo, hi)
        out = spline(inside)
        out = np.where(p < lo, gs[0] + s_lo * (p - lo), out)
        out = np.where(p > hi, gs[-1] + s_hi * (p - hi), out)
        return out

    def G_prime(p):
        p = np.asarray(p, dtype=float)
        out = dspline(np.clip(p, lo, hi))
        out = np.where(p < lo, s_lo, out)
        return np.where(p > hi, s_hi, out)

    if gs[-1] == 0:
        p_max = hi
    else:
        p_max = optimize.brentq(lambda p: float(G(p)), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return GrowthLaw(float(alpha_bar), float(p_max), float(nu), G, G_prime,
                     kind="custom-table", table=(tuple(ps), tuple(gs)))


def H_inverse(law: GrowthLaw, w, tol: float = 1e-12, max_iter: int = 200):
    """
    Solve ``u - nu G(u) = w`` for ``u`` (elementwise).

    Safeguarded Newton iteration inside the bracket ``[0, w + nu G(0) + 1]``.

    Raises
    ------
    NoBracket
        If the residual does not change sign on the bracket.
    """
    w_arr = np.asarray(w, dtype=float)
    scalar = w_arr.ndim == 0
    w_arr = np.atleast_1d(w_arr)
    nu = law.nu

    def resid(u):
        return u - nu * np.asarray(law.G(u)) - w_arr

    lo = np.zeros_like(w_arr)
    hi = w_arr + nu * float(law.G(0.0)) + 1.0
    r_lo, r_hi = resid(lo), resid(hi)
    if np.any(r_lo > 0) or np.any(r_hi < 0):
        raise NoBracket("u - nu G(u) - w has no sign change on [0, u_max]")
    if law.is_linear:
        u = (w_arr + nu * law.alpha_bar * law.p_max) / (1.0 + nu * law.alpha_bar)
    else:
        u = 0.5 * (lo + hi)
    for _ in range(max_iter):
        r = resid(u)
        if np.all(np.abs(r) <= tol):
            break
        lo = np.where(r < 0, u, lo)
        hi = np.where(r > 0, u, hi)
        slope = 1.0 - nu * np.asarray(law.G_prime(u))
        step = u - r / slope
        bad = ~((step > lo) & (step < hi))
        u = np.where(bad, 0.5 * (lo + hi), step)
    else:
        raise NoBracket("H_inverse did not reach tolerance")
    return float(u[0]) if scalar else u.reshape(np.shape(w))


def logistic_f(law: GrowthLaw, u):
    """``f(u) = u (alpha_bar p_max - (1 + alpha_bar) u)``."""
    a = law.alpha_bar
    return u * (a * law.p_max - (1.0 + a) * u)


def omega_exact(law: GrowthLaw, xi, t):
    """Solution of ``omega_t = f(omega)``, ``omega(xi, 0) = xi``."""
    a, pm = law.alpha_bar, law.p_max
    xi = np.asarray(xi, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidParams("t must be nonnegative")
    safe = np.where(xi > 0, xi, 1.0)
    val = a * pm / (1.0 + a + (a * pm / safe - (1.0 + a)) * np.exp(-a * pm * t))
    out = np.where(xi > 0, val, 0.0)
    return float(out) if out.ndim == 0 else out


def exact_reaction_step(law: GrowthLaw, p0, W, k: float, dt: float):
    """
    Advance ``p' = k p (W - p + G(p))`` over ``dt`` with ``W`` frozen.

    For the linear law this is ``p' = k a p (1 - p / cap)`` with
    ``a = W + alpha_bar p_max`` and ``cap = a / (1 + alpha_bar)``, solved in
    closed form.  Other laws fall back to an implicit Radau integration.
    """
    p0 = np.asarray(p0, dtype=float)
    W = np.broadcast_to(np.asarray(W, dtype=float), p0.shape)
    if dt == 0:
        return p0.copy()
    if not law.is_linear:
        return _stiff_reaction(law, p0, W, k, dt)
    a = W + law.alpha_bar * law.p_max
    cap = a / (1.0 + law.alpha_bar)
    decay = np.exp(-k * a * dt)
    denom = p0 + (cap - p0) * decay
    safe = np.where(p0 > 0, denom, 1.0)
    return np.where(p0 > 0, cap * p0 / safe, 0.0)


def _stiff_reaction(law, p0, W, k, dt):
    shape = p0.shape
    y0 = p0.reshape(-1)
    w = W.reshape(-1)

    def rhs(_t, y):
        return k * y * (w - y + law.G(y))

    def jac(_t, y):
        d = k * (w - 2.0 * y + law.G(y) + y * law.G_prime(y))
        return sparse.diags(d)

    sol = integrate.solve_ivp(rhs, (0.0, dt), y0, method="Radau", jac=jac,
                              rtol=1e-10, atol=1e-13)
    out = np.clip(sol.y[:, -1], 0.0, None)
    out[y0 == 0] = 0.0
    return out.reshape(shape)


def reaction_bounds_check(law: GrowthLaw, u, W, rtol: float = 1e-12):
    """
    Evaluate the reaction term and its two analytic envelopes.

    Returns ``(lower, value, upper)`` with
    ``lower = u (alpha_bar p_max - (1 + alpha_bar) u)``,
    ``value = u (W - u + G(u))`` and ``upper = u (1 + alpha_bar) p_max``.

    Raises
    ------
    BoundViolation
        If ``lower <= value <= upper`` fails anywhere.
    """
    u = np.asarray(u, dtype=float)
    W = np.asarray(W, dtype=float)
    a, pm = law.alpha_bar, law.p_max
    if np.any(u < 0) or np.any(u > pm * (1 + 1e-12)):
        raise OutOfRange("u must lie in [0, p_max]")
    if np.any(W < 0) or np.any(W > pm * (1 + 1e-12)):
        raise OutOfRange("W must lie in [0, p_max]")
    lower = logistic_f(law, u)
    value = u * (W - u + np.asarray(law.G(u)))
    upper = u * (1.0 + a) * pm
    slack = rtol * max(1.0, (1.0 + a) * pm * pm)
    if np.any(lower > value + slack) or np.any(value > upper + slack):
        raise BoundViolation("reaction term escapes its envelope")
    if lower.ndim == 0:
        return float(lower), float(value), float(upper)
    return lower, value, upper


def sigma_log_lipschitz(N: float, r):
    """Log-Lipschitz modulus ``N r |ln r|`` with the value 0 at ``r = 0``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r >= 1):
        raise OutOfRange("r must lie in [0, 1)")
    safe = np.where(r > 0, r, 1.0)
    out = np.where(r > 0, N * r * np.abs(np.log(safe)), 0.0)
    return float(out) if out.ndim == 0 else out


def theta_alpha(N: float, alpha: float, r):
    """``exp(-1/N) / (alpha |ln sqrt(alpha^2 + r^2)|)``."""
    if alpha <= 0:
        raise InvalidParams("alpha must be positive")
    r = np.asarray(r, dtype=float)
    s = np.sqrt(alpha ** 2 + r ** 2)
    if np.any(s >= 1):
        raise OutOfRange("sqrt(alpha^2 + r^2) must be < 1")
    out = np.exp(-1.0 / N) / alpha / np.abs(np.log(s))
    return float(out) if out.ndim == 0 else out
