"""Energy demand management between a grid operator and charging vehicles.

The grid posts a price p; each vehicle n picks a demand u_n maximizing
its quadratic surplus

    U_n(u) = b_n u - 0.5 s_n u^2 - p u,

subject to the shared feeder capacity sum(u) <= C. The grid then re-prices
using the followers' marginal value, p = b_n - s_n u_n, and the game
alternates until the price settles.

The followers' stage is solved distributedly: write it as

    min  -sum(y_n)   s.t.  y_n - U_n(u_n) <= 0,  u >= 0, sum(u) <= C,

so each vehicle owns one constraint and the shared variable is
x = (u, y) of dimension 2N (y is the per-vehicle surplus certificate,
unconstrained in the projection).
"""

from dataclasses import dataclass

import numpy as np

from .problem import ProblemSpec
from .projections import project_capacity_cap


@dataclass
class SmartGridParams:
    b: np.ndarray        # willingness, price units per energy unit
    s: np.ndarray        # satiation slope, price units per energy unit squared
    capacity: float      # feeder cap, energy units
    price: float         # current posted price

    def __post_init__(self):
        self.b = np.atleast_1d(np.asarray(self.b, float))
        self.s = np.atleast_1d(np.asarray(self.s, float))
        if self.b.shape != self.s.shape:
            raise ValueError("b and s must have the same length")
        if (self.s <= 0).any():
            raise ValueError("satiation slopes must be positive")
        if self.capacity < 0:
            raise ValueError("capacity must be nonnegative")

    @property
    def n(self):
        return self.b.size


def pev_utility(u, params):
    """Per-vehicle surplus at demand u under the current price."""
    u = np.asarray(u, float)
    return params.b * u - 0.5 * params.s * u**2 - params.price * u


def grid_revenue(u, price):
    """Operator revenue: price times total delivered energy."""
    return float(price * np.asarray(u, float).sum())


def optimal_price(params, u):
    """Leader re-pricing rule: each vehicle's marginal value at its demand."""
    return params.b - params.s * np.asarray(u, float)


def build_smartgrid_problem(params, util_scale=0.02, y_slope=0.3, u0_max=None):
    """Follower-stage problem in epigraph form, ready for the solver.

    x = (u_1..u_N, y_1..y_N). Two internal rescales shape the solver's
    copy of the problem without changing its solution set:

    * util_scale multiplies all currency quantities, so device n's
      surplus bound reads f_n = y_slope * y_n - util_scale * U_n(u).
    * y_slope is the constraint's slope in the y block; y_n stores the
      scaled surplus divided by y_slope.

    Both shrink the dual-weighted signals a device must push through
    the transmit power check. Without them a device whose channel dips
    for a few rounds falls silent, its surplus variable then drifts up
    unchecked, its dual price ratchets toward the cap, and the larger
    signal keeps it silent for good. Reported objectives and violations
    are divided by util_scale to restore currency units; the demand
    block u is untouched.

    The projection caps total demand and clips negatives (iterative
    clip-and-shift); y is free. A start is drawn as u in [0, 2C/N]
    (then capped) with y set to the utility at that u, so the start
    sits on the constraint boundary and the duals wind up gradually.
    """
    n = params.n
    c = float(util_scale)
    kappa = float(y_slope)
    if c <= 0.0:
        raise ValueError("util_scale must be positive")
    if kappa <= 0.0:
        raise ValueError("y_slope must be positive")
    b, s, p = c * params.b, c * params.s, c * params.price

    def split(x):
        return x[:n], x[n:]

    def objective(x):
        return float(-kappa * x[n:].sum())

    def objective_subgradient(x):
        g = np.zeros(2 * n)
        g[n:] = -kappa
        return g

    def constraint_values(x):
        u, y = split(x)
        return kappa * y - (b * u - 0.5 * s * u**2 - p * u)

    def constraint_subgradients(x):
        u, _ = split(x)
        g = np.zeros((n, 2 * n))
        idx = np.arange(n)
        g[idx, idx] = -(b - s * u - p)
        g[idx, n + idx] = kappa
        return g

    def project(x):
        out = x.copy()
        out[:n] = project_capacity_cap(x[:n], params.capacity)
        return out

    def start_on_boundary(x):
        out = x.copy()
        out[n:] = (c / kappa) * pev_utility(x[:n], params)
        return out

    if u0_max is None:
        u0_max = 2.0 * params.capacity / n
    lo = np.zeros(2 * n)
    hi = np.concatenate([np.full(n, float(u0_max)), np.ones(n)])
    return ProblemSpec(
        dimension=2 * n,
        n_constraints=n,
        objective=objective,
        objective_subgradient=objective_subgradient,
        constraint_values=constraint_values,
        constraint_subgradients=constraint_subgradients,
        project=project,
        init_lo=lo,
        init_hi=hi,
        start_transform=start_on_boundary,
    )


def epigraph_start(u, params, util_scale=0.02, y_slope=0.3):
    """Stack demands with their scaled utilities into a solver start point."""
    u = np.asarray(u, dtype=float)
    y = (float(util_scale) / float(y_slope)) * pev_utility(u, params)
    return np.concatenate([u, y])


def smartgrid_oracle(params):
    """Exact follower-stage solution at the current price.

    Stationarity gives u_n(mu) = max(0, (b_n - p - mu) / s_n) with mu the
    capacity multiplier; mu = 0 if unconstrained demand fits, otherwise
    the unique root of sum(u(mu)) = C, found by bisection.

    Returns (u, mu, welfare) with welfare = sum U_n(u_n).
    """
    b, s, p, cap = params.b, params.s, params.price, params.capacity

    def demand(mu):
        return np.maximum((b - p - mu) / s, 0.0)

    u = demand(0.0)
    mu = 0.0
    if u.sum() > cap:
        lo, hi = 0.0, float(np.max(b - p))
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if demand(mid).sum() > cap:
                lo = mid
            else:
                hi = mid
        mu = 0.5 * (lo + hi)
        u = demand(mu)
        # the bisection interval is collapsed to machine precision, but
        # rescale so the cap binds exactly
        total = u.sum()
        if total > 0:
            u *= cap / total
    welfare = float(pev_utility(u, params).sum())
    return u, mu, welfare


@dataclass
class StackelbergResult:
    prices: np.ndarray       # posted price per stage, including the start
    converged: bool
    stages: int
    u: np.ndarray            # follower demands backing the final price
    stage_results: list      # per-stage SolverResult


def stackelberg_loop(params, solve_stage, price_rule="max_u",
                     tol_rel=1e-3, max_stages=50):
    """Alternate follower solves and leader re-pricing until the price settles.

    solve_stage(params, warm_u) must return (u, extra) where u is the
    demand vector the leader prices against; extra is kept in
    stage_results. At an exact follower optimum every active vehicle has
    the same marginal value b_n - s_n u_n, so any of them prices the next
    stage; with an inexact follower solve they differ, and the rule picks
    the estimator: "max_u" (the default) takes the marginal of the
    largest-demand device, "mean_u" averages the marginal prices of the
    devices with positive demand. Stops when the price moves by less
    than tol_rel of its current value.
    """
    if price_rule not in ("max_u", "mean_u"):
        raise ValueError(f"unknown price rule {price_rule!r}")
    price = params.price
    prices = [price]
    results = []
    warm_u = None
    converged = False
    for _ in range(max_stages):
        stage = SmartGridParams(params.b, params.s, params.capacity, price)
        u, extra = solve_stage(stage, warm_u)
        results.append(extra)
        if getattr(extra, "diverged", False):
            # a blown-up follower stage cannot be priced against
            warm_u = u
            break
        per_device = optimal_price(stage, u)
        active = np.asarray(u) > 0
        if price_rule == "mean_u" and active.any():
            new_price = float(per_device[active].mean())
        else:
            new_price = float(per_device[int(np.argmax(u))])
        prices.append(new_price)
        warm_u = u
        moved = abs(new_price - price)
        price = new_price
        if moved <= tol_rel * max(abs(price), 1e-12):
            converged = True
            break
    return StackelbergResult(np.asarray(prices), converged, len(results), warm_u, results)
