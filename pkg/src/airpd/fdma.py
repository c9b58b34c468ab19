"""Joint power and bandwidth allocation on a shared FDMA downlink.

K bands of width B/K are shared by N users. w[n, k] is user n's fraction
of band k (the fractions of each band sum to one across users) and
p[n, k] the power spent there, within a total budget P. User n's rate is

    R_n = sum_k w[n,k] * (B/K) * log2(1 + p[n,k] |h[n,k]|^2 / (w[n,k] N0 B/K))

and the planner maximizes the sum rate subject to a per-user floor
R_n >= R_th. Each user owns its own floor constraint.

Rates are huge numbers in SI units, so the problem handed to the solver
is a rescaled copy: the floor constraints carry rate_scale, the sum-rate
objective carries objective_scale, and the bandwidth fractions live on
shrunken simplexes of total w_scale instead of 1. The three scales set,
respectively, how fast the duals wind up under the published step
sequence, how fast the sum-rate pull reallocates bandwidth, and how
large the device signals are against the transmit power check; a single
shared scale cannot satisfy all three at once. Reported rates and
fractions stay in natural units (bit/s and fractions summing to one).
"""

from dataclasses import dataclass

import numpy as np

from .problem import ProblemSpec
from .projections import project_capacity_cap, project_simplex_rows

W_FLOOR = 1e-9  # bandwidth fractions are floored here inside evaluations


@dataclass
class FdmaParams:
    gains: np.ndarray        # (N, K) channel amplitudes of the service links
    bandwidth_hz: float      # B
    n0_w_per_hz: float       # noise spectral density
    power_budget_w: float    # P
    r_th_bps: float          # per-user rate floor
    rate_scale: float = 1e-6        # applied to the rate floor constraints
    objective_scale: float = 1.6e-10  # applied to the sum-rate objective
    w_scale: float = 4e-4           # simplex total carried by the solver variables

    def __post_init__(self):
        self.gains = np.asarray(self.gains, float)
        if self.gains.ndim != 2:
            raise ValueError("gains must be an (N, K) matrix")
        if (self.gains <= 0).any():
            raise ValueError("channel gains must be positive")
        for name in ("bandwidth_hz", "n0_w_per_hz", "power_budget_w", "r_th_bps",
                     "rate_scale", "objective_scale", "w_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def n_users(self):
        return self.gains.shape[0]

    @property
    def n_bands(self):
        return self.gains.shape[1]

    @property
    def band_hz(self):
        return self.bandwidth_hz / self.n_bands

    def snr_slope(self):
        """|h|^2 / (N0 B/K): per-entry SNR per watt at full band occupancy."""
        return self.gains**2 / (self.n0_w_per_hz * self.band_hz)


def fdma_rate(p, w, params):
    """Per-user-per-band rate matrix in bit/s (continuous at w = 0)."""
    r, _, _ = _rate_and_grads(np.asarray(p, float), np.asarray(w, float), params)
    return r


def sum_rate(p, w, params):
    return float(fdma_rate(p, w, params).sum())


def user_rates(p, w, params):
    return fdma_rate(p, w, params).sum(axis=1)


def _rate_and_grads(p, w, params):
    """Rate matrix plus its partials wrt p and w, all (N, K), in bit/s."""
    wf = np.maximum(w, W_FLOOR)
    g = params.snr_slope()
    # negative powers only show up as reference-solver probe points
    snr = np.maximum(p, 0.0) * g / wf
    band = params.band_hz
    log_term = np.log1p(snr) / np.log(2.0)
    r = wf * band * log_term
    drdp = band * g / (np.log(2.0) * (1.0 + snr))
    drdw = band * (log_term - snr / (np.log(2.0) * (1.0 + snr)))
    return r, drdp, drdw


def build_fdma_problem(params, p0_max=None, w0_max=None):
    """Solver-ready problem. x = (p.ravel(), ws.ravel()), both (N, K) row-major.

    The solver's bandwidth block ws is the fraction matrix times w_scale;
    natural fractions are recovered as ws / w_scale before any rate
    evaluation, and the chain rule divides the w gradients by w_scale.
    The projection caps total power (clip-and-shift) and puts every
    band's user column back on a simplex of total w_scale (sort method).
    Init box defaults: p and ws within 20 percent of their uniform
    shares. The power box stays away from zero on purpose: at p = 0 with
    a nonzero share the rate slope is the full SNR-per-watt, around 1e16
    in solver units here, and one positive dual turns that into a force
    that wrecks the whole power simplex through the cap projection.
    Power moves only nanowatts per round in this regime, so a start in
    the interior keeps every entry there.
    """
    n, k = params.n_users, params.n_bands
    nk = n * k
    scale = params.rate_scale
    obj_scale = params.objective_scale
    ws_total = params.w_scale

    def split(x):
        return x[:nk].reshape(n, k), x[nk:].reshape(n, k) / ws_total

    def objective(x):
        p, w = split(x)
        r, _, _ = _rate_and_grads(p, w, params)
        return float(-obj_scale * r.sum())

    def objective_subgradient(x):
        p, w = split(x)
        _, drdp, drdw = _rate_and_grads(p, w, params)
        return -obj_scale * np.concatenate([drdp.ravel(), drdw.ravel() / ws_total])

    def constraint_values(x):
        p, w = split(x)
        r, _, _ = _rate_and_grads(p, w, params)
        return scale * (params.r_th_bps - r.sum(axis=1))

    def constraint_subgradients(x):
        p, w = split(x)
        _, drdp, drdw = _rate_and_grads(p, w, params)
        jac = np.zeros((n, 2 * nk))
        rows = np.repeat(np.arange(n), k)
        cols = np.arange(nk)
        jac[rows, cols] = -scale * drdp.ravel()
        jac[rows, nk + cols] = -(scale / ws_total) * drdw.ravel()
        return jac

    def project(x):
        p = x[:nk].reshape(n, k)
        ws = x[nk:].reshape(n, k)
        p_new = project_capacity_cap(p.ravel(), params.power_budget_w).reshape(n, k)
        ws_new = project_simplex_rows(ws.T, total=ws_total).T
        return np.concatenate([p_new.ravel(), ws_new.ravel()])

    uniform_p = params.power_budget_w / nk
    uniform_w = ws_total / n
    if p0_max is None:
        p0_max = 1.2 * uniform_p
    if w0_max is None:
        w0_max = 1.2 * uniform_w
    p0_min = min(0.8 * uniform_p, float(p0_max))
    w0_min = min(0.8 * uniform_w, float(w0_max))
    lo = np.concatenate([np.full(nk, p0_min), np.full(nk, w0_min)])
    hi = np.concatenate([np.full(nk, float(p0_max)), np.full(nk, float(w0_max))])
    return ProblemSpec(
        dimension=2 * nk,
        n_constraints=n,
        objective=objective,
        objective_subgradient=objective_subgradient,
        constraint_values=constraint_values,
        constraint_subgradients=constraint_subgradients,
        project=project,
        init_lo=lo,
        init_hi=hi,
    )


def unpack_allocation(x, params):
    """Split a solver point into natural (p, w) matrices, undoing w_scale."""
    n, k = params.n_users, params.n_bands
    nk = n * k
    return x[:nk].reshape(n, k), x[nk:].reshape(n, k) / params.w_scale


def _pack(p, w):
    return np.concatenate([p.ravel(), w.ravel()])


def fdma_oracle(params, n_starts=4, seed=0):
    """High-accuracy reference solution for small instances.

    Maximizes the scaled sum rate with scipy's trust-constr from several
    feasible starts (the problem is concave over a convex set, the
    restarts only guard against solver hiccups). Returns (p, w,
    sum_rate_bps). Raises if the rate floor is infeasible for the drawn
    gains (checked against the max-min-rate presolve).
    """
    from scipy.optimize import LinearConstraint, NonlinearConstraint, minimize

    n, k = params.n_users, params.n_bands
    nk = n * k
    scale = params.rate_scale

    best = max_min_rate(params, n_starts=1, seed=seed)
    if best < params.r_th_bps:
        raise ValueError(
            f"rate floor {params.r_th_bps:.4g} bit/s infeasible: best min rate {best:.4g}")

    def split(z):
        return z[:nk].reshape(n, k), z[nk:].reshape(n, k)

    def neg_sum(z):
        p, w = split(z)
        r, _, _ = _rate_and_grads(p, w, params)
        return -scale * r.sum()

    def neg_sum_grad(z):
        p, w = split(z)
        _, drdp, drdw = _rate_and_grads(p, w, params)
        return -scale * _pack(drdp, drdw)

    def rates_scaled(z):
        p, w = split(z)
        r, _, _ = _rate_and_grads(p, w, params)
        return scale * r.sum(axis=1)

    def rates_jac(z):
        p, w = split(z)
        _, drdp, drdw = _rate_and_grads(p, w, params)
        jac = np.zeros((n, 2 * nk))
        rows = np.repeat(np.arange(n), k)
        cols = np.arange(nk)
        jac[rows, cols] = scale * drdp.ravel()
        jac[rows, nk + cols] = scale * drdw.ravel()
        return jac

    # total power and per-band user fractions
    a_pow = np.concatenate([np.ones(nk), np.zeros(nk)])
    a_band = np.zeros((k, 2 * nk))
    for band in range(k):
        a_band[band, nk + band::k][:n] = 1.0  # w[:, band] entries
    constraints = [
        LinearConstraint(a_pow, 0.0, params.power_budget_w),
        LinearConstraint(a_band, 1.0, 1.0),
        NonlinearConstraint(rates_scaled, scale * params.r_th_bps, np.inf, jac=rates_jac),
    ]
    bounds = [(0.0, None)] * (2 * nk)

    rng = np.random.default_rng(seed)
    best_val, best_z = np.inf, None
    for trial in range(n_starts):
        if trial == 0:
            p0 = np.full((n, k), params.power_budget_w / nk)
            w0 = np.full((n, k), 1.0 / n)
        else:
            p0 = rng.uniform(0, 2 * params.power_budget_w / nk, (n, k))
            p0 *= params.power_budget_w / max(p0.sum(), 1e-12)
            w0 = rng.uniform(0.2, 1.0, (n, k))
            w0 /= w0.sum(axis=0, keepdims=True)
        res = minimize(neg_sum, _pack(p0, w0), jac=neg_sum_grad, method="trust-constr",
                       constraints=constraints, bounds=bounds,
                       options={"gtol": 1e-10, "xtol": 1e-12, "maxiter": 3000})
        viol = scale * params.r_th_bps - rates_scaled(res.x)
        if res.fun < best_val and viol.max() < 1e-6 * scale * params.r_th_bps:
            best_val, best_z = res.fun, res.x
    if best_z is None:
        raise RuntimeError("reference solver failed to return a feasible point")
    p, w = split(best_z)
    return p, w, float(-best_val / scale)


def max_min_rate(params, n_starts=1, seed=0):
    """Largest achievable worst-user rate (bit/s), for feasibility checks."""
    from scipy.optimize import LinearConstraint, NonlinearConstraint, minimize

    n, k = params.n_users, params.n_bands
    nk = n * k
    scale = params.rate_scale

    # variables (p, w, t): maximize t subject to scaled rates >= t
    def neg_t(z):
        return -z[-1]

    def neg_t_grad(z):
        g = np.zeros(z.size)
        g[-1] = -1.0
        return g

    def margins(z):
        p = z[:nk].reshape(n, k)
        w = z[nk:2 * nk].reshape(n, k)
        r, _, _ = _rate_and_grads(p, w, params)
        return scale * r.sum(axis=1) - z[-1]

    def margins_jac(z):
        p = z[:nk].reshape(n, k)
        w = z[nk:2 * nk].reshape(n, k)
        _, drdp, drdw = _rate_and_grads(p, w, params)
        jac = np.zeros((n, 2 * nk + 1))
        rows = np.repeat(np.arange(n), k)
        cols = np.arange(nk)
        jac[rows, cols] = scale * drdp.ravel()
        jac[rows, nk + cols] = scale * drdw.ravel()
        jac[:, -1] = -1.0
        return jac

    a_pow = np.concatenate([np.ones(nk), np.zeros(nk + 1)])
    a_band = np.zeros((k, 2 * nk + 1))
    for band in range(k):
        a_band[band, nk + band::k][:n] = 1.0
    constraints = [
        LinearConstraint(a_pow, 0.0, params.power_budget_w),
        LinearConstraint(a_band, 1.0, 1.0),
        NonlinearConstraint(margins, 0.0, np.inf, jac=margins_jac),
    ]
    bounds = [(0.0, None)] * (2 * nk) + [(None, None)]

    p0 = np.full(nk, params.power_budget_w / nk)
    w0 = np.full(nk, 1.0 / n)
    r0 = scale * user_rates(p0.reshape(n, k), w0.reshape(n, k), params).min()
    z0 = np.concatenate([p0, w0, [r0]])
    res = minimize(neg_t, z0, jac=neg_t_grad, method="trust-constr",
                   constraints=constraints, bounds=bounds,
                   options={"gtol": 1e-10, "xtol": 1e-12, "maxiter": 3000})
    return float(res.x[-1] / scale)
