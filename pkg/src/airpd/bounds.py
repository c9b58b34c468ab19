"""Convergence guarantees evaluated numerically.

Three bounds are computed from a common set of problem constants and the
realized step/participation history:

* an upper bound on the expected norm of the positive constraint
  violation of the running weighted average,
* an upper bound on the expected objective suboptimality of that
  average,
* a lower bound on the same suboptimality, proportional to the
  violation itself.

The evaluators implement the published inequalities term by term, as
printed. Two quirks are kept on purpose: the gap upper bound multiplies
its whole bracket (including the starting-point terms) by the product
of the radius and weighted-subgradient constants, and the closed-form
radius below is the published expression even though it is not the
exact stationary point of the bracketed objective. Both choices keep
the code checkable against the source of the formulas.

Constants can be estimated from instrumented solver traces; estimated
maxima carry a 1.05 safety factor so finite-sample maxima do not cause
false bound violations.
"""

from dataclasses import dataclass

import numpy as np

from .schedules import optimal_radius

SAFETY = 1.05


@dataclass
class BoundInputs:
    """Everything the bound evaluators need.

    steps and mean_participants are per-round histories (step sizes a_j
    and average participating-device counts); all other fields are
    scalars. slater_gap is (objective at a strictly feasible point
    minus a dual lower bound) divided by the feasibility margin.
    """

    n_devices: int
    weighted_subgrad_bound: float   # max device signal norm, sup ||lam_i g_i||
    lagrangian_subgrad_bound: float  # sup of Lagrangian subgradient norms
    iterate_radius: float           # bound on E||x^k - x*||
    start_gap_sq: float             # E||x^0 - x*||^2
    dual_start_sq: float            # E||lam^0||^2
    slater_gap: float
    steps: np.ndarray
    mean_participants: np.ndarray
    beta: float
    noise_power_w: float

    def __post_init__(self):
        self.steps = np.asarray(self.steps, float)
        self.mean_participants = np.asarray(self.mean_participants, float)
        if self.steps.ndim != 1 or self.steps.size == 0:
            raise ValueError("steps must be a nonempty 1-d array")
        if self.mean_participants.shape != self.steps.shape:
            raise ValueError("mean_participants must match steps in length")
        if (self.steps <= 0).any():
            raise ValueError("step sizes must be positive")
        if (self.mean_participants < 0).any() or (self.mean_participants > self.n_devices).any():
            raise ValueError("mean participants must lie in [0, n_devices]")
        for name in ("weighted_subgrad_bound", "lagrangian_subgrad_bound", "iterate_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.lagrangian_subgrad_bound < self.weighted_subgrad_bound:
            # estimated constants keep this strict; hand-built inputs may
            # set the two equal (e.g. every constant 1)
            raise ValueError("lagrangian_subgrad_bound must be at least weighted_subgrad_bound")
        for name in ("start_gap_sq", "dual_start_sq", "slater_gap", "beta", "noise_power_w"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def rounds(self):
        return self.steps.size


def _sums(inputs, k):
    """Step-weighted participation sums over rounds 0..k-1."""
    if not 1 <= k <= inputs.rounds:
        raise ValueError(f"k must be in [1, {inputs.rounds}], got {k}")
    a = inputs.steps[:k]
    miss = inputs.n_devices - inputs.mean_participants[:k]
    z = float(a.sum())
    return z, float((miss * a).sum()), float((a * a).sum()), \
        float((miss * a * a).sum()), float((miss * miss * a * a).sum())


def _core(inputs, k):
    """The shared bracket: every bound term except the radius ones."""
    z, miss_lin, sq, miss_sq, miss2_sq = _sums(inputs, k)
    g = inputs.weighted_subgrad_bound
    ell = inputs.lagrangian_subgrad_bound
    noise_coeff = inputs.beta * inputs.noise_power_w + 1.5 * ell * ell
    core = (inputs.iterate_radius * g * miss_lin
            + noise_coeff * sq
            + inputs.start_gap_sq
            + 2.0 * ell * g * miss_sq
            + ell * ell * miss2_sq)
    return z, core


def delta_k(inputs, k):
    """Per-round decay constant feeding the closed-form radius."""
    z, core = _core(inputs, k)
    return core / z


def optimal_r(inputs, k):
    """Closed-form dual-set radius for round k (published expression)."""
    z, core = _core(inputs, k)
    return optimal_radius(inputs.slater_gap, core / z, z)


def constraint_violation_bound(inputs, radius, k):
    """Upper bound on E||positive part of F(x_avg)|| after k rounds."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    z, core = _core(inputs, k)
    return (core + 2.0 * (inputs.slater_gap + radius) ** 2) / (radius * z)


def optimality_gap_upper(inputs, k):
    """Upper bound on E[f0(x_avg) - f0*] after k rounds."""
    z, miss_lin, sq, miss_sq, miss2_sq = _sums(inputs, k)
    g = inputs.weighted_subgrad_bound
    ell = inputs.lagrangian_subgrad_bound
    rg = inputs.iterate_radius * g
    noise_coeff = inputs.beta * inputs.noise_power_w + 1.5 * ell * ell
    bracket = (0.5 * inputs.dual_start_sq
               + inputs.start_gap_sq
               + noise_coeff * sq
               + 2.0 * ell * g * miss_sq
               + ell * ell * miss2_sq)
    return (rg / z) * bracket + (rg / z) * miss_lin


def optimality_gap_lower(zeta_like, violation):
    """Lower bound on E[f0(x_avg) - f0*] given the violation level.

    violation may be a scalar or a per-round array.
    """
    if np.any(np.asarray(violation) < 0):
        raise ValueError("violation must be nonnegative")
    return -zeta_like * violation


def evaluate_bounds(inputs, radii=None):
    """All three bounds for every k = 1..rounds.

    radii may be an array of per-round dual-set radii (as used by the
    running algorithm); by default the closed-form radius is plugged
    in. Returns a dict of arrays keyed by bound name, plus the radii
    and the step sums, ready for a per-round CSV.
    """
    rounds = inputs.rounds
    if radii is None:
        radii = np.array([optimal_r(inputs, k) for k in range(1, rounds + 1)])
    else:
        radii = np.asarray(radii, float)
        if radii.shape != (rounds,):
            raise ValueError("radii must have one entry per round")
    viol = np.array([constraint_violation_bound(inputs, radii[k - 1], k)
                     for k in range(1, rounds + 1)])
    upper = np.array([optimality_gap_upper(inputs, k) for k in range(1, rounds + 1)])
    lower = optimality_gap_lower(inputs.slater_gap, viol)
    return {
        "round": np.arange(1, rounds + 1),
        "radius": radii,
        "violation_bound": viol,
        "gap_upper": upper,
        "gap_lower": lower,
    }


@dataclass
class EstimatedConstants:
    weighted_subgrad_bound: float
    lagrangian_subgrad_bound: float
    iterate_radius: float
    start_gap_sq: float


def estimate_constants(results, safety=SAFETY):
    """Empirical surrogates for the bound constants.

    results are instrumented solver results (run with
    instrument_reference set to the oracle optimum). Maxima over all
    rounds and runs are inflated by the safety factor; the mean
    start-distance-squared is not, since the bounds use it as an
    expectation rather than a sup. The Lagrangian bound is kept
    strictly above the weighted-signal bound, which the bound algebra
    assumes.
    """
    if not results:
        raise ValueError("need at least one solver result")
    missing = [r for r in results if "x_dist" not in r.instruments]
    if missing:
        raise ValueError("results lack instrumentation: rerun with instrument_reference")
    g_raw = max(float(r.instruments["lam_g_max"].max()) for r in results)
    l_raw = max(max(float(r.instruments["lagrangian_x_norm"].max()),
                    float(r.instruments["lagrangian_lam_norm"].max())) for r in results)
    radius_raw = max(float(r.instruments["x_dist"].max()) for r in results)
    start_sq = float(np.mean([r.instruments["x0_dist"] ** 2 for r in results]))
    g_est = safety * g_raw
    l_est = max(safety * l_raw, g_est * (1.0 + 1e-6), 1e-12)
    if g_est <= 0:
        g_est = 1e-12 / 2  # all-zero duals: keep the pair valid and tiny
    radius_est = safety * radius_raw
    if radius_est <= 0:
        radius_est = np.sqrt(start_sq) if start_sq > 0 else 1e-12
    return EstimatedConstants(g_est, l_est, radius_est, start_sq)
