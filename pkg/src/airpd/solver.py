"""Distributed primal-dual subgradient loop over an aggregation channel.

Round k (zero-based), starting from x^k and lambda^k:

1. the server broadcasts x^k (free of charge downlink);
2. every device i updates its own dual, lambda_i^{k+1} = clamp(lambda_i^k
   + a_k f_i(x^k)) into the growing dual box;
3. every device transmits s_i = lambda_i^k g_i(x^k), weighted with the
   dual it held BEFORE the update, through the channel;
4. the server descends, x^{k+1} = P_X[x^k - a_k (g0(x^k) + y~)], where
   y~ is whatever the channel delivered as the sum of the s_i.

Per-round records evaluate the running step-weighted average of the
iterates x^0..x^k, which is the object the convergence guarantees talk
about, not the last iterate.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SolverState:
    x: np.ndarray
    lam: np.ndarray
    step_sum: float
    rounds_done: int


@dataclass
class RoundLog:
    """Per-round trace entries, one array per quantity, index = round."""

    violation: np.ndarray
    objective: np.ndarray
    participants: np.ndarray
    duration_s: np.ndarray
    step: np.ndarray


@dataclass
class SolverResult:
    state: SolverState
    x_avg: np.ndarray
    lam_avg: np.ndarray
    log: RoundLog
    diverged: bool
    diverged_round: int = -1
    # instrumentation (filled only when requested): per-round maxima used
    # for constant estimation, and distances to a reference point
    instruments: dict = field(default_factory=dict)


def weighted_average(points, weights):
    """Step-weighted average of a list of iterates.

    Raises if the weight mass is zero; an average of nothing is not a
    point.
    """
    weights = np.asarray(weights, dtype=float)
    z = weights.sum()
    if z <= 0:
        raise ValueError("total step weight is zero, average undefined")
    pts = np.asarray(points, dtype=float)
    return (weights[:, None] * pts).sum(axis=0) / z


def dual_update(lam, f_values, step, bound):
    """One dual ascent step, clamped into [0, bound] elementwise."""
    return np.clip(lam + step * f_values, 0.0, bound)


def primal_update(x, g0, aggregate, step, project):
    """One projected subgradient descent step on the primal."""
    return project(x - step * (g0 + aggregate))


def run_solver(problem, channel, step_schedule, dual_schedule, rounds, rng,
               x0=None, divergence_limit=1e9, instrument_reference=None):
    """Run the full loop for a fixed number of rounds.

    x0 overrides the problem's init-box draw (used for warm starts).
    divergence_limit aborts the run when ||x|| blows past it; the run is
    flagged and the trace is truncated at the offending round.
    instrument_reference, when given, turns on per-round recording of the
    quantities the bound-constant estimator needs (distances to the
    reference point, subgradient norms, dual-weighted signal norms).
    """
    if rounds < 1:
        raise ValueError("need at least one round")
    n = problem.n_constraints
    x = problem.draw_start(rng) if x0 is None else problem.project(np.asarray(x0, dtype=float))
    lam = np.zeros(n)

    viol = np.zeros(rounds)
    obj = np.zeros(rounds)
    parts = np.zeros(rounds, dtype=int)
    durs = np.zeros(rounds)
    steps = np.zeros(rounds)

    instrument = instrument_reference is not None
    if instrument:
        x_ref = np.asarray(instrument_reference, dtype=float)
        inst = {
            "x_dist": np.zeros(rounds),
            "lam_g_max": np.zeros(rounds),
            "lagrangian_x_norm": np.zeros(rounds),
            "lagrangian_lam_norm": np.zeros(rounds),
            "x0_dist": 0.0,
        }
        inst["x0_dist"] = float(np.linalg.norm(x - x_ref))
    else:
        inst = {}

    x_acc = np.zeros(problem.dimension)
    lam_acc = np.zeros(n)
    z = 0.0
    diverged = False
    diverged_round = -1

    for k in range(rounds):
        a = step_schedule.step(k)
        f_vals = problem.constraint_values(x)
        g_mat = problem.constraint_subgradients(x)
        signals = lam[:, None] * g_mat

        z_next = z + a
        lam_next = dual_update(lam, f_vals, a, dual_schedule.bound(z_next))

        ch = channel.round(signals, rng)
        g0 = problem.objective_subgradient(x)
        x_next = primal_update(x, g0, ch.aggregate, a, problem.project)

        # averaging runs over the iterates the subgradients were taken at
        x_acc += a * x
        lam_acc += a * lam
        z = z_next
        x_avg = x_acc / z

        viol[k] = problem.violation(x_avg)
        obj[k] = problem.objective(x_avg)
        parts[k] = int(ch.active.sum())
        durs[k] = ch.duration_s
        steps[k] = a

        if instrument:
            inst["x_dist"][k] = float(np.linalg.norm(x - x_ref))
            sig_norms = np.linalg.norm(signals, axis=1)
            inst["lam_g_max"][k] = float(sig_norms.max()) if n else 0.0
            inst["lagrangian_x_norm"][k] = float(np.linalg.norm(g0 + signals.sum(axis=0)))
            inst["lagrangian_lam_norm"][k] = float(np.linalg.norm(f_vals))

        if not np.isfinite(x_next).all() or np.linalg.norm(x_next) > divergence_limit:
            diverged = True
            diverged_round = k
            rounds_done = k + 1
            log = RoundLog(viol[:rounds_done], obj[:rounds_done], parts[:rounds_done],
                           durs[:rounds_done], steps[:rounds_done])
            if instrument:
                for key in ("x_dist", "lam_g_max", "lagrangian_x_norm", "lagrangian_lam_norm"):
                    inst[key] = inst[key][:rounds_done]
            state = SolverState(x_next, lam_next, z, rounds_done)
            return SolverResult(state, x_acc / z, lam_acc / z, log, diverged, diverged_round, inst)

        x, lam = x_next, lam_next

    state = SolverState(x, lam, z, rounds)
    log = RoundLog(viol, obj, parts, durs, steps)
    return SolverResult(state, x_acc / z, lam_acc / z, log, diverged, diverged_round, inst)
