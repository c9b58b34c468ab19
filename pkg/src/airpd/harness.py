"""Monte Carlo experiment driver.

One run = one random instance (device parameters and distances), one
start point, and one realization of the channel over all rounds. Runs
are seeded base_seed + run_index, so traces are reproducible one by one
and sweeps that share a base seed see identical instances, which makes
cross-configuration comparisons paired rather than independent.

Per-round records follow the averaged iterate: the row with round = k
describes the step-weighted average of the first k iterates, and its
sim_time_s is the air time of those k rounds.
"""

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import (AirCompChannel, ErrorFreeBaseline, FadingParams,
                      aircomp_round_duration, db_to_linear, dbm_to_watt)
from .config import serialize_config
from .fdma import FdmaParams, build_fdma_problem
from .schedules import DualSetSchedule, StepSchedule
from .smartgrid import (SmartGridParams, build_smartgrid_problem, epigraph_start,
                        stackelberg_loop)
from .solver import run_solver

ROUNDS_COLUMNS = ("run_id", "round", "sim_time_s", "participants",
                  "violation", "objective", "price", "sum_rate")
AGGREGATE_COLUMNS = ("round", "sim_time_s_mean", "violation_mean", "violation_stderr",
                     "objective_mean", "objective_stderr", "participants_mean")


class OutputError(RuntimeError):
    """I/O failure while writing results, with the offending path."""


def make_fading(config, d_ratio):
    return FadingParams(t0=db_to_linear(config.t0_db), d_ratio=d_ratio,
                        alpha=config.path_loss_exp, eps=config.rician_factor)


def make_channel(config, fading, force_full=False):
    """The aggregation medium the config asks for.

    error_free uses the band-integrated noise power for its link rates;
    the analog channel uses the same dBm figure as per-symbol noise
    power at the receiver.
    """
    if config.channel == "error_free":
        return ErrorFreeBaseline(fading, config.p_max_w,
                                 dbm_to_watt(config.noise_dbm) * config.bandwidth_hz,
                                 config.symbols, config.bandwidth_hz)
    return AirCompChannel(fading, config.beta, config.p_max_w,
                          dbm_to_watt(config.noise_dbm), config.symbols,
                          config.bandwidth_hz, force_full=force_full)


def make_step_schedule(config):
    return StepSchedule(config.step_c1, config.step_c2)


def make_dual_schedule(config):
    return DualSetSchedule("practical", zeta_prime=config.zeta_prime,
                           vartheta=config.vartheta)


def exclusion_mask(channel, signal_norms2, threshold, rng):
    """Keep-mask over devices by round-0 participation probability.

    A device whose odds of inverting its channel within the power budget
    fall below the threshold is dropped from the problem up front. With
    zero initial duals every round-0 signal is zero, so everyone passes
    and no random numbers are consumed; the general path matters only
    for nonzero dual starts.
    """
    norms2 = np.asarray(signal_norms2, float)
    if threshold <= 0 or not norms2.any():
        return np.ones(norms2.size, dtype=bool)
    probs = channel.participation_probability(norms2, rng)
    return probs >= threshold


@dataclass
class RunTrace:
    """Flat per-run record; one array entry per recorded round.

    round is 1-based: entry with round = k is the state after k rounds
    (the step-weighted average over iterates 0..k-1 of that stage
    sequence). price is None for the FDMA case, sum_rate is None for
    the smart grid.
    """

    run_id: int
    round: np.ndarray
    sim_time_s: np.ndarray
    participants: np.ndarray
    violation: np.ndarray
    objective: np.ndarray
    price: np.ndarray
    sum_rate: np.ndarray
    diverged: bool
    final_price: float = None
    final_u: np.ndarray = None
    stages: int = 1
    price_converged: bool = True
    excluded_devices: int = 0


def _sim_time(config, durations):
    if config.channel == "aircomp":
        # all rounds share the exact same air time; multiply instead of
        # accumulating so time at round k is exactly k * L / B
        per_round = aircomp_round_duration(config.symbols, config.bandwidth_hz)
        return (np.arange(durations.size) + 1.0) * per_round
    return np.cumsum(durations)


def _smartgrid_run(config, run_index):
    sg = config.smart_grid
    rng = np.random.default_rng(config.base_seed + run_index)
    n = sg.n_devices
    b = rng.uniform(sg.b_min, sg.b_max, n)
    s = rng.uniform(sg.s_min, sg.s_max, n)
    d_ratio = rng.uniform(config.d_ratio_min, config.d_ratio_max, n)
    fading = make_fading(config, d_ratio)
    channel = make_channel(config, fading)
    steps = make_step_schedule(config)
    duals = make_dual_schedule(config)
    params = SmartGridParams(b, s, sg.capacity, sg.price)

    keep = exclusion_mask(channel, np.zeros(n), config.exclusion_probability,
                          np.random.default_rng([config.base_seed + run_index, 1])) \
        if config.channel == "aircomp" else np.ones(n, dtype=bool)

    def solve_stage(stage_params, warm_u):
        prob = build_smartgrid_problem(stage_params, util_scale=sg.util_scale,
                                       y_slope=sg.y_slope)
        if not keep.all():
            prob = prob.drop_constraints(keep)
        if warm_u is None:
            x0 = None  # drawn from the init box inside the solver
        else:
            x0 = epigraph_start(warm_u, stage_params, sg.util_scale, sg.y_slope)
        res = run_solver(prob, channel, steps, duals, config.rounds, rng, x0=x0)
        return res.x_avg[:n], res

    if sg.stackelberg:
        game = stackelberg_loop(params, solve_stage, price_rule=sg.price_rule,
                                tol_rel=sg.stackelberg_tol,
                                max_stages=sg.stackelberg_max_stages)
        results = game.stage_results
        prices = game.prices
        final_price = float(game.prices[-1])
        final_u = game.u
        converged = game.converged
    else:
        final_u, res = solve_stage(params, None)
        results = [res]
        prices = np.array([sg.price])
        final_price = float(sg.price)
        converged = True

    # logs are in solver units (surplus times util_scale); report currency
    viol = np.concatenate([r.log.violation for r in results]) / sg.util_scale
    obj = np.concatenate([r.log.objective for r in results]) / sg.util_scale
    parts = np.concatenate([r.log.participants for r in results])
    dur = np.concatenate([r.log.duration_s for r in results])
    price_col = np.concatenate([np.full(r.log.violation.size, prices[i])
                                for i, r in enumerate(results)])
    total = viol.size
    return RunTrace(
        run_id=run_index,
        round=np.arange(1, total + 1),
        sim_time_s=_sim_time(config, dur),
        participants=parts,
        violation=viol,
        objective=obj,
        price=price_col,
        sum_rate=None,
        diverged=any(r.diverged for r in results),
        final_price=final_price,
        final_u=final_u,
        stages=len(results),
        price_converged=converged,
        excluded_devices=int(n - keep.sum()),
    )


def _fdma_run(config, run_index):
    fd = config.fdma
    rng = np.random.default_rng(config.base_seed + run_index)
    n = fd.n_users
    d_ratio = rng.uniform(config.d_ratio_min, config.d_ratio_max, n)
    fading = make_fading(config, d_ratio)
    # downlink service gains: one draw per user per band, static over the run
    gains = fading.sample(rng, size=fd.n_bands).T
    params = FdmaParams(gains=gains, bandwidth_hz=config.bandwidth_hz,
                        n0_w_per_hz=dbm_to_watt(fd.n0_dbm_hz),
                        power_budget_w=fd.power_budget_w,
                        r_th_bps=fd.r_th_bps, rate_scale=fd.rate_scale,
                        objective_scale=fd.objective_scale, w_scale=fd.w_scale)
    problem = build_fdma_problem(params)
    channel = make_channel(config, fading)
    keep = exclusion_mask(channel, np.zeros(n), config.exclusion_probability,
                          np.random.default_rng([config.base_seed + run_index, 1])) \
        if config.channel == "aircomp" else np.ones(n, dtype=bool)
    if not keep.all():
        problem = problem.drop_constraints(keep)
    res = run_solver(problem, channel, make_step_schedule(config),
                     make_dual_schedule(config), config.rounds, rng)
    # logs are in solver units; report bit/s
    viol = res.log.violation / fd.rate_scale
    obj = res.log.objective / fd.objective_scale
    total = viol.size
    return RunTrace(
        run_id=run_index,
        round=np.arange(1, total + 1),
        sim_time_s=_sim_time(config, res.log.duration_s),
        participants=res.log.participants.copy(),
        violation=viol,
        objective=obj,
        price=None,
        sum_rate=-obj,
        diverged=res.diverged,
        excluded_devices=int(n - keep.sum()),
    )


def run_single(config, run_index):
    """One full run (all Stackelberg stages for the smart grid)."""
    if config.use_case == "smart_grid":
        return _smartgrid_run(config, run_index)
    return _fdma_run(config, run_index)


def _run_one(args):
    return run_single(*args)


def aggregate_traces(traces):
    """Across-run mean and standard error per round.

    Diverged runs are left out entirely. Runs can have different lengths
    (the Stackelberg game may settle after a different number of
    stages); round k averages whatever runs recorded it.
    """
    active = [t for t in traces if not t.diverged]
    if not active:
        return {col: np.array([]) for col in AGGREGATE_COLUMNS}
    max_len = max(t.round.size for t in active)

    def stats(getter, want_stderr):
        mat = np.full((len(active), max_len), np.nan)
        for i, t in enumerate(active):
            arr = getter(t)
            mat[i, : arr.size] = arr
        present = ~np.isnan(mat)
        count = present.sum(axis=0)
        mean = np.nansum(mat, axis=0) / count
        if not want_stderr:
            return mean, None
        dev = np.where(present, mat - mean, 0.0)
        var = (dev * dev).sum(axis=0) / np.maximum(count - 1, 1)
        stderr = np.sqrt(var / count)
        stderr[count < 2] = 0.0
        return mean, stderr

    time_mean, _ = stats(lambda t: t.sim_time_s, False)
    viol_mean, viol_err = stats(lambda t: t.violation, True)
    obj_mean, obj_err = stats(lambda t: t.objective, True)
    part_mean, _ = stats(lambda t: t.participants.astype(float), False)
    return {
        "round": np.arange(1, max_len + 1),
        "sim_time_s_mean": time_mean,
        "violation_mean": viol_mean,
        "violation_stderr": viol_err,
        "objective_mean": obj_mean,
        "objective_stderr": obj_err,
        "participants_mean": part_mean,
    }


@dataclass
class MonteCarloResult:
    config: object
    traces: list
    aggregate: dict
    divergence_count: int

    @property
    def active_traces(self):
        return [t for t in self.traces if not t.diverged]

    def mean_final_price(self):
        prices = [t.final_price for t in self.active_traces if t.final_price is not None]
        return float(np.mean(prices)) if prices else float("nan")

    def mean_final_sum_rate(self):
        rates = [t.sum_rate[-1] for t in self.active_traces if t.sum_rate is not None]
        return float(np.mean(rates)) if rates else float("nan")

    def mean_violation_at(self, round_k):
        """Across-run mean violation at 1-based round index round_k."""
        idx = np.searchsorted(self.aggregate["round"], round_k)
        if idx >= self.aggregate["round"].size or self.aggregate["round"][idx] != round_k:
            raise ValueError(f"round {round_k} not recorded")
        return float(self.aggregate["violation_mean"][idx])

    def time_to_violation(self, level):
        """Mean simulated time until the violation first drops to level."""
        times = []
        for t in self.active_traces:
            hit = np.nonzero(t.violation <= level)[0]
            if hit.size:
                times.append(t.sim_time_s[hit[0]])
        return float(np.mean(times)) if times else float("inf")


def run_monte_carlo(config, runs=None, base_seed=None, channel=None):
    """Execute all runs of one configuration; no file I/O here."""
    overrides = {}
    if runs is not None:
        overrides["runs"] = int(runs)
    if base_seed is not None:
        overrides["base_seed"] = int(base_seed)
    if channel is not None:
        overrides["channel"] = channel
    if overrides:
        config = config.replace(**overrides)
    jobs = [(config, i) for i in range(config.runs)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            traces = list(pool.map(_run_one, jobs))
    else:
        traces = [run_single(config, i) for i in range(config.runs)]
    aggregate = aggregate_traces(traces)
    return MonteCarloResult(config, traces, aggregate,
                            sum(1 for t in traces if t.diverged))


def run_error_free_baseline(config, runs=None, base_seed=None):
    """Same experiment with exact aggregation and TDMA air time."""
    return run_monte_carlo(config, runs=runs, base_seed=base_seed, channel="error_free")


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_rounds_csv(path, traces):
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(ROUNDS_COLUMNS)
            for t in traces:
                price = t.price if t.price is not None else [None] * t.round.size
                rate = t.sum_rate if t.sum_rate is not None else [None] * t.round.size
                for k in range(t.round.size):
                    writer.writerow([
                        t.run_id, int(t.round[k]), _fmt(t.sim_time_s[k]),
                        int(t.participants[k]), _fmt(t.violation[k]),
                        _fmt(t.objective[k]), _fmt(price[k]), _fmt(rate[k]),
                    ])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_aggregate_csv(path, aggregate):
    path = Path(path)
    rounds = aggregate["round"]
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(AGGREGATE_COLUMNS)
            for k in range(rounds.size):
                writer.writerow([int(rounds[k])]
                                + [_fmt(aggregate[col][k]) for col in AGGREGATE_COLUMNS[1:]])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_bounds_csv(path, table):
    """Bounds-per-round CSV from an evaluate_bounds table."""
    path = Path(path)
    cols = list(table)
    rounds = table["round"]
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(cols)
            for k in range(len(rounds)):
                writer.writerow([_fmt(table[c][k]) if c != "round" else int(table[c][k])
                                 for c in cols])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def _label_summary(result):
    cfg = result.config
    entry = {
        "use_case": cfg.use_case,
        "channel": cfg.channel,
        "beta": cfg.beta,
        "rounds": cfg.rounds,
        "runs": len(result.traces),
        "diverged_runs": result.divergence_count,
        "config": serialize_config(cfg),
    }
    if cfg.use_case == "smart_grid":
        entry["mean_final_price"] = result.mean_final_price()
        entry["mean_stages"] = float(np.mean([t.stages for t in result.traces]))
    else:
        entry["mean_final_sum_rate"] = result.mean_final_sum_rate()
    agg = result.aggregate
    if agg["round"].size:
        entry["mean_final_violation"] = float(agg["violation_mean"][-1])
    return entry


def write_outputs(results, out_dir, scenario_name):
    """Write <label>.rounds.csv, <label>.aggregate.csv and manifest.json.

    results maps label -> MonteCarloResult. Returns the directory the
    files landed in.
    """
    out = Path(out_dir) / scenario_name
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out}: {exc}") from exc
    manifest = {"scenario": scenario_name, "labels": {}}
    for label in sorted(results):
        result = results[label]
        write_rounds_csv(out / f"{label}.rounds.csv", result.traces)
        write_aggregate_csv(out / f"{label}.aggregate.csv", result.aggregate)
        manifest["labels"][label] = _label_summary(result)
    try:
        with open(out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OutputError(f"cannot write {out / 'manifest.json'}: {exc}") from exc
    return out


def run_scenario(name, out_dir, runs=None, base_seed=None, channel=None):
    """Run every member of a named scenario and write its directory."""
    from .config import scenario as scenario_configs

    results = {}
    for label, cfg in scenario_configs(name):
        results[label] = run_monte_carlo(cfg, runs=runs, base_seed=base_seed,
                                         channel=channel)
    return write_outputs(results, out_dir, name), results
