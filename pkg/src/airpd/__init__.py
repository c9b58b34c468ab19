"""Distributed primal-dual optimization over an analog aggregation channel.

The solver runs a projected primal-dual subgradient method in which each
constraint owner transmits its dual-weighted subgradient over a shared
noisy fading channel; the server receives the (partial, noisy) sum and
descends. The package bundles the channel model, two worked use cases
(smart-grid demand pricing and FDMA power/bandwidth allocation), bound
evaluators for the method's convergence guarantees, and a Monte Carlo
harness with CSV output.
"""

from .bounds import (BoundInputs, EstimatedConstants, constraint_violation_bound,
                     delta_k, estimate_constants, evaluate_bounds, optimal_r,
                     optimality_gap_lower, optimality_gap_upper)
from .channel import (AirCompChannel, ChannelRound, ErrorFreeBaseline, FadingParams,
                      aircomp_round_duration, db_to_linear, dbm_to_watt,
                      expected_participants, participant_count_pmf,
                      tdma_round_duration, transmit_signal)
from .config import (CASES, CHANNELS, SCENARIO_NAMES, ConfigError, ExperimentConfig,
                     FdmaConfig, SmartGridConfig, load_config, parse_config,
                     scenario, serialize_config)
from .fdma import (FdmaParams, build_fdma_problem, fdma_oracle, fdma_rate,
                   max_min_rate, sum_rate, unpack_allocation, user_rates)
from .harness import (MonteCarloResult, OutputError, RunTrace, aggregate_traces,
                      exclusion_mask, make_channel, make_dual_schedule,
                      make_fading, make_step_schedule, run_error_free_baseline,
                      run_monte_carlo, run_scenario, run_single, write_aggregate_csv,
                      write_bounds_csv, write_outputs, write_rounds_csv)
from .problem import ProblemSpec
from .projections import project_capacity_cap, project_simplex, project_simplex_rows
from .schedules import DualSetSchedule, StepSchedule, optimal_radius
from .smartgrid import (SmartGridParams, StackelbergResult, build_smartgrid_problem,
                        epigraph_start, grid_revenue, optimal_price, pev_utility,
                        smartgrid_oracle, stackelberg_loop)
from .solver import (RoundLog, SolverResult, SolverState, dual_update, primal_update,
                     run_solver, weighted_average)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
