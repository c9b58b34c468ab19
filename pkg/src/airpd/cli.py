"""simulate: run one experiment file or a named scenario and write CSVs."""

import argparse
import sys

from .config import SCENARIO_NAMES, ConfigError, load_config
from .harness import OutputError, run_monte_carlo, run_scenario, write_outputs


def build_parser():
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Monte Carlo driver for distributed optimization over an "
                    "analog aggregation channel. Writes per-round and "
                    "aggregate CSV traces plus a manifest.",
    )
    parser.add_argument("--config", metavar="FILE",
                        help="INI experiment description")
    parser.add_argument("--scenario", metavar="NAME",
                        help="named preset sweep, one of: " + ", ".join(SCENARIO_NAMES))
    parser.add_argument("--runs", type=int, default=None,
                        help="override the Monte Carlo run count")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the base seed")
    parser.add_argument("--out", default=None, metavar="DIR",
                        help="output directory (default: the config's out_dir)")
    parser.add_argument("--channel", choices=["aircomp", "error_free"], default=None,
                        help="override the aggregation channel")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if (args.config is None) == (args.scenario is None):
            raise ConfigError("exactly one of --config or --scenario is required")
        if args.scenario is not None:
            out_dir = args.out if args.out is not None else "results"
            path, results = run_scenario(args.scenario, out_dir, runs=args.runs,
                                         base_seed=args.seed, channel=args.channel)
            for label in sorted(results):
                res = results[label]
                agg = res.aggregate
                tail = (f"final mean violation {agg['violation_mean'][-1]:.6g}"
                        if agg["round"].size else "all runs diverged")
                print(f"{args.scenario}/{label}: {len(res.traces)} runs, "
                      f"{res.divergence_count} diverged, {tail}")
            print(f"wrote {path}")
        else:
            config = load_config(args.config)
            result = run_monte_carlo(config, runs=args.runs, base_seed=args.seed,
                                     channel=args.channel)
            out_dir = args.out if args.out is not None else config.out_dir
            path = write_outputs({config.use_case: result}, out_dir, "custom")
            agg = result.aggregate
            tail = (f"final mean violation {agg['violation_mean'][-1]:.6g}"
                    if agg["round"].size else "all runs diverged")
            print(f"custom/{config.use_case}: {len(result.traces)} runs, "
                  f"{result.divergence_count} diverged, {tail}")
            print(f"wrote {path}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OutputError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
