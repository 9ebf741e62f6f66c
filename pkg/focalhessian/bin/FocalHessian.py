#!/usr/bin/env python
#
# FocalHessian.py
# FocalHessian
#
# Command-line entry point with the run, sweep, compare and params subcommands.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""CLI principal que le a configuracao e chama a API de experimentos."""

import sys
import json
import argparse
import itertools
from pathlib import Path

from focalhessian.config import load_config, get_preset, get_version, recommended_parameters, RECOMMENDED_PARAMETERS, PRESETS
from focalhessian.libs import ConfigurationError
from focalhessian.python_api import run_experiment, sweep, compare_spectrum_files


def validate_switchover(value):
    """
    immediate | sigma_below:<threshold> | generation_at:<generation>
    """
    if value == "immediate":
        return {"mode": "immediate", "value": None}
    mode, _, threshold = value.partition(":")
    if mode not in ("sigma_below", "generation_at") or not threshold:
        raise argparse.ArgumentTypeError(
            f"Invalid switchover: '{value}'. Must be 'immediate', 'sigma_below:<threshold>' or 'generation_at:<generation>'.")
    try:
        number = float(threshold)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid switchover value: '{threshold}' is not a number.")
    if number <= 0:
        raise argparse.ArgumentTypeError(f"Switchover value must be positive, got {number}.")
    return {"mode": mode, "value": number}


def parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_grid(items):
    """
    ["focal.alpha=0.1,0.2", "budget=10000,20000"] -> list of override dicts (cartesian product)
    """
    axes = []
    for item in items or []:
        key, sep, values = item.partition("=")
        if not sep or not values:
            raise argparse.ArgumentTypeError(f"Invalid grid entry '{item}'. Expected key=v1,v2,...")
        axes.append((key.strip(), [parse_value(v) for v in values.split(",")]))

    overrides = []
    for combo in itertools.product(*[values for _, values in axes]):
        ov = {}
        for (key, _), value in zip(axes, combo):
            section, _, name = key.partition(".")
            if name:
                if section == "landscape":
                    section = "landscape_params"
                ov.setdefault(section, {})[name] = value
            else:
                ov[section] = value
        overrides.append(ov)
    return overrides


def load_base_config(args):
    if args.config is not None and args.preset is not None:
        raise ConfigurationError("Use either --config or --preset, not both")
    if args.config is not None:
        return load_config(args.config)
    if args.preset is not None:
        return get_preset(args.preset)
    return get_preset("ellipse80")


def run_overrides(args):
    landscape_params = {"n": args.n, "xi": args.xi, "noise_std": args.noise_std, "rank": args.rank}
    strategy = {"lam": args.lam, "mu": args.mu, "c_cov": args.strategy_c_cov, "weights": args.weights}
    focal = {"sigma0": args.sigma0, "alpha": args.alpha, "c_cov": args.c_cov, "eps_tik": args.eps_tik,
             "switchover": args.switchover,
             "normalize_scale": None if args.covariance_scale is None else args.covariance_scale == "det"}
    return {
        "landscape": args.landscape,
        "landscape_params": landscape_params,
        "kernel": args.kernel,
        "mechanism": args.mechanism,
        "strategy": strategy,
        "focal": focal,
        "wrap_policy": args.wrap,
        "sigma_init": args.sigma_init,
        "budget": args.budget,
        "n_jobs": args.n_jobs,
        "previews": True if args.previews else None,
    }


def add_config_arguments(parser):
    parser.add_argument("-c", "--config", metavar="filepath", type=lambda p: Path(p).absolute(),
                        help="Experiment config (JSON). See resources/config_schema.md", default=None)
    parser.add_argument("-p", "--preset", choices=sorted(PRESETS), default=None,
                        help="Named experiment preset (default: ellipse80)")


def add_run_arguments(parser):
    parser.add_argument("--landscape", choices=["ellipse", "rankdef", "shg", "sphere"], default=None)
    parser.add_argument("-n", type=int, default=None, help="Dimension of the landscape")
    parser.add_argument("--xi", type=float, default=None, help="Condition number of the ellipse")
    parser.add_argument("--noise_std", type=float, default=None, help="Input-noise std")
    parser.add_argument("--rank", type=int, default=None, help="Rank of the rank-deficient quadratic")
    parser.add_argument("-k", "--kernel", choices=["def-cma", "sep-cma", "iso-cma"], default=None)
    parser.add_argument("-m", "--mechanism", choices=["csa", "focal"], default=None)
    parser.add_argument("--lam", type=int, default=None, help="Offspring count lambda")
    parser.add_argument("--mu", type=int, default=None, help="Parent count mu")
    parser.add_argument("--weights", choices=["log", "equal"], default=None)
    parser.add_argument("--strategy_c_cov", type=float, default=None,
                        help="Covariance learning rate for CSA runs (default: standard CMA value)")
    parser.add_argument("--sigma0", type=float, default=None, help="FOCAL forced step sigma0")
    parser.add_argument("--alpha", type=float, default=None, help="FOCAL learning power alpha in (0, 0.5]")
    parser.add_argument("--c_cov", type=float, default=None, help="FOCAL covariance learning rate")
    parser.add_argument("--eps_tik", type=float, default=None, help="Tikhonov parameter (default 1e-7)")
    parser.add_argument("--covariance_scale", choices=["det", "free"], default=None,
                        help="det: hold C at unit determinant in the forced-step phase (default), free: let its scale drift")
    parser.add_argument("--switchover", type=validate_switchover, default=None,
                        help="immediate | sigma_below:<threshold> | generation_at:<generation>")
    parser.add_argument("--wrap", choices=["default", "unbounded", "reject", "wrap"], default=None)
    parser.add_argument("--sigma_init", type=float, default=None, help="Initial step-size of the climb")
    parser.add_argument("-b", "--budget", type=int, default=None, help="Evaluation budget")
    parser.add_argument("-j", "--n_jobs", type=int, default=None, help="Threads for objective evaluations")
    parser.add_argument("--previews", action="store_true", default=False, help="Write PNG previews (needs matplotlib)")


def cmd_run(args):
    config = load_base_config(args).with_overrides(seed=args.seed, **run_overrides(args))
    return run_experiment(config, output=args.output, quiet=args.quiet, verbose=args.verbose)


def cmd_sweep(args):
    config = load_base_config(args)
    df = sweep(config, args.seeds, overrides=parse_grid(args.grid), output_root=args.output,
               n_jobs=args.n_jobs, quiet=args.quiet)
    if not args.quiet:
        print(df.to_string(index=False))
    return 0 if (df["status"] == 0).all() else 2


def cmd_compare(args):
    comparison = compare_spectrum_files(args.spectrum, args.reference, rank_gap_decades=args.rank_gap)
    print(f"log-RMS error:        {comparison.log_rms_error:.4f} decades")
    print(f"shape log-RMS error:  {comparison.shape_log_rms_error:.4f} decades (offset {comparison.scale_offset:+.4f})")
    print(f"rank estimate:        {comparison.rank_estimate} (reference rank {comparison.reference_rank})")
    print(f"compared eigenvalues: {comparison.n_compared}")
    return 0


def cmd_params(args):
    dims = args.n if args.n else sorted(RECOMMENDED_PARAMETERS["full_rank"])
    classes = [args.rank_class] if args.rank_class else ["rank_deficient", "full_rank"]
    print(f"{'n':>5} {'class':>15} {'c_cov':>8} {'alpha':>8}")
    for n in dims:
        for rank_class in classes:
            c_cov, alpha = recommended_parameters(n, rank_class)
            print(f"{n:>5} {rank_class:>15} {c_cov:>8.4f} {alpha:>8.4f}")
    return 0


def main():
    parser = argparse.ArgumentParser(description="Learn Hessians at the optimum with forced covariance adaptation.")
    parser.add_argument('--version', action='version', version=get_version())
    subparsers = parser.add_subparsers(dest="command", required=True)

    p_run = subparsers.add_parser("run", help="Run one experiment")
    add_config_arguments(p_run)
    add_run_arguments(p_run)
    p_run.add_argument("-s", "--seed", type=int, required=True, help="Random seed (mandatory)")
    p_run.add_argument("-o", metavar="directory", dest="output", type=lambda p: Path(p).absolute(), default=None,
                       help="Output directory (default: $FOCALHESSIAN_HOME_DIR/runs/...)")
    p_run.add_argument("-q", "--quiet", action="store_true", help="Print no intermediate outputs", default=False)
    p_run.add_argument("-v", "--verbose", action="store_true", help="Show more intermediate output", default=False)
    p_run.set_defaults(func=cmd_run)

    p_sweep = subparsers.add_parser("sweep", help="Run a grid of seeds and parameter overrides")
    add_config_arguments(p_sweep)
    p_sweep.add_argument("--seeds", type=int, nargs="+", required=True)
    p_sweep.add_argument("-g", "--grid", nargs="*", default=None,
                         help="Parameter grid entries like focal.alpha=0.1,0.2 or budget=10000,30000")
    p_sweep.add_argument("-o", metavar="directory", dest="output", type=lambda p: Path(p).absolute(), default=None)
    p_sweep.add_argument("-j", "--n_jobs", type=int, default=1, help="Parallel runs")
    p_sweep.add_argument("-q", "--quiet", action="store_true", default=False)
    p_sweep.set_defaults(func=cmd_sweep)

    p_compare = subparsers.add_parser("compare", help="Compare two spectrum (.csv) or matrix (.txt) files")
    p_compare.add_argument("spectrum", type=lambda p: Path(p).absolute())
    p_compare.add_argument("reference", type=lambda p: Path(p).absolute())
    p_compare.add_argument("--rank_gap", type=float, default=2.0, help="Rank gap threshold in decades")
    p_compare.set_defaults(func=cmd_compare)

    p_params = subparsers.add_parser("params", aliases=["table1"], help="Print recommended FOCAL parameters")
    p_params.add_argument("-n", type=int, nargs="*", default=None)
    p_params.add_argument("--rank_class", choices=["rank_deficient", "full_rank"], default=None)
    p_params.set_defaults(func=cmd_params)

    args = parser.parse_args()

    try:
        status = args.func(args)
    except (ConfigurationError, ValueError, argparse.ArgumentTypeError) as e:
        print(f"ERROR: {e}")
        sys.exit(1)
    sys.exit(status)


if __name__ == "__main__":
    main()
