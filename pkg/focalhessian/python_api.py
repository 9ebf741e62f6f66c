#
# python_api.py
# FocalHessian
#
# High-level Python interface: run one configured experiment end to end, run sweeps over seeds
# and parameter grids, export and compare recovered spectra.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""API de alto nivel para executar experimentos e exportar espectros."""

import json
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from focalhessian.config import ExperimentConfig, get_runs_dir, get_version
from focalhessian.focal import run_search
from focalhessian.libs import SearchAborted
from focalhessian.analysis import compare_spectra, fit_learning_rate, audit_practical_steps
from focalhessian.analysis import principal_angles, top_eigenspace, spectral_rank, MIN_FIT_POINTS
from focalhessian.serialization_utils import write_trace, write_matrix, write_json, hash_file, read_matrix
from focalhessian.serialization_utils import write_spectrum_table, read_spectrum_table


EXIT_OK = 0
EXIT_INVALID_CONFIG = 1
EXIT_ABORTED = 2

ARTIFACTS = ["trace.csv", "covariance.txt", "hessian.txt", "hessian_eigenvectors.txt", "spectrum.csv"]


def default_output_dir(config):
    return get_runs_dir() / f"{config.landscape}_{config.kernel}_{config.mechanism}_seed{config.seed}"


def reference_spectrum(landscape):
    """Eigenvalues of the analytic Hessian in minimization convention, or None."""
    H = landscape.hessian_minimization()
    if H is None:
        return None
    return np.linalg.eigvalsh(H)


def export_spectrum(estimate, reference=None, path=None, rank_gap_decades=2.0):
    """
    Writes the recovered spectrum (index, recovered[, reference, ratio]) and, when a reference is
    given, a '#' summary block with the spectrum comparison.

    reference: eigenvalues (1d) or a symmetric matrix (2d) in minimization convention
    returns: SpectrumComparison or None
    """
    recovered = np.sort(np.abs(estimate.spectrum))[::-1]
    df = pd.DataFrame({"index": np.arange(1, recovered.shape[0] + 1), "recovered": recovered})
    comparison = None
    summary = None
    if reference is not None:
        reference = np.asarray(reference, dtype=float)
        if reference.ndim == 2:
            reference = np.linalg.eigvalsh(reference)
        comparison = compare_spectra(estimate.spectrum, reference, "minimize", rank_gap_decades)
        df["reference"] = comparison.reference
        df["ratio"] = comparison.ratios
        summary = comparison.to_dict()
        for key in ("recovered", "reference", "ratios"):
            summary.pop(key)
    if path is not None:
        write_spectrum_table(df, summary, path)
    return comparison


def _load_spectrum(path):
    path = Path(path)
    if path.suffix == ".txt":
        return np.linalg.eigvalsh(read_matrix(path))
    df, _ = read_spectrum_table(path)
    return df["recovered"].to_numpy()


def compare_spectrum_files(path_a, path_b, rank_gap_decades=2.0):
    """
    Compares the recovered spectrum of path_a against path_b (used as reference).
    Spectrum tables (.csv) and matrix files (.txt) are accepted.
    """
    return compare_spectra(_load_spectrum(path_a), _load_spectrum(path_b), "minimize", rank_gap_decades)


def _fitness_summary(records):
    if not records:
        return None
    values = np.array([r.parent_fitness for r in records])
    return {"median": float(np.median(values)), "min": float(values.min()), "max": float(values.max())}


def build_report(config, landscape, estimate, trace):
    report = {
        "version": get_version(),
        "config": config.to_dict(),
        "converged_climb": estimate.converged_climb,
        "degenerate_covariance": estimate.degenerate_covariance,
        "degenerate_generation": trace.header.get("degenerate_generation"),
        "aborted": False,
        "evaluations": estimate.evaluations,
        "generations": len(trace),
        "switchover_generation": trace.header.get("switchover_generation"),
        "estimate": estimate.summary(),
        "final_cond_c": float(trace.records[-1].cond_c) if len(trace) else None,
        "rank_estimate": spectral_rank(estimate.spectrum),
        "parent_fitness_focal": _fitness_summary(trace.focal_records()),
        "parent_fitness_all": _fitness_summary(trace.records),
    }

    reference = reference_spectrum(landscape)
    if reference is not None:
        comparison = compare_spectra(estimate.spectrum, reference, "minimize")
        summary = comparison.to_dict()
        for key in ("recovered", "reference", "ratios"):
            summary.pop(key)
        report["comparison"] = summary
        rank = comparison.reference_rank
        if rank < landscape.dimension:
            angles = principal_angles(estimate.eigenvectors[:, :rank], top_eigenspace(landscape.hessian_minimization(), rank))
            report["principal_angles_deg"] = angles.tolist()

    if len(trace.focal_records()) >= MIN_FIT_POINTS:
        report["learning_rate"] = fit_learning_rate(trace).to_dict()
    else:
        report["learning_rate"] = None
    report["practical_step_audit"] = audit_practical_steps(trace).to_dict()
    return report


def _write_previews(output_dir, estimate, trace, reference, quiet):
    try:
        from focalhessian.preview import plot_spectrum, plot_practical_steps
    except ImportError:
        if not quiet:
            print("WARNING: matplotlib is not installed; skipping previews.")
        return
    plot_spectrum(estimate.spectrum, reference, output_dir / "spectrum.png")
    plot_practical_steps(trace, output_dir / "practical_steps.png")


def execute(config: ExperimentConfig, output: Union[str, Path, None] = None, quiet=False, verbose=False):
    """
    Runs one experiment and writes all artifacts.

    returns: (exit status, output directory, report)
    """
    landscape = config.validate()
    output_dir = Path(output) if output is not None else (Path(config.output_dir) if config.output_dir else default_output_dir(config))
    output_dir.mkdir(parents=True, exist_ok=True)

    n = landscape.dimension
    strategy = config.build_strategy(n)
    focal = config.build_focal(n, quiet=quiet)
    header = {"version": get_version(), "config": config.to_dict()}

    if verbose:
        print(f"Running {config.mechanism} ({config.kernel}) on {landscape.name} n={n}, lambda={strategy.lam}, mu={strategy.mu}, budget={config.budget}, seed={config.seed}")

    try:
        estimate, trace = run_search(landscape, strategy, config.budget, config.seed, focal=focal,
                                     mechanism=config.mechanism, x0=config.initial_point(landscape),
                                     sigma_init=config.sigma_init, wrap_policy=config.build_wrap_policy(),
                                     n_jobs=config.n_jobs, quiet=quiet, verbose=verbose, header=header)
    except SearchAborted as e:
        if not quiet:
            print(f"ERROR: {e}")
        if e.trace is not None:
            write_trace(e.trace, output_dir / "trace.csv")
        report = {"version": get_version(), "config": config.to_dict(), "aborted": True, "error": str(e),
                  "generations": 0 if e.trace is None else len(e.trace)}
        write_json(report, output_dir / "report.json")
        return EXIT_ABORTED, output_dir, report

    write_trace(trace, output_dir / "trace.csv")
    write_matrix(estimate.covariance, output_dir / "covariance.txt")
    write_matrix(estimate.H, output_dir / "hessian.txt")
    write_matrix(estimate.eigenvectors, output_dir / "hessian_eigenvectors.txt")
    export_spectrum(estimate, reference_spectrum(landscape), output_dir / "spectrum.csv")

    report = build_report(config, landscape, estimate, trace)
    report["checksums"] = {name: hash_file(output_dir / name) for name in ARTIFACTS}
    write_json(report, output_dir / "report.json")

    if config.previews:
        _write_previews(output_dir, estimate, trace, reference_spectrum(landscape), quiet)

    if not quiet:
        if "comparison" in report:
            c = report["comparison"]
            print(f"Spectrum log-RMS error: {c['log_rms_error']:.3f} decades (shape only: {c['shape_log_rms_error']:.3f}), rank estimate {report['rank_estimate']}")
        print(f"Results saved to {output_dir}")
    return EXIT_OK, output_dir, report


def run_experiment(config: ExperimentConfig, output: Union[str, Path, None] = None, quiet=False, verbose=False):
    """
    Runs one experiment, writes trace.csv, covariance.txt, hessian.txt, hessian_eigenvectors.txt,
    spectrum.csv and report.json to the output directory.

    returns: exit status (0 ok, 2 aborted). Invalid configurations raise ConfigurationError.
    An unconverged climb still returns 0 and is flagged in the report.
    """
    status, _, _ = execute(config, output=output, quiet=quiet, verbose=verbose)
    return status


def _sweep_row(run_id, config, output_dir, overrides):
    status, _, report = execute(config, output=output_dir, quiet=True)
    row = {"run_id": run_id, "seed": config.seed, "overrides": json.dumps(overrides, sort_keys=True),
           "status": status, "output_dir": str(output_dir)}
    if status == EXIT_OK:
        comparison = report.get("comparison") or {}
        learning = report.get("learning_rate") or {}
        audit = report["practical_step_audit"]
        row.update({
            "converged_climb": report["converged_climb"],
            "degenerate_covariance": report["degenerate_covariance"],
            "log_rms_error": comparison.get("log_rms_error"),
            "shape_log_rms_error": comparison.get("shape_log_rms_error"),
            "rank_estimate": report["rank_estimate"],
            "final_cond_c": report["final_cond_c"],
            "r_squared": learning.get("r_squared"),
            "learning_slope": learning.get("slope"),
            "step_violations": audit["violations"],
            "median_proximity": audit["median_proximity"],
        })
    return row


def sweep(base_config: ExperimentConfig, seeds, overrides=None, output_root: Union[str, Path, None] = None,
          n_jobs=1, quiet=False):
    """
    Runs base_config for every combination of seed and override dict, one directory per run.

    overrides: list of dicts accepted by ExperimentConfig.with_overrides (default: [{}])
    returns: pandas DataFrame of per-run summaries (also written to sweep_summary.csv)
    """
    overrides = [{}] if not overrides else list(overrides)
    output_root = Path(output_root) if output_root is not None else get_runs_dir() / f"sweep_{base_config.landscape}_{base_config.mechanism}"
    output_root.mkdir(parents=True, exist_ok=True)

    jobs = []
    for i, ov in enumerate(overrides):
        for seed in seeds:
            cfg = base_config.with_overrides(seed=int(seed), **ov)
            cfg.validate()
            run_id = f"run_{i:03d}_seed{int(seed)}"
            jobs.append((run_id, cfg, output_root / run_id, ov))

    if not quiet:
        print(f"Running {len(jobs)} runs with n_jobs={n_jobs}")
    rows = Parallel(n_jobs=n_jobs)(delayed(_sweep_row)(*job) for job in tqdm(jobs, disable=quiet))
    df = pd.DataFrame(rows)
    df.to_csv(output_root / "sweep_summary.csv", index=False, float_format="%.17g", lineterminator="\n")
    if not quiet:
        print(f"Sweep summary saved to {output_root / 'sweep_summary.csv'}")
    return df
