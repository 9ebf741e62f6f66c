#
# test_harness.py
# FocalHessian
#
# Tests the experiment harness end to end: run artifacts, reproducibility, spectrum export
# and comparison, sweeps, artifact readers and writers and the command-line entry point.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Testa a API de experimentos, os artefatos gerados e a CLI."""

import io
import sys
import argparse
import tempfile
import unittest
import importlib.util
from unittest import mock
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np
import numpy.testing as npt
import pandas as pd

from focalhessian.bin.FocalHessian import validate_switchover, parse_grid, main
from focalhessian.config import ExperimentConfig, save_config
from focalhessian.es_core import CovarianceModel
from focalhessian.focal import RunTrace, PracticalStepRecord, regularize_and_invert, PHASE_FOCAL
from focalhessian.libs import ConfigurationError, SearchAborted
from focalhessian.python_api import run_experiment, execute, export_spectrum, compare_spectrum_files, sweep
from focalhessian.python_api import ARTIFACTS, EXIT_OK, EXIT_ABORTED
from focalhessian.serialization_utils import read_trace, write_trace, read_matrix, write_matrix, read_json
from focalhessian.serialization_utils import read_spectrum_table, convert_to_serializable


def small_config(seed=1, budget=600, switchover="immediate"):
    return ExperimentConfig.from_dict({
        "landscape": {"name": "ellipse", "params": {"n": 6, "xi": 100, "noise_std": 0.01}},
        "mechanism": "focal",
        "focal": {"sigma0": 0.05, "c_cov": 0.1, "alpha": 0.25, "switchover": switchover},
        "budget": budget,
        "seed": seed,
    })


class TestRunExperiment(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_artifacts(self):
        config = small_config()
        status = run_experiment(config, output=self.root / "run", quiet=True)
        self.assertEqual(status, EXIT_OK)
        for name in ARTIFACTS + ["report.json"]:
            self.assertTrue((self.root / "run" / name).exists(), name)

        report = read_json(self.root / "run" / "report.json")
        self.assertEqual(report["generations"], 66)
        self.assertEqual(report["evaluations"], 594)
        self.assertTrue(report["converged_climb"])
        self.assertFalse(report["degenerate_covariance"])
        self.assertIn("comparison", report)
        self.assertEqual(report["practical_step_audit"]["violations"], 0)
        self.assertEqual(sorted(report["checksums"]), sorted(ARTIFACTS))

        trace = read_trace(self.root / "run" / "trace.csv")
        self.assertEqual(len(trace), 66)
        self.assertEqual(ExperimentConfig.from_dict(trace.header["config"]), config)
        evaluations = [r.evaluations for r in trace.records]
        self.assertTrue(np.all(np.diff(evaluations) > 0))
        self.assertLessEqual(evaluations[-1], config.budget)
        self.assertTrue(all(r.phase == PHASE_FOCAL for r in trace.records))

        H = read_matrix(self.root / "run" / "hessian.txt")
        self.assertEqual(H.shape, (6, 6))
        npt.assert_array_equal(H, H.T)
        self.assertEqual(read_matrix(self.root / "run" / "covariance.txt").shape, (6, 6))

        df, summary = read_spectrum_table(self.root / "run" / "spectrum.csv")
        self.assertEqual(list(df.columns), ["index", "recovered", "reference", "ratio"])
        self.assertIn("log_rms_error", summary)

    def test_reproducible(self):
        _, _, a = execute(small_config(seed=5), output=self.root / "a", quiet=True)
        _, _, b = execute(small_config(seed=5), output=self.root / "b", quiet=True)
        _, _, c = execute(small_config(seed=6), output=self.root / "c", quiet=True)
        self.assertEqual(a["checksums"], b["checksums"])
        self.assertNotEqual(a["checksums"]["trace.csv"], c["checksums"]["trace.csv"])

    def test_unconverged_climb_still_succeeds(self):
        config = small_config(budget=200, switchover={"mode": "sigma_below", "value": 1e-12})
        status, _, report = execute(config, output=self.root / "run", quiet=True)
        self.assertEqual(status, EXIT_OK)
        self.assertFalse(report["converged_climb"])
        self.assertIsNone(report["learning_rate"])
        self.assertEqual(report["practical_step_audit"]["checked"], 0)

    def test_singular_covariance_stops_the_run(self):
        verdicts = iter([False] * 10 + [True])
        with mock.patch("focalhessian.focal.is_near_singular", side_effect=lambda eigenvalues: next(verdicts)):
            status, output_dir, report = execute(small_config(), output=self.root / "run", quiet=True)
        self.assertEqual(status, EXIT_OK)
        self.assertFalse(report["aborted"])
        self.assertTrue(report["degenerate_covariance"])
        self.assertTrue(report["estimate"]["degenerate_covariance"])
        self.assertEqual(report["degenerate_generation"], 11)
        self.assertEqual(report["generations"], 10)
        self.assertTrue(np.isfinite(report["final_cond_c"]))
        self.assertTrue(read_trace(output_dir / "trace.csv").header["degenerate_covariance"])

    def test_invalid_config(self):
        with self.assertRaises(ConfigurationError):
            run_experiment(small_config(seed=None), output=self.root / "run", quiet=True)
        with self.assertRaises(ConfigurationError):
            run_experiment(small_config(budget=3), output=self.root / "run", quiet=True)

    def test_aborted_search(self):
        aborted = SearchAborted("state became non-finite", trace=RunTrace(header={"seed": 1}))
        with mock.patch("focalhessian.python_api.run_search", side_effect=aborted):
            status, output_dir, report = execute(small_config(), output=self.root / "run", quiet=True)
        self.assertEqual(status, EXIT_ABORTED)
        self.assertTrue(report["aborted"])
        self.assertTrue((output_dir / "trace.csv").exists())
        self.assertTrue(read_json(output_dir / "report.json")["aborted"])

    def test_sweep(self):
        df = sweep(small_config(), seeds=[1, 2], overrides=[{"budget": 300}, {"budget": 600}],
                   output_root=self.root / "sweep", n_jobs=1, quiet=True)
        self.assertEqual(len(df), 4)
        self.assertTrue((df["status"] == EXIT_OK).all())
        self.assertTrue((self.root / "sweep" / "sweep_summary.csv").exists())
        self.assertEqual(sorted(set(df["seed"])), [1, 2])

    @unittest.skipUnless(importlib.util.find_spec("matplotlib"), "matplotlib not installed")
    def test_previews(self):
        config = small_config().with_overrides(previews=True)
        self.assertEqual(run_experiment(config, output=self.root / "run", quiet=True), EXIT_OK)
        self.assertTrue((self.root / "run" / "spectrum.png").exists())
        self.assertTrue((self.root / "run" / "practical_steps.png").exists())


class TestSpectrumFiles(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.estimate = regularize_and_invert(CovarianceModel.from_matrix(np.diag([1.0, 0.1, 0.01])))

    def tearDown(self):
        self.tmp.cleanup()

    def test_export_without_reference(self):
        path = self.root / "spectrum.csv"
        self.assertIsNone(export_spectrum(self.estimate, path=path))
        df, summary = read_spectrum_table(path)
        self.assertEqual(list(df.columns), ["index", "recovered"])
        self.assertEqual(summary, {})
        npt.assert_allclose(df["recovered"], self.estimate.spectrum, rtol=1e-15)

    def test_export_with_reference(self):
        comparison = export_spectrum(self.estimate, reference=self.estimate.H, path=self.root / "spectrum.csv")
        self.assertAlmostEqual(comparison.log_rms_error, 0.0, places=10)
        df, _ = read_spectrum_table(self.root / "spectrum.csv")
        npt.assert_allclose(df["ratio"], np.ones(3), rtol=1e-10)

    def test_compare_files(self):
        write_matrix(self.estimate.H, self.root / "a.txt")
        write_matrix(10 * self.estimate.H, self.root / "b.txt")
        export_spectrum(self.estimate, path=self.root / "a.csv")
        self.assertAlmostEqual(compare_spectrum_files(self.root / "a.txt", self.root / "a.csv").log_rms_error, 0.0, places=10)
        self.assertAlmostEqual(compare_spectrum_files(self.root / "b.txt", self.root / "a.txt").log_rms_error, 1.0, places=10)


class TestSerialization(unittest.TestCase):
    def test_matrix_round_trip(self):
        M = np.random.default_rng(0).standard_normal((4, 3))
        with tempfile.TemporaryDirectory() as tmp:
            write_matrix(M, Path(tmp) / "m.txt")
            npt.assert_array_equal(read_matrix(Path(tmp) / "m.txt"), M)

    def test_trace_round_trip(self):
        records = [PracticalStepRecord(generation=g, evaluations=10 * g, phase="focal", best_fitness=0.1 / g,
                                       parent_fitness=0.2 / g, sigma=0.3, trace_c=1.5, cond_c=2.0 + g,
                                       lambda_min=0.5, lambda_max=1.0, delta_p=0.7, delta_p_unit=0.9,
                                       lower_bound=0.8, upper_bound=1.1, empirical_step=0.05, rejections=g)
                   for g in range(1, 4)]
        trace = RunTrace(header={"seed": 1, "focal": {"alpha": 0.1}, "note": None}, records=records)
        with tempfile.TemporaryDirectory() as tmp:
            write_trace(trace, Path(tmp) / "trace.csv")
            loaded = read_trace(Path(tmp) / "trace.csv")
        self.assertEqual(loaded.header, trace.header)
        pd.testing.assert_frame_equal(loaded.to_frame(), trace.to_frame(), check_dtype=False)

    def test_convert_to_serializable(self):
        d = convert_to_serializable({"a": np.float64(np.nan), "b": (1, np.int64(2)), "c": np.array([1.5, np.inf]),
                                     "d": np.bool_(True), "e": Path("/tmp/x")})
        self.assertEqual(d, {"a": None, "b": [1, 2], "c": [1.5, None], "d": True, "e": "/tmp/x"})


class TestCommandLine(unittest.TestCase):
    def test_valid_switchover(self):
        self.assertEqual(validate_switchover("immediate"), {"mode": "immediate", "value": None})
        self.assertEqual(validate_switchover("sigma_below:1e-4"), {"mode": "sigma_below", "value": 1e-4})
        self.assertEqual(validate_switchover("generation_at:50"), {"mode": "generation_at", "value": 50.0})

    def test_invalid_switchover(self):
        for value in ("sometimes", "sigma_below:", "sigma_below:abc", "generation_at:-3", "immediate:1"):
            with self.assertRaises(argparse.ArgumentTypeError):
                validate_switchover(value)

    def test_parse_grid(self):
        overrides = parse_grid(["focal.alpha=0.1,0.2", "budget=100,200", "landscape.n=5"])
        self.assertEqual(len(overrides), 4)
        self.assertEqual(overrides[0], {"focal": {"alpha": 0.1}, "budget": 100, "landscape_params": {"n": 5}})
        self.assertEqual(parse_grid(None), [{}])
        with self.assertRaises(argparse.ArgumentTypeError):
            parse_grid(["budget"])

    def test_params_command(self):
        out = io.StringIO()
        with mock.patch.object(sys, "argv", ["FocalHessian", "params", "-n", "30", "80"]), redirect_stdout(out):
            with self.assertRaises(SystemExit) as ctx:
                main()
        self.assertEqual(ctx.exception.code, 0)
        self.assertIn("0.0400", out.getvalue())

    def test_table1_alias(self):
        out = io.StringIO()
        with mock.patch.object(sys, "argv", ["FocalHessian", "table1", "-n", "80", "--rank_class", "full_rank"]), redirect_stdout(out):
            with self.assertRaises(SystemExit) as ctx:
                main()
        self.assertEqual(ctx.exception.code, 0)
        self.assertIn("0.0400", out.getvalue())
        self.assertIn("0.1000", out.getvalue())

    def test_run_command_free_scale(self):
        with tempfile.TemporaryDirectory() as tmp:
            config_path = Path(tmp) / "config.json"
            save_config(small_config(seed=None, budget=300), config_path)
            argv = ["FocalHessian", "run", "-c", str(config_path), "-s", "2", "--covariance_scale", "free",
                    "-o", str(Path(tmp) / "out"), "-q"]
            with mock.patch.object(sys, "argv", argv):
                with self.assertRaises(SystemExit) as ctx:
                    main()
            self.assertEqual(ctx.exception.code, 0)
            report = read_json(Path(tmp) / "out" / "report.json")
            self.assertFalse(report["config"]["focal"]["normalize_scale"])

    def test_run_command(self):
        with tempfile.TemporaryDirectory() as tmp:
            config_path = Path(tmp) / "config.json"
            save_config(small_config(seed=None, budget=300), config_path)
            argv = ["FocalHessian", "run", "-c", str(config_path), "-s", "4", "-o", str(Path(tmp) / "out"), "-q"]
            with mock.patch.object(sys, "argv", argv):
                with self.assertRaises(SystemExit) as ctx:
                    main()
            self.assertEqual(ctx.exception.code, 0)
            report = read_json(Path(tmp) / "out" / "report.json")
            self.assertEqual(report["config"]["seed"], 4)

    def test_invalid_run_exits_with_one(self):
        with tempfile.TemporaryDirectory() as tmp:
            config_path = Path(tmp) / "config.json"
            config_path.write_text('{"landscape": {"name": "banana", "params": {}}}')
            argv = ["FocalHessian", "run", "-c", str(config_path), "-s", "1", "-o", str(Path(tmp) / "out")]
            out = io.StringIO()
            with mock.patch.object(sys, "argv", argv), redirect_stdout(out):
                with self.assertRaises(SystemExit) as ctx:
                    main()
            self.assertEqual(ctx.exception.code, 1)
            self.assertIn("ERROR", out.getvalue())


if __name__ == "__main__":
    unittest.main()
