#
# test_config.py
# FocalHessian
#
# Tests experiment configuration: recommended parameter lookups, JSON documents, presets,
# overrides and the home directory helpers.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Testa a camada de configuracao de experimentos."""

import io
import os
import tempfile
import unittest
from unittest import mock
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np
import numpy.testing as npt

from focalhessian.config import recommended_parameters, ExperimentConfig, get_preset, load_config, save_config
from focalhessian.config import get_focalhessian_dir, get_runs_dir, get_version, PRESETS
from focalhessian.libs import ConfigurationError
from focalhessian.phase_domain import WrapPolicy


class TestRecommendedParameters(unittest.TestCase):
    def test_tabulated_rows(self):
        self.assertEqual(recommended_parameters(80, "full_rank"), (0.04, 0.10))
        self.assertEqual(recommended_parameters(30, "RankDeficient"), (0.10, 0.25))
        self.assertEqual(recommended_parameters(50, "full-rank"), (0.06, 0.15))
        self.assertEqual(recommended_parameters(80, "rank_deficient"), (0.07, 0.20))

    def test_interpolation(self):
        c_cov, alpha = recommended_parameters(40, "full_rank")
        self.assertTrue(0.06 < c_cov < 0.08)
        self.assertTrue(0.15 < alpha < 0.19)
        values = [recommended_parameters(n, "rank_deficient")[1] for n in range(30, 81)]
        self.assertTrue(np.all(np.diff(values) <= 0))

    def test_outside_table(self):
        out = io.StringIO()
        with redirect_stdout(out):
            self.assertEqual(recommended_parameters(10, "full_rank"), (0.08, 0.19))
            self.assertEqual(recommended_parameters(200, "full_rank"), (0.04, 0.10))
        self.assertIn("WARNING", out.getvalue())

        out = io.StringIO()
        with redirect_stdout(out):
            recommended_parameters(10, "full_rank", quiet=True)
        self.assertEqual(out.getvalue(), "")

    def test_invalid(self):
        with self.assertRaises(ConfigurationError):
            recommended_parameters(1, "full_rank")
        with self.assertRaises(ConfigurationError):
            recommended_parameters(30, "half_rank")


class TestExperimentConfig(unittest.TestCase):
    def test_round_trip(self):
        for name in PRESETS:
            config = get_preset(name, seed=3)
            self.assertEqual(ExperimentConfig.from_dict(config.to_dict()), config)

    def test_presets_validate(self):
        for name in PRESETS:
            landscape = get_preset(name, seed=0).validate()
            self.assertGreaterEqual(landscape.dimension, 2)

    def test_unknown_key(self):
        with self.assertRaises(ConfigurationError):
            ExperimentConfig.from_dict({"landscape": "ellipse", "colour": "blue"})
        with self.assertRaises(ConfigurationError):
            get_preset("fig99")

    def test_validation(self):
        with self.assertRaises(ConfigurationError):
            get_preset("ellipse80").validate()
        with self.assertRaises(ConfigurationError):
            get_preset("ellipse80", seed=0).with_overrides(budget=5).validate()
        with self.assertRaises(ConfigurationError):
            get_preset("ellipse80", seed=0).with_overrides(kernel="bfgs").validate()
        with self.assertRaises(ConfigurationError):
            get_preset("ellipse80", seed=0).with_overrides(mechanism="annealing").validate()
        with self.assertRaises(ConfigurationError):
            get_preset("sphere", seed=0).with_overrides(x0=[0.0, 0.0]).validate()
        with self.assertRaises(ConfigurationError):
            ExperimentConfig(seed=0, focal={"alpha": 0.1}).validate()

    def test_focal_defaults_from_table(self):
        config = ExperimentConfig(landscape="ellipse", landscape_params={"n": 50}, focal={"sigma0": 0.1}, seed=0)
        focal = config.build_focal(50)
        self.assertEqual((focal.c_cov, focal.alpha), (0.06, 0.15))
        self.assertEqual(focal.switchover.mode, "sigma_below")

        config = ExperimentConfig(landscape="rankdef", landscape_params={"n": 30, "rank": 6},
                                  focal={"sigma0": 0.1, "alpha": 0.3}, seed=0)
        focal = config.build_focal(30)
        self.assertEqual((focal.c_cov, focal.alpha), (0.10, 0.3))
        self.assertIsNone(config.with_overrides(mechanism="csa").build_focal(30))

    def test_covariance_scale_setting(self):
        self.assertTrue(get_preset("ellipse80", seed=0).build_focal(80).normalize_scale)
        self.assertFalse(get_preset("shg", seed=0).build_focal(80).normalize_scale)
        config = get_preset("ellipse80", seed=0).with_overrides(focal={"normalize_scale": False})
        self.assertFalse(config.build_focal(80).normalize_scale)
        self.assertFalse(config.build_focal(80).to_dict()["normalize_scale"])
        with self.assertRaises(ConfigurationError):
            get_preset("ellipse80", seed=0).with_overrides(focal={"normalize_scale": "yes"}).validate()

    def test_overrides(self):
        config = get_preset("ellipse80", seed=0)
        changed = config.with_overrides(landscape_params={"n": 10}, focal={"alpha": 0.2, "c_cov": None}, budget=None)
        self.assertEqual(changed.landscape_params["n"], 10)
        self.assertEqual(changed.landscape_params["xi"], 1e4)
        self.assertEqual(changed.focal["alpha"], 0.2)
        self.assertEqual(changed.focal["c_cov"], 0.04)
        self.assertEqual(changed.budget, config.budget)
        self.assertEqual(config.landscape_params["n"], 80)
        self.assertEqual(config.with_overrides(landscape="sphere").landscape_params, {})

    def test_initial_point_and_wrap(self):
        config = get_preset("shg", seed=0)
        landscape = config.validate()
        self.assertIsNone(config.initial_point(landscape))
        npt.assert_array_equal(config.with_overrides(x0="optimum").initial_point(landscape), np.zeros(80))
        with self.assertRaises(ConfigurationError):
            config.with_overrides(x0="somewhere").initial_point(landscape)
        self.assertEqual(config.build_wrap_policy(), "default")
        self.assertIsNone(config.with_overrides(wrap_policy="unbounded").build_wrap_policy())
        self.assertEqual(config.with_overrides(wrap_policy="reject").build_wrap_policy(), WrapPolicy("reject"))

    def test_save_and_load(self):
        config = get_preset("rankdef", seed=7)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "config.json"
            save_config(config, path)
            self.assertEqual(load_config(path), config)

            path.write_text("{not json")
            with self.assertRaises(ConfigurationError):
                load_config(path)

    def test_example_configs(self):
        examples = sorted((Path(__file__).parent.parent / "resources").glob("example_*.json"))
        self.assertGreater(len(examples), 0)
        for path in examples:
            config = load_config(path).with_overrides(seed=0)
            self.assertEqual(config.validate().dimension, 80, path.name)


class TestHomeDir(unittest.TestCase):
    def test_env_variable(self):
        with tempfile.TemporaryDirectory() as tmp:
            with mock.patch.dict(os.environ, {"FOCALHESSIAN_HOME_DIR": tmp}):
                self.assertEqual(get_focalhessian_dir(), Path(tmp))
                self.assertEqual(get_runs_dir(), Path(tmp) / "runs")

    def test_default(self):
        with mock.patch.dict(os.environ, {}, clear=False):
            os.environ.pop("FOCALHESSIAN_HOME_DIR", None)
            self.assertEqual(get_focalhessian_dir().name, ".focalhessian")

    def test_version(self):
        self.assertIsInstance(get_version(), str)


if __name__ == "__main__":
    unittest.main()
