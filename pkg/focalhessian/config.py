#
# config.py
# FocalHessian
#
# Experiment configuration: JSON documents, named presets, the home directory for run
# outputs, the installed version and the recommended FOCAL parameter table.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Carrega configuracoes de experimentos, presets e parametros recomendados."""

import os
import copy
import json
from dataclasses import dataclass, field, asdict, fields
from pathlib import Path
from typing import Optional, Union
import importlib.metadata

import numpy as np

from focalhessian.libs import ConfigurationError
from focalhessian.es_core import StrategyConfig, KERNEL_REGIMES
from focalhessian.focal import FocalConfig, Switchover, MECHANISMS, DEFAULT_EPS_TIK
from focalhessian.landscapes import get_landscape, LANDSCAPES
from focalhessian.phase_domain import WrapPolicy


TWO_PI = 2 * np.pi

DEFAULT_BUDGET = 30000

# (c_cov, alpha) per dimension
RECOMMENDED_PARAMETERS = {
    "rank_deficient": {30: (0.10, 0.25), 50: (0.08, 0.22), 80: (0.07, 0.20)},
    "full_rank": {30: (0.08, 0.19), 50: (0.06, 0.15), 80: (0.04, 0.10)},
}

RANK_CLASS_ALIASES = {
    "rank_deficient": "rank_deficient",
    "rankdeficient": "rank_deficient",
    "rank-deficient": "rank_deficient",
    "full_rank": "full_rank",
    "fullrank": "full_rank",
    "full-rank": "full_rank",
}


def get_focalhessian_dir():
    if "FOCALHESSIAN_HOME_DIR" in os.environ:
        home_dir = Path(os.environ["FOCALHESSIAN_HOME_DIR"])
    else:
        # in docker container finding home not properly working therefore map to /tmp
        home_path = Path("/tmp") if str(Path.home()) == "/" else Path.home()
        home_dir = home_path / ".focalhessian"
    return home_dir


def get_runs_dir():
    return get_focalhessian_dir() / "runs"


def get_version():
    try:
        return importlib.metadata.version("FocalHessian")
    except importlib.metadata.PackageNotFoundError:
        return "unknown"


def normalize_rank_class(rank_class):
    key = str(rank_class).strip().lower()
    if key not in RANK_CLASS_ALIASES:
        raise ConfigurationError(f"Unknown rank class '{rank_class}'. Valid classes: rank_deficient, full_rank")
    return RANK_CLASS_ALIASES[key]


def recommended_parameters(n, rank_class, quiet=False):
    """
    Recommended (c_cov, alpha) for dimension n. Exact at n in {30, 50, 80}, log-linear
    interpolation in n in between, nearest row outside [30, 80] (with a warning).
    """
    if n < 2:
        raise ConfigurationError(f"Dimension must be >= 2, got {n}")
    rows = RECOMMENDED_PARAMETERS[normalize_rank_class(rank_class)]
    dims = sorted(rows)
    if n in rows:
        return rows[n]
    if n < dims[0] or n > dims[-1]:
        nearest = dims[0] if n < dims[0] else dims[-1]
        if not quiet:
            print(f"WARNING: n={n} lies outside the tabulated range [{dims[0]}, {dims[-1]}]; using the n={nearest} row.")
        return rows[nearest]
    log_dims = np.log(dims)
    c_cov = float(np.interp(np.log(n), log_dims, [rows[d][0] for d in dims]))
    alpha = float(np.interp(np.log(n), log_dims, [rows[d][1] for d in dims]))
    return c_cov, alpha


def landscape_rank_class(name):
    return "rank_deficient" if name == "rankdef" else "full_rank"


@dataclass
class ExperimentConfig:
    landscape: str = "ellipse"
    landscape_params: dict = field(default_factory=dict)
    kernel: str = "def-cma"
    mechanism: str = "focal"
    strategy: dict = field(default_factory=dict)
    focal: dict = field(default_factory=dict)
    wrap_policy: Optional[Union[str, dict]] = "default"
    sigma_init: Optional[float] = None
    x0: Union[str, list] = "random"
    budget: int = DEFAULT_BUDGET
    seed: Optional[int] = None
    output_dir: Optional[str] = None
    n_jobs: int = 1
    previews: bool = False

    @classmethod
    def from_dict(cls, d):
        d = copy.deepcopy(d)
        known = {f.name for f in fields(cls)}
        if isinstance(d.get("landscape"), dict):
            section = d.pop("landscape")
            d["landscape"] = section.get("name", "ellipse")
            d["landscape_params"] = section.get("params", {})
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"Unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)

    def to_dict(self):
        d = asdict(self)
        d["landscape"] = {"name": d.pop("landscape"), "params": d.pop("landscape_params")}
        return d

    def with_overrides(self, **overrides):
        d = self.to_dict()
        for key, value in overrides.items():
            if value is None:
                continue
            if key in ("strategy", "focal", "landscape_params"):
                target = d["landscape"]["params"] if key == "landscape_params" else d[key]
                target.update({k: v for k, v in value.items() if v is not None})
            elif key == "landscape":
                if value != d["landscape"]["name"]:
                    d["landscape"] = {"name": value, "params": {}}
            else:
                d[key] = value
        return ExperimentConfig.from_dict(d)

    def build_landscape(self):
        return get_landscape(self.landscape, self.landscape_params)

    def regime(self):
        if self.kernel not in KERNEL_REGIMES:
            raise ConfigurationError(f"Unknown kernel '{self.kernel}'. Valid kernels: {', '.join(KERNEL_REGIMES)}")
        return KERNEL_REGIMES[self.kernel]

    def build_strategy(self, n):
        s = self.strategy
        return StrategyConfig.default(n, regime=self.regime(), lam=s.get("lam"), mu=s.get("mu"),
                                      weights=s.get("weights", "log"), c_cov=s.get("c_cov"),
                                      rank_one_share=s.get("rank_one_share"))

    def build_focal(self, n, quiet=True):
        if self.mechanism != "focal":
            return None
        f = self.focal
        c_cov, alpha = f.get("c_cov"), f.get("alpha")
        if c_cov is None or alpha is None:
            table_c_cov, table_alpha = recommended_parameters(n, landscape_rank_class(self.landscape), quiet=quiet)
            c_cov = table_c_cov if c_cov is None else c_cov
            alpha = table_alpha if alpha is None else alpha
        if "sigma0" not in f:
            raise ConfigurationError("FOCAL runs need focal.sigma0")
        normalize_scale = f.get("normalize_scale", True)
        if not isinstance(normalize_scale, bool):
            raise ConfigurationError(f"focal.normalize_scale must be true or false, got {normalize_scale!r}")
        return FocalConfig(sigma0=float(f["sigma0"]), alpha=float(alpha), c_cov=float(c_cov),
                           eps_tik=float(f.get("eps_tik", DEFAULT_EPS_TIK)),
                           switchover=Switchover.from_value(f.get("switchover")),
                           normalize_scale=normalize_scale)

    def build_wrap_policy(self):
        if self.wrap_policy == "default":
            return "default"
        if self.wrap_policy in (None, "unbounded"):
            return None
        return WrapPolicy.from_value(self.wrap_policy)

    def initial_point(self, landscape):
        if isinstance(self.x0, str):
            if self.x0 == "random":
                return None
            if self.x0 == "optimum":
                if landscape.optimum is None:
                    raise ConfigurationError(f"Landscape '{landscape.name}' has no known optimum")
                return np.array(landscape.optimum, dtype=float)
            raise ConfigurationError(f"Unknown x0 '{self.x0}'. Use 'random', 'optimum' or a list of values")
        return np.asarray(self.x0, dtype=float)

    def validate(self):
        """Checks names, seed and budget. Returns the built landscape for convenience."""
        if self.seed is None or isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise ConfigurationError(f"A fixed integer seed is required, got: {self.seed!r}")
        if self.mechanism not in MECHANISMS:
            raise ConfigurationError(f"Unknown mechanism '{self.mechanism}'. Valid mechanisms: {', '.join(MECHANISMS)}")
        if self.landscape not in LANDSCAPES:
            raise ConfigurationError(f"Unknown landscape '{self.landscape}'. Valid landscapes: {', '.join(LANDSCAPES)}")
        if self.n_jobs == 0:
            raise ConfigurationError("n_jobs must be nonzero")
        landscape = self.build_landscape()
        strategy = self.build_strategy(landscape.dimension)
        if self.budget < strategy.lam:
            raise ConfigurationError(f"Budget ({self.budget}) must be at least lambda ({strategy.lam})")
        self.build_focal(landscape.dimension)
        self.build_wrap_policy()
        x0 = self.initial_point(landscape)
        if x0 is not None and x0.shape != (landscape.dimension,):
            raise ConfigurationError(f"x0 has {x0.shape[0]} values, landscape has dimension {landscape.dimension}")
        if self.sigma_init is not None and not self.sigma_init > 0:
            raise ConfigurationError(f"sigma_init must be positive, got {self.sigma_init}")
        return landscape


def load_config(path):
    with open(path) as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Config file {path} is not valid JSON: {e}") from e
    return ExperimentConfig.from_dict(d)


def save_config(config, path):
    with open(path, "w") as f:
        json.dump(config.to_dict(), f, indent=4, sort_keys=True)
        f.write("\n")


PRESETS = {
    "ellipse80": {
        "landscape": {"name": "ellipse", "params": {"n": 80, "xi": 1e4, "noise_std": 0.025}},
        "kernel": "def-cma",
        "mechanism": "focal",
        "focal": {"sigma0": 0.075, "c_cov": 0.04, "alpha": 0.10, "switchover": {"mode": "immediate", "value": None}},
        "budget": 30000,
    },
    "ellipse80-csa": {
        "landscape": {"name": "ellipse", "params": {"n": 80, "xi": 1e4, "noise_std": 0.025}},
        "kernel": "def-cma",
        "mechanism": "csa",
        "budget": 30000,
    },
    "rankdef": {
        "landscape": {"name": "rankdef", "params": {"n": 80, "rank": 6, "seed": 0, "noise_std": 0.01}},
        "kernel": "def-cma",
        "mechanism": "focal",
        "strategy": {"lam": 20, "mu": 10},
        "focal": {"sigma0": 0.075 * TWO_PI, "c_cov": 0.07, "alpha": 0.25, "switchover": {"mode": "immediate", "value": None}},
        "budget": 30000,
    },
    "rankdef-iso": {
        "landscape": {"name": "rankdef", "params": {"n": 80, "rank": 6, "seed": 0, "noise_std": 0.01}},
        "kernel": "iso-cma",
        "mechanism": "focal",
        "strategy": {"lam": 20, "mu": 10},
        "focal": {"sigma0": 0.075 * TWO_PI, "c_cov": 0.07, "alpha": 0.25, "switchover": {"mode": "immediate", "value": None}},
        "budget": 30000,
    },
    "shg": {
        "landscape": {"name": "shg", "params": {"n": 80}},
        "kernel": "def-cma",
        "mechanism": "focal",
        "strategy": {"lam": 30, "mu": 15},
        "focal": {"sigma0": 0.1 * TWO_PI, "c_cov": 0.04, "alpha": 0.1, "switchover": {"mode": "immediate", "value": None},
                  "normalize_scale": False},
        "budget": 30000,
    },
    "sphere": {
        "landscape": {"name": "sphere", "params": {"n": 10}},
        "kernel": "def-cma",
        "mechanism": "focal",
        "focal": {"sigma0": 0.01, "c_cov": 0.01, "alpha": 0.25},
        "budget": 20000,
    },
}


def get_preset(name, seed=None):
    if name not in PRESETS:
        raise ConfigurationError(f"Unknown preset '{name}'. Valid presets: {', '.join(PRESETS)}")
    d = copy.deepcopy(PRESETS[name])
    d["seed"] = seed
    return ExperimentConfig.from_dict(d)
