#
# focal.py
# FocalHessian
#
# The forced step-size rule sigma = sigma0 / lambda_min^alpha, practical step-size diagnostics
# and bounds, the climbing/learning switchover, the search loop and the Tikhonov
# regularize-then-invert step that turns the learned covariance into a Hessian estimate.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Motor FOCAL: passo forcado, diagnosticos de passo pratico e estimativa da Hessiana."""

from dataclasses import dataclass, field, fields, asdict
from typing import Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from focalhessian.libs import ConfigurationError, EvaluationError, NumericalError, SearchAborted, derived_generator
from focalhessian.es_core import SearchState, sample_generation, rank_and_recombine, update_path
from focalhessian.es_core import update_covariance, refresh_eigen, csa_update_sigma, normalize_determinant
from focalhessian.phase_domain import torus_distance, is_near_singular


SWITCHOVER_MODES = ("immediate", "sigma_below", "generation_at")

MECHANISMS = ("csa", "focal")

DEFAULT_EPS_TIK = 1e-7

C_COV_SOFT_RANGE = (0.01, 0.10)

PHASE_CLIMB = "climb"
PHASE_FOCAL = "focal"


@dataclass(frozen=True)
class Switchover:
    mode: str = "sigma_below"
    value: Optional[float] = 1e-4

    def __post_init__(self):
        if self.mode not in SWITCHOVER_MODES:
            raise ConfigurationError(f"Unknown switchover mode '{self.mode}'. Valid modes: {', '.join(SWITCHOVER_MODES)}")
        if self.mode != "immediate" and (self.value is None or not self.value > 0):
            raise ConfigurationError(f"Switchover '{self.mode}' needs a positive value, got {self.value}")

    @classmethod
    def from_value(cls, value):
        if value is None:
            return cls()
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            return cls(mode=value, value=None) if value == "immediate" else cls(mode=value)
        return cls(**value)

    def reached(self, state):
        if self.mode == "immediate":
            return True
        if self.mode == "sigma_below":
            return state.sigma < self.value
        return state.generation >= self.value

    def to_dict(self):
        return {"mode": self.mode, "value": self.value}


@dataclass(frozen=True)
class FocalConfig:
    sigma0: float
    alpha: float
    c_cov: float
    eps_tik: float = DEFAULT_EPS_TIK
    switchover: Switchover = field(default_factory=Switchover)
    normalize_scale: bool = True

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ConfigurationError(f"sigma0 must be positive, got {self.sigma0}")
        if not 0 < self.alpha <= 0.5:
            raise ConfigurationError(f"alpha must lie in (0, 0.5], got {self.alpha}")
        if not 0 < self.c_cov < 1:
            raise ConfigurationError(f"c_cov must lie in (0, 1), got {self.c_cov}")
        if not self.eps_tik > 0:
            raise ConfigurationError(f"eps_tik must be positive, got {self.eps_tik}")

    def soft_warnings(self):
        lo, hi = C_COV_SOFT_RANGE
        if not lo <= self.c_cov <= hi:
            return [f"c_cov={self.c_cov} lies outside the recommended range [{lo}, {hi}]"]
        return []

    def to_dict(self):
        return {"sigma0": self.sigma0, "alpha": self.alpha, "c_cov": self.c_cov,
                "eps_tik": self.eps_tik, "switchover": self.switchover.to_dict(),
                "normalize_scale": self.normalize_scale}


@dataclass
class PracticalStepRecord:
    generation: int
    evaluations: int
    phase: str
    best_fitness: float
    parent_fitness: float
    sigma: float
    trace_c: float
    cond_c: float
    lambda_min: float
    lambda_max: float
    delta_p: float
    delta_p_unit: float
    lower_bound: float
    upper_bound: float
    empirical_step: float
    rejections: int = 0


TRACE_COLUMNS = [f.name for f in fields(PracticalStepRecord)]


@dataclass
class RunTrace:
    header: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    def append(self, record):
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def focal_records(self):
        return [r for r in self.records if r.phase == PHASE_FOCAL]

    def to_frame(self):
        return pd.DataFrame([asdict(r) for r in self.records], columns=TRACE_COLUMNS)

    @classmethod
    def from_frame(cls, df, header=None):
        records = [PracticalStepRecord(**{c: row[c] for c in TRACE_COLUMNS}) for row in df.to_dict(orient="records")]
        for r in records:
            r.generation = int(r.generation)
            r.evaluations = int(r.evaluations)
            r.rejections = int(r.rejections)
        return cls(header={} if header is None else dict(header), records=records)


@dataclass
class HessianEstimate:
    H: np.ndarray
    spectrum: np.ndarray
    eigenvectors: np.ndarray
    cov_spectrum: np.ndarray
    regularized_cov_spectrum: np.ndarray
    eps_tik: float
    evaluations: int = 0
    covariance: Optional[np.ndarray] = None
    converged_climb: bool = True
    degenerate_covariance: bool = False

    @property
    def dimension(self):
        return self.H.shape[0]

    def summary(self):
        return {
            "dimension": self.dimension,
            "eps_tik": self.eps_tik,
            "evaluations": self.evaluations,
            "converged_climb": self.converged_climb,
            "degenerate_covariance": self.degenerate_covariance,
            "spectrum_max": float(self.spectrum[0]),
            "spectrum_min": float(self.spectrum[-1]),
        }


def focal_sigma(lambda_min, cfg):
    if not lambda_min > 0:
        raise ValueError(f"lambda_min must be positive, got {lambda_min}")
    return float(cfg.sigma0 * lambda_min ** (-cfg.alpha))


def practical_step(sigma, cov, mu_eff=1.0):
    """RMS parent-to-offspring displacement (sigma / sqrt(mu_eff)) * sqrt(tr C)."""
    return float(sigma / np.sqrt(mu_eff) * np.sqrt(cov.trace))


def practical_step_bounds(sigma0, alpha, cov, n):
    lam_min, lam_max = cov.lambda_min, cov.lambda_max
    lower = sigma0 * np.sqrt(n) * lam_min ** (0.5 - alpha)
    upper = sigma0 * np.sqrt(n) * np.sqrt(lam_max) * lam_min ** (-alpha)
    return float(lower), float(upper)


def step_bounds(sigma, cov, n):
    """Extremes of sigma * sqrt(tr C) for a given spectrum; equal to practical_step_bounds under the forced rule."""
    return float(sigma * np.sqrt(n * cov.lambda_min)), float(sigma * np.sqrt(n * cov.lambda_max))


def regularize_and_invert(cov, eps_tik=DEFAULT_EPS_TIK, evaluations=0, converged_climb=True, degenerate_covariance=False):
    """
    Tikhonov filter h = lambda / (lambda^2 + eps) applied to the covariance spectrum; the
    eigenvectors are shared with the covariance. Returned spectrum is nonincreasing.
    """
    if cov.dirty:
        cov = refresh_eigen(cov)
    lam = np.asarray(cov.eigenvalues, dtype=float)
    h = lam / (lam ** 2 + eps_tik)
    order = np.argsort(-h, kind="stable")
    h = h[order]
    lam = lam[order]
    R = cov.R[:, order]

    H = (R * h) @ R.T
    H = (H + H.T) / 2.0
    return HessianEstimate(H=H, spectrum=h, eigenvectors=R, cov_spectrum=lam,
                           regularized_cov_spectrum=(lam ** 2 + eps_tik) / lam, eps_tik=eps_tik,
                           evaluations=int(evaluations), covariance=cov.C.copy(), converged_climb=converged_climb,
                           degenerate_covariance=degenerate_covariance)


def _step_length(new_parent, old_parent, wrap_policy):
    if wrap_policy is not None and wrap_policy.mode != "unbounded":
        return torus_distance(new_parent, old_parent, wrap_policy.period)
    return float(np.linalg.norm(new_parent - old_parent))


def run_search(landscape, strategy, budget, seed, focal=None, mechanism="focal", x0=None, sigma_init=None,
               wrap_policy="default", n_jobs=1, quiet=False, verbose=False, header=None):
    """
    Runs the (mu_W, lambda) loop until the next generation would exceed the evaluation budget.

    landscape: Landscape
    strategy: StrategyConfig (its c_cov is replaced by focal.c_cov for FOCAL runs)
    budget: maximum number of objective evaluations
    seed: integer seed (mandatory)
    focal: FocalConfig, required when mechanism == "focal"
    mechanism: "focal" (CSA climb, then forced step-size) or "csa" (CSA throughout)
    x0: start point; drawn uniformly from the landscape domain if None
    sigma_init: initial step-size; 0.3 * domain width if None
    wrap_policy: WrapPolicy, None for unbounded, or "default" for the landscape's own policy

    With focal.normalize_scale, C (and p_c) is rescaled to det C = 1 after every forced-step
    generation. A numerically singular covariance update ends the run early; the estimate uses
    the last resolved C and is flagged degenerate_covariance.

    returns: (HessianEstimate, RunTrace)
    """
    if mechanism not in MECHANISMS:
        raise ConfigurationError(f"Unknown step-size mechanism '{mechanism}'. Valid mechanisms: {', '.join(MECHANISMS)}")
    if mechanism == "focal" and focal is None:
        raise ConfigurationError("A FocalConfig is required for mechanism 'focal'")
    if budget < strategy.lam:
        raise ConfigurationError(f"Budget ({budget}) must be at least lambda ({strategy.lam})")

    n = landscape.dimension
    if wrap_policy == "default":
        wrap_policy = landscape.wrap_policy
    if x0 is None:
        x0 = landscape.initial_point(derived_generator(seed, 2))
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (n,):
        raise ConfigurationError(f"Start point has shape {x0.shape}, landscape '{landscape.name}' has dimension {n}")
    if sigma_init is None:
        lower, upper = landscape.domain
        sigma_init = 0.3 * (upper - lower)

    if mechanism == "focal":
        strategy = strategy.with_c_cov(focal.c_cov)
        if not quiet:
            for w in focal.soft_warnings():
                print(f"WARNING: {w}")
    eps_tik = focal.eps_tik if focal is not None else DEFAULT_EPS_TIK

    state = SearchState.initial(x0, sigma_init, seed, regime=strategy.regime)
    trace = RunTrace(header={} if header is None else dict(header))
    trace.header.update({
        "mechanism": mechanism,
        "landscape": landscape.name,
        "landscape_params": landscape.params,
        "strategy": strategy.to_dict(),
        "focal": None if focal is None else focal.to_dict(),
        "wrap_policy": None if wrap_policy is None else wrap_policy.to_dict(),
        "budget": int(budget),
        "seed": int(seed),
        "sigma_init": float(sigma_init),
    })

    phase = PHASE_CLIMB
    switchover_generation = None
    degenerate_generation = None
    if mechanism == "focal" and focal.switchover.reached(state):
        phase = PHASE_FOCAL
        switchover_generation = 0
        state.sigma = focal_sigma(state.cov.lambda_min, focal)

    with tqdm(total=budget // strategy.lam, disable=quiet, desc=f"{mechanism} on {landscape.name}") as pbar:
        while state.evaluations + strategy.lam <= budget:
            old_parent = state.parent
            try:
                offspring = sample_generation(state, strategy, landscape, wrap_policy, n_jobs=n_jobs, quiet=quiet)
                parent, selected, z_w = rank_and_recombine(offspring, strategy)
                path = update_path(state.path, z_w, state, strategy)
                sigma_csa, sigma_path = csa_update_sigma(state, z_w, strategy)
                selected_z = np.stack([offspring[i].z for i in selected])
                cov = refresh_eigen(update_covariance(state.cov, path, selected_z, strategy))
            except (EvaluationError, NumericalError) as e:
                raise SearchAborted(f"Search aborted in generation {state.generation}: {e}", trace=trace, cause=e) from e

            if is_near_singular(cov.eigenvalues):
                degenerate_generation = state.generation + 1
                if not quiet:
                    print(f"WARNING: covariance update in generation {degenerate_generation} is numerically singular (cond C = {cov.cond:.3e}); stopping with the last resolved covariance.")
                break

            state.parent = parent
            state.path = path
            state.cov = cov
            state.generation += 1

            if phase == PHASE_CLIMB:
                state.sigma = sigma_csa
                state.sigma_path = sigma_path
                if mechanism == "focal" and focal.switchover.reached(state):
                    phase = PHASE_FOCAL
                    switchover_generation = state.generation
                    if verbose:
                        print(f"Switching to forced step-size at generation {state.generation} (sigma={state.sigma:.3e}, evaluations={state.evaluations})")
            if phase == PHASE_FOCAL:
                if focal.normalize_scale:
                    state.cov, state.path, _ = normalize_determinant(state.cov, state.path)
                    cov = state.cov
                state.sigma = focal_sigma(cov.lambda_min, focal)

            if not state.is_finite():
                raise SearchAborted(f"Search state became non-finite in generation {state.generation}", trace=trace)

            if phase == PHASE_FOCAL:
                lower, upper = practical_step_bounds(focal.sigma0, focal.alpha, cov, n)
            else:
                lower, upper = step_bounds(state.sigma, cov, n)
            best = offspring[selected[0]]
            trace.append(PracticalStepRecord(
                generation=state.generation,
                evaluations=state.evaluations,
                phase=phase,
                best_fitness=best.value,
                parent_fitness=landscape.noiseless(parent),
                sigma=state.sigma,
                trace_c=cov.trace,
                cond_c=cov.cond,
                lambda_min=cov.lambda_min,
                lambda_max=cov.lambda_max,
                delta_p=practical_step(state.sigma, cov, strategy.mu_eff),
                delta_p_unit=practical_step(state.sigma, cov, 1.0),
                lower_bound=lower,
                upper_bound=upper,
                empirical_step=_step_length(parent, old_parent, wrap_policy),
                rejections=state.last_rejections,
            ))
            pbar.update(1)

    converged = mechanism == "csa" or phase == PHASE_FOCAL
    if not converged and not quiet:
        print(f"WARNING: search ended before the switchover criterion was met ({focal.switchover.mode}={focal.switchover.value}); the Hessian estimate is unconverged.")
    trace.header["switchover_generation"] = switchover_generation
    trace.header["converged_climb"] = converged
    trace.header["degenerate_covariance"] = degenerate_generation is not None
    trace.header["degenerate_generation"] = degenerate_generation
    trace.header["generations"] = state.generation
    trace.header["evaluations"] = state.evaluations

    estimate = regularize_and_invert(state.cov, eps_tik, evaluations=state.evaluations, converged_climb=converged,
                                     degenerate_covariance=degenerate_generation is not None)
    return estimate, trace


def run_focal(landscape, strategy, focal, budget, seed, **kwargs):
    return run_search(landscape, strategy, budget, seed, focal=focal, mechanism="focal", **kwargs)


def run_baseline(landscape, strategy, budget, seed, **kwargs):
    return run_search(landscape, strategy, budget, seed, focal=None, mechanism="csa", **kwargs)
