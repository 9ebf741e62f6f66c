#
# es_core.py
# FocalHessian
#
# Kernels of the non-elitist (mu_W, lambda) derandomized evolution strategy in the isotropic,
# diagonal and full covariance regimes: sampling, ranking, weighted recombination, evolution
# paths, covariance updates and eigendecomposition maintenance.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Nucleo da estrategia evolutiva (mu_W, lambda) com adaptacao de covariancia."""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from joblib import Parallel, delayed

from focalhessian.libs import ConfigurationError, EvaluationError, NumericalError, matrix_diagnostics
from focalhessian.libs import make_seed_sequence, spawn_generators
from focalhessian.phase_domain import wrap, in_domain, posterior_mutation, is_near_singular


REGIMES = ("isotropic", "diagonal", "full")

# kernel names used by the harness
KERNEL_REGIMES = {
    "def-cma": "full",
    "sep-cma": "diagonal",
    "iso-cma": "isotropic",
}

EIGEN_FLOOR = 1e-300

# resampling attempts per offspring before reject mode gives up and wraps
REJECT_ATTEMPTS_PER_OFFSPRING = 100


@dataclass
class CovarianceModel:
    C: np.ndarray
    R: np.ndarray
    eigenvalues: np.ndarray
    regime: str = "full"
    dirty: bool = False

    @classmethod
    def identity(cls, n, regime="full", scale=1.0):
        if regime not in REGIMES:
            raise ConfigurationError(f"Unknown covariance regime '{regime}'. Valid regimes: {', '.join(REGIMES)}")
        return cls(C=scale * np.eye(n), R=np.eye(n), eigenvalues=np.full(n, float(scale)), regime=regime, dirty=False)

    @classmethod
    def from_matrix(cls, C, regime="full"):
        C = np.array(C, dtype=float)
        if regime == "diagonal":
            C = np.diag(np.diag(C))
        n = C.shape[0]
        return refresh_eigen(cls(C=C, R=np.eye(n), eigenvalues=np.ones(n), regime=regime, dirty=True))

    @property
    def dimension(self):
        return self.C.shape[0]

    @property
    def lambda_min(self):
        return float(self.eigenvalues[-1])

    @property
    def lambda_max(self):
        return float(self.eigenvalues[0])

    @property
    def trace(self):
        return float(np.trace(self.C))

    @property
    def cond(self):
        return self.lambda_max / self.lambda_min

    @property
    def sqrt_transform(self):
        """R * Lambda^{1/2}; maps standard-normal z onto the unscaled mutation y."""
        return self.R * np.sqrt(self.eigenvalues)[np.newaxis, :]


@dataclass
class StrategyConfig:
    lam: int
    mu: int
    weights: np.ndarray
    c_cov: float
    c_c: float
    c_sigma: float
    d_sigma: float
    regime: str = "full"
    rank_one_share: Optional[float] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.lam < 2:
            raise ConfigurationError(f"Offspring count lambda must be >= 2, got {self.lam}")
        if not 1 <= self.mu <= self.lam:
            raise ConfigurationError(f"Parent count mu must satisfy 1 <= mu <= lambda ({self.lam}), got {self.mu}")
        if self.weights.shape != (self.mu,):
            raise ConfigurationError(f"Expected {self.mu} recombination weights, got {self.weights.shape}")
        if np.any(self.weights <= 0) or np.any(np.diff(self.weights) > 0):
            raise ConfigurationError("Recombination weights must be positive and nonincreasing")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ConfigurationError(f"Recombination weights must sum to 1, got {self.weights.sum()!r}")
        if not 0 <= self.c_cov <= 1:
            raise ConfigurationError(f"c_cov must lie in [0, 1], got {self.c_cov}")
        if not 0 < self.c_c <= 1:
            raise ConfigurationError(f"c_c must lie in (0, 1], got {self.c_c}")
        if not 0 < self.c_sigma <= 1:
            raise ConfigurationError(f"c_sigma must lie in (0, 1], got {self.c_sigma}")
        if self.regime not in REGIMES:
            raise ConfigurationError(f"Unknown covariance regime '{self.regime}'. Valid regimes: {', '.join(REGIMES)}")
        if self.rank_one_share is not None and not 0 <= self.rank_one_share <= 1:
            raise ConfigurationError(f"rank_one_share must lie in [0, 1], got {self.rank_one_share}")

    @property
    def mu_eff(self):
        return float(1.0 / np.sum(self.weights ** 2))

    @property
    def rank_one(self):
        return 1.0 / self.mu_eff if self.rank_one_share is None else float(self.rank_one_share)

    @classmethod
    def default(cls, n, regime="full", lam=None, mu=None, weights="log", c_cov=None, rank_one_share=None):
        """
        Standard CMA-ES constants for dimension n. If c_cov is None the classic learning
        rate (which scales like 1/n^2) is used; the separable regime gets it multiplied by (n+2)/3.
        """
        if lam is None:
            lam = 4 + int(np.floor(3 * np.log(n)))
        if mu is None:
            mu = lam // 2
        w = recombination_weights(mu, weights)
        mu_eff = 1.0 / np.sum(w ** 2)

        c_c = (4 + mu_eff / n) / (n + 4 + 2 * mu_eff / n)
        c_sigma = (mu_eff + 2) / (n + mu_eff + 5)
        d_sigma = 1 + 2 * max(0.0, np.sqrt((mu_eff - 1) / (n + 1)) - 1) + c_sigma

        if c_cov is None:
            c_cov = default_c_cov(n, mu_eff)
            if regime == "diagonal":
                c_cov = min(1.0, c_cov * (n + 2) / 3.0)

        return cls(lam=int(lam), mu=int(mu), weights=w, c_cov=float(c_cov), c_c=float(c_c),
                   c_sigma=float(c_sigma), d_sigma=float(d_sigma), regime=regime,
                   rank_one_share=rank_one_share)

    def with_c_cov(self, c_cov):
        return replace(self, c_cov=float(c_cov))

    def to_dict(self):
        return {
            "lam": self.lam,
            "mu": self.mu,
            "weights": self.weights.tolist(),
            "mu_eff": self.mu_eff,
            "c_cov": self.c_cov,
            "c_c": self.c_c,
            "c_sigma": self.c_sigma,
            "d_sigma": self.d_sigma,
            "regime": self.regime,
            "rank_one_share": self.rank_one,
        }


@dataclass
class SearchState:
    parent: np.ndarray
    sigma: float
    cov: CovarianceModel
    path: np.ndarray
    sigma_path: np.ndarray
    rng: np.random.Generator
    noise_seeds: np.random.SeedSequence
    generation: int = 0
    evaluations: int = 0
    last_rejections: int = 0

    @classmethod
    def initial(cls, x0, sigma, seed, regime="full"):
        x0 = np.array(x0, dtype=float)
        if not sigma > 0:
            raise ConfigurationError(f"Initial step-size must be positive, got {sigma}")
        n = x0.shape[0]
        mutation_seeds, noise_seeds = make_seed_sequence(seed).spawn(2)
        return cls(parent=x0, sigma=float(sigma), cov=CovarianceModel.identity(n, regime),
                   path=np.zeros(n), sigma_path=np.zeros(n),
                   rng=np.random.default_rng(mutation_seeds), noise_seeds=noise_seeds)

    @property
    def dimension(self):
        return self.parent.shape[0]

    def is_finite(self):
        return bool(np.isfinite(self.sigma) and self.sigma > 0
                    and np.all(np.isfinite(self.parent))
                    and np.all(np.isfinite(self.path))
                    and np.all(np.isfinite(self.cov.C)))


@dataclass
class Offspring:
    z: np.ndarray
    y: np.ndarray
    x: np.ndarray
    index: int
    fitness: float = np.nan
    value: float = np.nan
    rank: Optional[int] = None


def recombination_weights(mu, kind="log"):
    if kind == "log":
        w = np.log(mu + 1) - np.log(np.arange(1, mu + 1))
    elif kind == "equal":
        w = np.ones(mu)
    else:
        raise ConfigurationError(f"Unknown weight scheme '{kind}'. Valid schemes: log, equal")
    return w / w.sum()


def default_c_cov(n, mu_eff):
    mu_cov = mu_eff
    return float((1.0 / mu_cov) * 2.0 / (n + np.sqrt(2)) ** 2
                 + (1 - 1.0 / mu_cov) * min(1.0, (2 * mu_cov - 1) / ((n + 2) ** 2 + mu_cov)))


def expected_norm(n):
    """E||N(0, I)|| approximation."""
    return float(np.sqrt(n) * (1 - 1.0 / (4 * n) + 1.0 / (21 * n ** 2)))


def mutate(parent, sigma, cov, z):
    """
    y = R Lambda^{1/2} z and x = parent + sigma * y.

    returns: (y, x)
    """
    y = cov.sqrt_transform @ np.asarray(z, dtype=float)
    return y, np.asarray(parent, dtype=float) + sigma * y


def _draw(state):
    z = state.rng.standard_normal(state.dimension)
    y, x = mutate(state.parent, state.sigma, state.cov, z)
    return z, y, x


def _wrapped_offspring(state, x, index, period, quiet=True):
    x_wrapped = wrap(x, period)
    z = posterior_mutation(x_wrapped, state.parent, state.sigma, state.cov, quiet=quiet)
    y = state.cov.sqrt_transform @ z
    return Offspring(z=z, y=y, x=x_wrapped, index=index)


def _evaluate(landscape, x, rng):
    value = landscape.evaluate(x, rng)
    return value, landscape.to_minimization(value)


def sample_generation(state, config, objective, wrap_policy=None, n_jobs=1, quiet=True):
    """
    Draws and evaluates lambda offspring around the current parent.

    state: SearchState with a fresh eigendecomposition
    config: StrategyConfig
    objective: Landscape
    wrap_policy: WrapPolicy or None (unbounded)
    n_jobs: number of threads used for the objective evaluations

    returns: list of Offspring in index order
    """
    n = state.dimension
    if objective.dimension != n:
        raise ConfigurationError(f"Landscape dimension {objective.dimension} does not match search dimension {n}")
    if state.cov.dirty:
        state.cov = refresh_eigen(state.cov)

    A = state.cov.sqrt_transform
    mode = "unbounded" if wrap_policy is None else wrap_policy.mode
    offspring = []
    rejections = 0

    if mode == "reject":
        max_attempts = REJECT_ATTEMPTS_PER_OFFSPRING * config.lam
        attempts = 0
        while len(offspring) < config.lam and attempts < max_attempts:
            z, y, x = _draw(state)
            attempts += 1
            if in_domain(x, wrap_policy.period):
                offspring.append(Offspring(z=z, y=y, x=x, index=len(offspring)))
            else:
                rejections += 1
        if len(offspring) < config.lam:
            if not quiet:
                print(f"WARNING: reject mode hit the resampling cap ({max_attempts} attempts) in generation {state.generation}; wrapping the remaining {config.lam - len(offspring)} offspring.")
            while len(offspring) < config.lam:
                _, _, x = _draw(state)
                offspring.append(_wrapped_offspring(state, x, len(offspring), wrap_policy.period))
    else:
        Z = state.rng.standard_normal((config.lam, n))
        Y = Z @ A.T
        X = state.parent + state.sigma * Y
        wrapped = 0
        for i in range(config.lam):
            if mode == "wrap" and not in_domain(X[i], wrap_policy.period):
                offspring.append(_wrapped_offspring(state, X[i], i, wrap_policy.period))
                wrapped += 1
            else:
                offspring.append(Offspring(z=Z[i], y=Y[i], x=X[i], index=i))
        if wrapped and not quiet and is_near_singular(state.cov.eigenvalues):
            print(f"WARNING: posterior mutation of {wrapped} wrapped offspring through a near-singular covariance (smallest eigenvalue used: {state.cov.lambda_min:.3e})")

    rngs = spawn_generators(state.noise_seeds, config.lam)
    if n_jobs == 1:
        results = [_evaluate(objective, o.x, r) for o, r in zip(offspring, rngs)]
    else:
        results = Parallel(n_jobs=n_jobs, prefer="threads")(delayed(_evaluate)(objective, o.x, r) for o, r in zip(offspring, rngs))

    for o, (value, fitness) in zip(offspring, results):
        if not np.isfinite(fitness):
            raise EvaluationError(o.index, value)
        o.value = float(value)
        o.fitness = float(fitness)

    state.evaluations += config.lam
    state.last_rejections = rejections
    return offspring


def rank_and_recombine(offspring, config):
    """
    Ranks offspring by fitness (minimization, ties to the lower index) and recombines the best mu.

    returns: (new parent, selected indices in rank order, weighted mean of the selected z)
    """
    if len(offspring) == 0:
        raise ValueError("Cannot recombine an empty offspring list.")
    if len(offspring) < config.mu:
        raise ValueError(f"Need at least mu={config.mu} offspring, got {len(offspring)}")

    fitness = np.array([o.fitness for o in offspring])
    if not np.all(np.isfinite(fitness)):
        raise ValueError("All offspring fitness values must be finite before ranking.")
    indices = np.array([o.index for o in offspring])
    # lexsort: last key is primary
    order = np.lexsort((indices, fitness))
    for rank, i in enumerate(order):
        offspring[i].rank = rank

    selected = order[:config.mu]
    X = np.stack([offspring[i].x for i in selected])
    Z = np.stack([offspring[i].z for i in selected])
    parent = config.weights @ X
    z_w = config.weights @ Z
    return parent, selected, z_w


def update_path(p_c, z_w, state, config):
    return (1 - config.c_c) * p_c + np.sqrt(config.c_c * (2 - config.c_c) * config.mu_eff) * (state.cov.sqrt_transform @ z_w)


def update_covariance(cov, p_c, selected_z, config):
    """
    Rank-one plus rank-mu update. selected_z holds the mu selected z vectors in rank order;
    the matching y vectors are rebuilt with the pre-update decomposition. The stall guard
    of the rank-one term is disabled (always 1).
    """
    if cov.regime == "isotropic" or config.c_cov == 0:
        return replace(cov, C=cov.C.copy())

    Y = np.atleast_2d(selected_z) @ cov.sqrt_transform.T
    w = config.weights[:Y.shape[0]]
    c = config.c_cov
    s1 = config.rank_one

    if cov.regime == "diagonal":
        d = (1 - c) * np.diag(cov.C) + c * (s1 * p_c ** 2 + (1 - s1) * (w @ Y ** 2))
        C = np.diag(d)
    else:
        rank_mu = (Y.T * w) @ Y
        C = (1 - c) * cov.C + c * (s1 * np.outer(p_c, p_c) + (1 - s1) * rank_mu)
        C = (C + C.T) / 2.0
    return replace(cov, C=C, dirty=True)


def refresh_eigen(cov):
    """
    Recomputes R and Lambda (nonincreasing). Eigenvalues are floored at 1e-300 and C is
    reassembled from the floored spectrum when the floor was hit.
    """
    C = cov.C
    n = C.shape[0]
    if not np.all(np.isfinite(C)):
        raise NumericalError(f"Covariance matrix is not finite ({matrix_diagnostics(C)})")

    if cov.regime == "isotropic":
        c = float(C[0, 0])
        eigenvalues = np.full(n, max(c, EIGEN_FLOOR))
        return replace(cov, C=eigenvalues[0] * np.eye(n), R=np.eye(n), eigenvalues=eigenvalues, dirty=False)

    if cov.regime == "diagonal":
        d = np.diag(C)
        order = np.argsort(-d, kind="stable")
        eigenvalues = d[order]
        R = np.eye(n)[:, order]
    else:
        try:
            values, vectors = np.linalg.eigh(C)
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"Eigendecomposition did not converge ({matrix_diagnostics(C)})") from e
        eigenvalues = values[::-1]
        R = vectors[:, ::-1]

    floored = eigenvalues < EIGEN_FLOOR
    if np.any(floored):
        eigenvalues = np.where(floored, EIGEN_FLOOR, eigenvalues)
        if cov.regime == "diagonal":
            C = np.diag(R @ eigenvalues)
        else:
            C = (R * eigenvalues) @ R.T
            C = (C + C.T) / 2.0
    return replace(cov, C=C, R=R, eigenvalues=np.array(eigenvalues), dirty=False)


def normalize_determinant(cov, p_c=None):
    """
    Rescales C to a unit geometric-mean eigenvalue (det C = 1), keeping R. The rank-one path
    lives in the units of C^{1/2} and is rescaled with the square root of the same factor.

    returns: (cov', p_c', factor)
    """
    if cov.dirty:
        cov = refresh_eigen(cov)
    factor = float(np.exp(-np.mean(np.log(cov.eigenvalues))))
    if not np.isfinite(factor):
        raise NumericalError(f"Covariance scale cannot be normalized ({matrix_diagnostics(cov.C)})")
    eigenvalues = np.maximum(cov.eigenvalues * factor, EIGEN_FLOOR)
    cov = replace(cov, C=cov.C * factor, eigenvalues=eigenvalues)
    if p_c is not None:
        p_c = p_c * np.sqrt(factor)
    return cov, p_c, factor


def csa_update_sigma(state, z_w, config):
    """
    Cumulative step-size adaptation.

    returns: (sigma', conjugate path p_sigma')
    """
    c_s = config.c_sigma
    p_sigma = (1 - c_s) * state.sigma_path + np.sqrt(c_s * (2 - c_s) * config.mu_eff) * (state.cov.R @ z_w)
    chi_n = expected_norm(state.dimension)
    sigma = state.sigma * np.exp((c_s / config.d_sigma) * (np.linalg.norm(p_sigma) / chi_n - 1))
    return float(sigma), p_sigma
