#
# landscapes.py
# FocalHessian
#
# Benchmark objectives with analytic ground truth (noisy separable ellipse, rotated
# rank-deficient quadratic, sphere, simulated SHG) and the registry used to select them by name.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Paisagens de teste com Hessiana analitica conhecida."""

from dataclasses import dataclass, field, asdict
from functools import lru_cache, partial
from typing import Callable, Optional

import numpy as np
from scipy.stats import ortho_group

from focalhessian.libs import ConfigurationError
from focalhessian.phase_domain import WrapPolicy, TWO_PI
from focalhessian.shg import PulseSpec, shg_eval, shg_analytic_hessian


ORIENTATIONS = ("minimize", "maximize")


@dataclass(frozen=True, eq=False)
class Landscape:
    name: str
    dimension: int
    func: Callable
    orientation: str = "minimize"
    noise_std: float = 0.0
    analytic_hessian: Optional[np.ndarray] = None
    optimum: Optional[np.ndarray] = None
    domain: tuple = (-1.0, 1.0)
    wrap_policy: Optional[WrapPolicy] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ConfigurationError(f"Unknown orientation '{self.orientation}'")

    def evaluate(self, x, rng=None):
        """
        Objective value in the landscape's own orientation. Input noise is drawn fresh from
        `rng` on every call.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise ConfigurationError(f"Landscape '{self.name}' expects {self.dimension} variables, got shape {x.shape}")
        if self.noise_std > 0:
            rng = np.random.default_rng() if rng is None else rng
            x = x + rng.normal(0.0, self.noise_std, size=x.shape)
        return float(self.func(x))

    def noiseless(self, x):
        return float(self.func(np.asarray(x, dtype=float)))

    def to_minimization(self, value):
        return -value if self.orientation == "maximize" else value

    def fitness(self, x, rng=None):
        return self.to_minimization(self.evaluate(x, rng))

    def hessian_minimization(self):
        if self.analytic_hessian is None:
            return None
        return -self.analytic_hessian if self.orientation == "maximize" else self.analytic_hessian

    def initial_point(self, rng):
        lower, upper = self.domain
        return rng.uniform(lower, upper, size=self.dimension)


@dataclass(frozen=True)
class EllipseSpec:
    n: int
    xi: float = 1e4
    noise_std: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError(f"Ellipse dimension must be >= 1, got {self.n}")
        if not self.xi >= 1:
            raise ConfigurationError(f"Ellipse condition number must be >= 1, got {self.xi}")
        if self.noise_std < 0:
            raise ConfigurationError(f"noise_std must be >= 0, got {self.noise_std}")

    def scales(self):
        if self.n == 1:
            return np.ones(1)
        return self.xi ** (np.arange(self.n) / (self.n - 1))


@dataclass(frozen=True)
class RankDeficientQuadSpec:
    n: int
    rank: int
    spectrum: Optional[tuple] = None
    seed: int = 0
    rotate: bool = True
    noise_std: float = 0.0

    def __post_init__(self):
        if not 1 <= self.rank <= self.n:
            raise ConfigurationError(f"Rank must satisfy 1 <= rank <= n ({self.n}), got {self.rank}")
        if self.spectrum is not None:
            if len(self.spectrum) != self.rank:
                raise ConfigurationError(f"Expected {self.rank} spectrum values, got {len(self.spectrum)}")
            if any(s <= 0 for s in self.spectrum):
                raise ConfigurationError("Rank-deficient spectrum values must be positive")
        if self.noise_std < 0:
            raise ConfigurationError(f"noise_std must be >= 0, got {self.noise_std}")

    def values(self):
        if self.spectrum is None:
            # two decades, largest first
            return np.logspace(2, 0, self.rank)
        return np.asarray(self.spectrum, dtype=float)

    def rotation(self):
        return _rotation(self.n, self.seed, self.rotate)


@dataclass(frozen=True)
class SphereSpec:
    n: int
    noise_std: float = 0.0


@lru_cache(maxsize=16)
def _rotation(n, seed, rotate):
    if not rotate or n == 1:
        return np.eye(n)
    return ortho_group.rvs(dim=n, random_state=seed)


def _perturb(x, noise_std, rng):
    x = np.asarray(x, dtype=float)
    if noise_std > 0:
        rng = np.random.default_rng() if rng is None else rng
        x = x + rng.normal(0.0, noise_std, size=x.shape)
    return x


def ellipse_eval(x, spec, rng=None):
    x = _perturb(x, spec.noise_std, rng)
    return float(np.sum(spec.scales() * x ** 2))


def ellipse_hessian(spec):
    return np.diag(2.0 * spec.scales())


def rankdef_eval(x, spec, rng=None):
    u = spec.rotation() @ _perturb(x, spec.noise_std, rng)
    return float(np.sum(spec.values() * u[:spec.rank] ** 2))


def rankdef_hessian(spec):
    Q = spec.rotation()
    s = np.zeros(spec.n)
    s[:spec.rank] = spec.values()
    H = 2.0 * (Q.T * s) @ Q
    return (H + H.T) / 2.0


def sphere_eval(x, spec, rng=None):
    x = _perturb(x, spec.noise_std, rng)
    return float(np.sum(x ** 2))


def sphere_hessian(spec):
    return 2.0 * np.eye(spec.n)


def finite_difference_hessian(func, x, step=1e-3):
    """
    Central second differences:
    H_ij = [f(x+h_i+h_j) - f(x+h_i-h_j) - f(x-h_i+h_j) + f(x-h_i-h_j)] / (4 h^2)
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    E = np.eye(n) * step
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            value = (func(x + E[i] + E[j]) - func(x + E[i] - E[j])
                     - func(x - E[i] + E[j]) + func(x - E[i] - E[j])) / (4 * step ** 2)
            H[i, j] = H[j, i] = value
    return H


def make_ellipse(n, xi=1e4, noise_std=0.0):
    spec = EllipseSpec(n=n, xi=xi, noise_std=noise_std)
    return Landscape(name="ellipse", dimension=n, func=partial(ellipse_eval, spec=EllipseSpec(n, xi)),
                     noise_std=noise_std, analytic_hessian=ellipse_hessian(spec), optimum=np.zeros(n),
                     params=asdict(spec))


def make_rankdef(n, rank, spectrum=None, seed=0, rotate=True, noise_std=0.0):
    spec = RankDeficientQuadSpec(n=n, rank=rank, spectrum=None if spectrum is None else tuple(spectrum),
                                 seed=seed, rotate=rotate, noise_std=noise_std)
    noiseless = RankDeficientQuadSpec(n=n, rank=rank, spectrum=spec.spectrum, seed=seed, rotate=rotate)
    return Landscape(name="rankdef", dimension=n, func=partial(rankdef_eval, spec=noiseless),
                     noise_std=noise_std, analytic_hessian=rankdef_hessian(spec), optimum=np.zeros(n),
                     params=asdict(spec))


def make_sphere(n, noise_std=0.0):
    spec = SphereSpec(n=n, noise_std=noise_std)
    return Landscape(name="sphere", dimension=n, func=partial(sphere_eval, spec=SphereSpec(n)),
                     noise_std=noise_std, analytic_hessian=sphere_hessian(spec), optimum=np.zeros(n),
                     params=asdict(spec))


def make_shg(n=80, fwhm=1.0, oversampling=8, padding=4, group=1, noise_std=0.0):
    pulse = PulseSpec(n=n, fwhm=fwhm, oversampling=oversampling, padding=padding, group=group, noise_std=noise_std)
    noiseless = PulseSpec(n=n, fwhm=fwhm, oversampling=oversampling, padding=padding, group=group)
    return Landscape(name="shg", dimension=n, func=partial(shg_eval, pulse=noiseless),
                     orientation="maximize", noise_std=noise_std,
                     analytic_hessian=shg_analytic_hessian(pulse), optimum=np.zeros(n),
                     domain=(0.0, TWO_PI), wrap_policy=WrapPolicy("wrap"), params=asdict(pulse))


LANDSCAPES = {
    "ellipse": make_ellipse,
    "rankdef": make_rankdef,
    "sphere": make_sphere,
    "shg": make_shg,
}


def get_landscape(name, params=None):
    """
    Builds a landscape from the registry.

    name: one of "ellipse", "rankdef", "shg", "sphere"
    params: keyword arguments of the matching constructor (e.g. {"n": 80, "xi": 1e4})
    """
    if name not in LANDSCAPES:
        raise ConfigurationError(f"Unknown landscape '{name}'. Valid landscapes: {', '.join(LANDSCAPES)}")
    params = {} if params is None else dict(params)
    try:
        return LANDSCAPES[name](**params)
    except TypeError as e:
        raise ConfigurationError(f"Invalid parameters for landscape '{name}': {e}") from e
