#
# phase_domain.py
# FocalHessian
#
# Periodic boundary handling for spectral-phase decision variables: wrapping, torus
# distances and a-posteriori reconstruction of the mutation vector after a wrap.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Tratamento de fronteira periodica para variaveis de fase."""

from dataclasses import dataclass

import numpy as np

from focalhessian.libs import ConfigurationError


TWO_PI = 2.0 * np.pi

WRAP_MODES = ("unbounded", "reject", "wrap")

# smallest eigenvalue (relative to the largest) considered safe for the inverse transform
NEAR_SINGULAR_RATIO = 1e-14


@dataclass(frozen=True)
class WrapPolicy:
    mode: str = "unbounded"
    period: float = TWO_PI

    def __post_init__(self):
        if self.mode not in WRAP_MODES:
            raise ConfigurationError(f"Unknown wrap mode '{self.mode}'. Valid modes: {', '.join(WRAP_MODES)}")
        if not self.period > 0:
            raise ConfigurationError(f"Wrap period must be positive, got {self.period}")

    @classmethod
    def from_value(cls, value):
        if value is None:
            return None
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            return cls(mode=value)
        return cls(**value)

    def to_dict(self):
        return {"mode": self.mode, "period": self.period}


def wrap(phi, period=TWO_PI):
    """
    Maps every component into [0, period). Idempotent.
    """
    wrapped = np.mod(np.asarray(phi, dtype=float), period)
    # np.mod can round tiny negative inputs up to exactly `period`
    wrapped[wrapped >= period] = 0.0
    return wrapped


def in_domain(x, period=TWO_PI):
    x = np.asarray(x)
    return bool(np.all((x >= 0) & (x < period)))


def torus_difference(a, b, period=TWO_PI):
    """
    Shortest signed difference a - b on the torus, each component in [-period/2, period/2).
    """
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return np.mod(d + period / 2.0, period) - period / 2.0


def torus_distance(a, b, period=TWO_PI):
    return float(np.linalg.norm(torus_difference(a, b, period)))


def is_near_singular(eigenvalues):
    eigenvalues = np.asarray(eigenvalues)
    return bool(eigenvalues[-1] < NEAR_SINGULAR_RATIO * eigenvalues[0])


def posterior_mutation(x_wrapped, old_parent, sigma, cov, quiet=False):
    """
    Reconstructs the standard-normal mutation that maps the old parent onto the
    wrapped candidate: z = Lambda^{-1/2} R^T (x_wrapped - parent) / sigma.

    cov: CovarianceModel with a fresh eigendecomposition (uses cov.R, cov.eigenvalues)
    """
    eigenvalues = np.asarray(cov.eigenvalues)
    if is_near_singular(eigenvalues) and not quiet:
        print(f"WARNING: posterior mutation through a near-singular covariance (smallest eigenvalue used: {eigenvalues[-1]:.3e})")
    step = (np.asarray(x_wrapped, dtype=float) - np.asarray(old_parent, dtype=float)) / sigma
    return (cov.R.T @ step) / np.sqrt(eigenvalues)
