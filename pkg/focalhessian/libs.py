#
# libs.py
# FocalHessian
#
# Shared utilities: error types raised across the toolkit and seeded random-stream helpers.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Utilitarios compartilhados: tipos de erro e geradores aleatorios com semente."""

import numpy as np


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration (unknown names, dimension mismatch, bad ranges)."""
    pass


class EvaluationError(ArithmeticError):
    def __init__(self, offspring_index, value, message=None):
        self.offspring_index = offspring_index
        self.value = value
        if message is None:
            message = f"Objective returned non-finite value {value} for offspring {offspring_index}."
        super().__init__(message)


class NumericalError(ArithmeticError):
    pass


class SearchAborted(RuntimeError):
    """
    Raised when the search state turns non-finite. The trace collected up to the
    failing generation is kept in `trace`, the original exception in `cause`.
    """
    def __init__(self, message, trace=None, cause=None):
        self.trace = trace
        self.cause = cause
        super().__init__(message)


def matrix_diagnostics(C):
    """
    Short human readable summary of a (supposedly) symmetric matrix, used in error messages.
    """
    C = np.asarray(C)
    finite = bool(np.all(np.isfinite(C)))
    msg = f"shape={C.shape}, finite={finite}"
    if finite and C.ndim == 2 and C.shape[0] == C.shape[1] and C.size > 0:
        diag = np.diag(C)
        asym = float(np.max(np.abs(C - C.T)))
        msg += f", diag range=[{diag.min():.3e}, {diag.max():.3e}], max asymmetry={asym:.3e}"
    return msg


def make_seed_sequence(seed):
    if seed is None or isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ConfigurationError(f"A fixed integer seed is required, got: {seed!r}")
    return np.random.SeedSequence(int(seed))


def spawn_generators(seed_sequence, count):
    """
    Spawns `count` independent generators from a SeedSequence. Spawning is deterministic
    and advances the parent sequence, so successive calls give fresh streams.
    """
    return [np.random.default_rng(s) for s in seed_sequence.spawn(count)]


def derived_generator(seed, stream):
    """
    Generator for auxiliary draws of a run (e.g. the random initial point). Streams 0 and 1
    are used by the search state itself.
    """
    return np.random.default_rng(make_seed_sequence(seed).spawn(stream + 1)[stream])
