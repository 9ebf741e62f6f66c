#
# analysis.py
# FocalHessian
#
# Post-run metrics: spectrum comparison against analytic Hessians, learning-rate fits of the
# covariance condition number, practical step-size audits and the selection-distribution test.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Calcula metricas pos-execucao sobre espectros e tracos de busca."""

from dataclasses import dataclass, asdict

import numpy as np
from scipy import stats
from scipy.linalg import subspace_angles

from focalhessian.serialization_utils import convert_to_serializable


RANK_GAP_DECADES = 2.0
AUDIT_SLACK = 0.05
MIN_FIT_POINTS = 10


@dataclass
class SpectrumComparison:
    recovered: np.ndarray
    reference: np.ndarray
    log_rms_error: float
    ratios: np.ndarray
    rank_estimate: int
    reference_rank: int
    scale_offset: float
    shape_log_rms_error: float
    n_compared: int

    def to_dict(self):
        return convert_to_serializable(asdict(self))


@dataclass
class LearningRateFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple
    n_points: int

    def to_dict(self):
        return convert_to_serializable(asdict(self))


@dataclass
class PracticalStepAudit:
    checked: int
    violations: int
    violating_generations: list
    proximity: np.ndarray
    median_proximity: float
    slack: float

    def to_dict(self, include_proximity=False):
        d = asdict(self)
        if not include_proximity:
            d.pop("proximity")
        return convert_to_serializable(d)


@dataclass
class ExponentialFitReport:
    rate: float
    ks_statistic: float
    p_value: float
    n_samples: int
    selection: str

    def to_dict(self):
        return convert_to_serializable(asdict(self))


def _magnitudes(values):
    v = np.abs(np.asarray(values, dtype=float))
    return np.sort(v)[::-1]


def _log10(values):
    return np.log10(np.maximum(values, np.finfo(float).tiny))


def spectral_rank(values, gap_decades=RANK_GAP_DECADES):
    """
    Number of eigenvalues above the largest consecutive log-gap, if that gap exceeds
    `gap_decades`; otherwise the full length.
    """
    logs = _log10(_magnitudes(values))
    if logs.shape[0] < 2:
        return int(logs.shape[0])
    gaps = logs[:-1] - logs[1:]
    k = int(np.argmax(gaps))
    return k + 1 if gaps[k] > gap_decades else int(logs.shape[0])


def compare_spectra(recovered, reference, sign_convention="minimize", rank_gap_decades=RANK_GAP_DECADES):
    """
    recovered: eigenvalues of the Hessian estimate (minimization convention)
    reference: eigenvalues of the analytic Hessian
    sign_convention: orientation the reference comes from; "maximize" negates it first

    Both spectra are sorted by magnitude. The log-RMS error only uses the indices above the
    reference rank gap.
    """
    recovered = np.asarray(recovered, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if recovered.shape != reference.shape:
        raise ValueError(f"Spectra must have the same length, got {recovered.shape} and {reference.shape}")
    if sign_convention == "maximize":
        reference = -reference
    elif sign_convention != "minimize":
        raise ValueError(f"Unknown sign convention '{sign_convention}'")

    rec = _magnitudes(recovered)
    ref = _magnitudes(reference)
    reference_rank = spectral_rank(ref, rank_gap_decades)
    rank_estimate = spectral_rank(rec, rank_gap_decades)

    d = _log10(rec[:reference_rank]) - _log10(ref[:reference_rank])
    offset = float(np.mean(d))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(ref > 0, rec / np.where(ref > 0, ref, 1.0), np.nan)

    return SpectrumComparison(
        recovered=rec,
        reference=ref,
        log_rms_error=float(np.sqrt(np.mean(d ** 2))),
        ratios=ratios,
        rank_estimate=rank_estimate,
        reference_rank=reference_rank,
        scale_offset=offset,
        shape_log_rms_error=float(np.sqrt(np.mean((d - offset) ** 2))),
        n_compared=reference_rank,
    )


def fit_log_condition(generations, cond):
    """
    Ordinary least squares of L(g) = log10(sqrt(cond(C))) against g.
    r^2 is reported as 0 for a flat series.
    """
    g = np.asarray(generations, dtype=float)
    L = np.log10(np.sqrt(np.asarray(cond, dtype=float)))
    if g.shape[0] < MIN_FIT_POINTS:
        raise ValueError(f"Need at least {MIN_FIT_POINTS} points for a learning-rate fit, got {g.shape[0]}")
    if np.ptp(g) == 0:
        raise ValueError("Learning-rate fit window spans a single generation")

    g_mean, L_mean = g.mean(), L.mean()
    slope = float(np.sum((g - g_mean) * (L - L_mean)) / np.sum((g - g_mean) ** 2))
    intercept = float(L_mean - slope * g_mean)
    ss_tot = float(np.sum((L - L_mean) ** 2))
    ss_res = float(np.sum((L - (intercept + slope * g)) ** 2))
    r_squared = 0.0 if np.ptp(L) == 0 else float(np.clip(1 - ss_res / ss_tot, 0.0, 1.0))
    return LearningRateFit(slope=slope, intercept=intercept, r_squared=r_squared,
                           window=(int(g.min()), int(g.max())), n_points=int(g.shape[0]))


def fit_learning_rate(trace, window=None):
    """
    trace: RunTrace
    window: (first generation, last generation), inclusive; defaults to the FOCAL phase
    """
    if window is None:
        records = trace.focal_records()
        if not records:
            raise ValueError("Trace has no FOCAL-phase generations to fit")
    else:
        g0, g1 = window
        records = [r for r in trace.records if g0 <= r.generation <= g1]
    return fit_log_condition([r.generation for r in records], [r.cond_c for r in records])


def audit_practical_steps(trace, slack=AUDIT_SLACK, focal_only=True):
    """
    Checks lower*(1-slack) <= delta_p(mu_eff=1) <= upper*(1+slack) per generation and the
    position of delta_p inside [lower, upper] (0 at the lower, 1 at the upper bound).
    """
    records = trace.focal_records() if focal_only else list(trace.records)
    violating = []
    proximity = np.full(len(records), np.nan)
    for i, r in enumerate(records):
        if not (r.lower_bound * (1 - slack) <= r.delta_p_unit <= r.upper_bound * (1 + slack)):
            violating.append(int(r.generation))
        span = r.upper_bound - r.lower_bound
        if span > 1e-12 * r.upper_bound:
            proximity[i] = (r.delta_p_unit - r.lower_bound) / span

    valid = proximity[np.isfinite(proximity)]
    median = float(np.median(valid)) if valid.size else float("nan")
    return PracticalStepAudit(checked=len(records), violations=len(violating), violating_generations=violating,
                              proximity=proximity, median_proximity=median, slack=slack)


def probe_selection_pdf(landscape, n_samples, sigma_probe, lam=10, mu=None, selection="ranking", seed=0):
    """
    Samples lambda points around the known optimum, applies (mu, lambda) selection and fits an
    exponential to the objective distance J of the selected points (maximum likelihood rate,
    Kolmogorov-Smirnov test against the fitted distribution).

    selection: "ranking" (truncation selection on fitness) or "random" (no selection pressure)
    """
    if landscape.optimum is None:
        raise ValueError(f"Landscape '{landscape.name}' has no known optimum")
    if selection not in ("ranking", "random"):
        raise ValueError(f"Unknown selection '{selection}'. Valid options: ranking, random")
    mu = max(1, lam // 2) if mu is None else mu
    if not 1 <= mu <= lam:
        raise ValueError(f"mu must satisfy 1 <= mu <= lambda ({lam}), got {mu}")

    rng = np.random.default_rng(seed)
    optimum = np.asarray(landscape.optimum, dtype=float)
    f_opt = landscape.noiseless(optimum)
    n = landscape.dimension

    samples = []
    collected = 0
    while collected < n_samples:
        X = optimum + sigma_probe * rng.standard_normal((lam, n))
        J = np.array([abs(landscape.noiseless(x) - f_opt) for x in X])
        if selection == "ranking":
            fitness = np.array([landscape.fitness(x, rng) for x in X])
            chosen = np.argsort(fitness, kind="stable")[:mu]
        else:
            chosen = rng.choice(lam, size=mu, replace=False)
        samples.append(J[chosen])
        collected += mu

    J = np.concatenate(samples)[:n_samples]
    rate = 1.0 / float(np.mean(J))
    ks = stats.kstest(J, "expon", args=(0.0, 1.0 / rate))
    return ExponentialFitReport(rate=rate, ks_statistic=float(ks.statistic), p_value=float(ks.pvalue),
                                n_samples=int(J.shape[0]), selection=selection)


def principal_angles(vectors, reference_vectors):
    """Principal angles (degrees, ascending) between the column spaces of two bases."""
    return np.sort(np.degrees(subspace_angles(np.asarray(vectors), np.asarray(reference_vectors))))


def top_eigenspace(H, k):
    """Eigenvectors of the k largest-magnitude eigenvalues of a symmetric matrix."""
    values, vectors = np.linalg.eigh(H)
    order = np.argsort(-np.abs(values), kind="stable")
    return vectors[:, order[:k]]
