#
# shg.py
# FocalHessian
#
# Simulated second-harmonic-generation pulse shaping objective: pixelated spectral phase,
# Fourier synthesis of the temporal field, the integrated squared intensity and its Hessian
# (closed form and exact discrete form).
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Simulador de geracao de segundo harmonico com fase espectral pixelada."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from focalhessian.libs import ConfigurationError


@dataclass(frozen=True)
class PulseSpec:
    """
    n: number of phase variables (SLM pixel groups)
    fwhm: spectral FWHM of the intensity |A|^2 (normalized frequency units)
    oversampling, padding: the time grid has at least oversampling * padding * (n * group) points
    group: adjacent pixels driven by one decision variable
    noise_std: std of the Gaussian input noise added to the phases per evaluation
    """
    n: int = 80
    fwhm: float = 1.0
    oversampling: int = 8
    padding: int = 4
    group: int = 1
    noise_std: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ConfigurationError(f"PulseSpec needs at least 2 phase variables, got n={self.n}")
        if not self.fwhm > 0:
            raise ConfigurationError(f"Spectral FWHM must be positive, got {self.fwhm}")
        if self.group < 1 or self.oversampling < 1 or self.padding < 1:
            raise ConfigurationError("group, oversampling and padding must be >= 1")
        if self.noise_std < 0:
            raise ConfigurationError(f"noise_std must be >= 0, got {self.noise_std}")

    @property
    def n_pixels(self):
        return self.n * self.group

    @property
    def n_time(self):
        min_points = self.oversampling * self.padding * self.n_pixels
        return int(2 ** int(np.ceil(np.log2(min_points))))


def frequency_grid(pulse):
    """Pixel frequencies, equally spaced on [-1.5 FWHM, 1.5 FWHM]."""
    return np.linspace(-1.5 * pulse.fwhm, 1.5 * pulse.fwhm, pulse.n_pixels)


def frequency_step(pulse):
    return 3.0 * pulse.fwhm / (pulse.n_pixels - 1)


def spectral_amplitude(pulse):
    omega = frequency_grid(pulse)
    return np.exp(-2 * np.log(2) * omega ** 2 / pulse.fwhm ** 2)


def pixel_phases(phi, pulse):
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (pulse.n,):
        raise ConfigurationError(f"Expected {pulse.n} phase values, got shape {phi.shape}")
    return np.repeat(phi, pulse.group)


def time_grid(pulse):
    N = pulse.n_time
    dt = 2 * np.pi / (N * frequency_step(pulse))
    return (np.arange(N) - N // 2) * dt


def synthesize_field(phi, pulse):
    """
    Complex analytic field E(t) = (1/sqrt(2 pi)) * sum_j A_j exp(i phi_j) exp(-i w_j t) dw
    on a zero-padded periodic time grid. The normalization makes sum |E|^2 dt equal
    sum A_j^2 dw for every phase.

    returns: (t, E) with t centered on zero
    """
    A = spectral_amplitude(pulse)
    c = A * np.exp(1j * pixel_phases(phi, pulse))
    N = pulse.n_time
    d_omega = frequency_step(pulse)
    omega_0 = -1.5 * pulse.fwhm
    t_raw = np.arange(N) * 2 * np.pi / (N * d_omega)

    E = d_omega / np.sqrt(2 * np.pi) * np.exp(-1j * omega_0 * t_raw) * np.fft.fft(c, n=N)
    return time_grid(pulse), np.fft.fftshift(E)


def pulse_energy(phi, pulse):
    t, E = synthesize_field(phi, pulse)
    return float(np.sum(np.abs(E) ** 2) * (t[1] - t[0]))


def _raw_signal(phi, pulse):
    t, E = synthesize_field(phi, pulse)
    return float(np.sum(np.abs(E) ** 4) * (t[1] - t[0]))


@lru_cache(maxsize=32)
def transform_limited_signal(pulse):
    return _raw_signal(np.zeros(pulse.n), pulse)


def shg_eval(phi, pulse, rng=None):
    """
    Integrated squared intensity, normalized to the transform-limited pulse (phi = 0 gives 1).
    Maximize orientation.
    """
    phi = np.asarray(phi, dtype=float)
    if pulse.noise_std > 0:
        rng = np.random.default_rng() if rng is None else rng
        phi = phi + rng.normal(0.0, pulse.noise_std, size=phi.shape)
    return _raw_signal(phi, pulse) / transform_limited_signal(pulse)


def grouping_matrix(pulse):
    """Maps the n decision variables onto the n * group pixels."""
    return np.kron(np.eye(pulse.n), np.ones((pulse.group, 1)))


def shg_discrete_hessian(pulse):
    """
    Exact Hessian of shg_eval at phi = 0 for the discretized model. With
    M[m, p] = A_p A_{m-p} and S_m = sum_p M[m, p]:

        H_pq = (-4 delta_pq (M^T S)_p - 4 A_p A_q S_{p+q} + 8 (M^T M)_pq) / sum_m S_m^2
    """
    A = spectral_amplitude(pulse)
    n_pix = A.shape[0]
    M = np.zeros((2 * n_pix - 1, n_pix))
    for p in range(n_pix):
        M[p:p + n_pix, p] = A[p] * A
    S = M.sum(axis=1)

    idx = np.arange(n_pix)
    H = -4 * np.diag(M.T @ S) - 4 * np.outer(A, A) * S[idx[:, None] + idx[None, :]] + 8 * (M.T @ M)
    H /= np.sum(S ** 2)
    H = (H + H.T) / 2.0

    G = grouping_matrix(pulse)
    return G.T @ H @ G


def shg_analytic_hessian(pulse):
    """
    Closed-form Hessian of the normalized SHG signal at phi = 0 for the Gaussian spectrum
    A(w) = exp(-a w^2), a = 2 ln2 / FWHM^2, evaluated on the pixel grid. Three terms:
    a Dirac diagonal (discretized as delta_jk / dw), a Gaussian kernel in (w' + w'') and
    a Gaussian kernel in (w' - w'').
    """
    omega = frequency_grid(pulse)
    A = spectral_amplitude(pulse)
    d_omega = frequency_step(pulse)
    a = 2 * np.log(2) / pulse.fwhm ** 2

    w1 = omega[:, None]
    w2 = omega[None, :]
    i1 = (np.pi / (a * np.sqrt(3))) * np.exp(-a * omega ** 2 / 3)
    i2 = np.sqrt(np.pi / (2 * a)) * np.exp(-0.5 * a * (w1 + w2) ** 2)
    i3 = np.sqrt(np.pi / (2 * a)) * np.exp(-0.5 * a * (w1 - w2) ** 2)
    AA = np.outer(A, A)

    H = d_omega ** 2 * (-4 * np.diag(A * i1) / d_omega - 4 * AA * i2 + 8 * AA * i3)
    H /= (np.pi / (2 * a)) * np.sqrt(np.pi / a)
    H = (H + H.T) / 2.0

    G = grouping_matrix(pulse)
    return G.T @ H @ G
