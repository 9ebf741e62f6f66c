#
# test_shg.py
# FocalHessian
#
# Tests the simulated SHG objective: energy conservation, time shifts from linear phases,
# invariances and the closed-form and discrete Hessians against finite differences.
#
# Thales Matheus Mendonça Santos - November 2025
#

"""Testa o simulador de SHG e suas Hessianas."""

import unittest

import numpy as np
import numpy.testing as npt

from focalhessian.shg import PulseSpec, frequency_grid, frequency_step, spectral_amplitude, synthesize_field
from focalhessian.shg import pulse_energy, shg_eval, shg_discrete_hessian, shg_analytic_hessian
from focalhessian.landscapes import finite_difference_hessian
from focalhessian.libs import ConfigurationError


def relative_frobenius(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestPulseGrid(unittest.TestCase):
    def test_frequency_grid(self):
        pulse = PulseSpec(n=80)
        omega = frequency_grid(pulse)
        self.assertAlmostEqual(omega[0], -1.5)
        self.assertAlmostEqual(omega[-1], 1.5)
        npt.assert_allclose(np.diff(omega), frequency_step(pulse))
        A = spectral_amplitude(pulse)
        npt.assert_allclose(A, A[::-1], rtol=1e-12)
        self.assertTrue(np.all(A > 0))

    def test_time_grid_size(self):
        self.assertEqual(PulseSpec(n=80).n_time, 4096)
        self.assertEqual(PulseSpec(n=8).n_time, 256)
        self.assertEqual(PulseSpec(n=8, group=2).n_pixels, 16)

    def test_invalid(self):
        with self.assertRaises(ConfigurationError):
            PulseSpec(n=1)
        with self.assertRaises(ConfigurationError):
            PulseSpec(fwhm=0.0)
        with self.assertRaises(ConfigurationError):
            shg_eval(np.zeros(5), PulseSpec(n=8))


class TestSHGSignal(unittest.TestCase):
    def setUp(self):
        self.pulse = PulseSpec(n=80)
        self.rng = np.random.default_rng(0)

    def test_flat_phase_is_one(self):
        self.assertAlmostEqual(shg_eval(np.zeros(80), self.pulse), 1.0, places=14)

    def test_energy_is_conserved(self):
        expected = np.sum(spectral_amplitude(self.pulse) ** 2) * frequency_step(self.pulse)
        for _ in range(3):
            phi = self.rng.uniform(0, 2 * np.pi, 80)
            self.assertAlmostEqual(pulse_energy(phi, self.pulse) / expected, 1.0, places=10)

    def test_linear_phase_shifts_in_time(self):
        omega = frequency_grid(self.pulse)
        dt = 2 * np.pi / (self.pulse.n_time * frequency_step(self.pulse))
        m = 5
        _, E0 = synthesize_field(np.zeros(80), self.pulse)
        _, E1 = synthesize_field(m * dt * omega, self.pulse)
        npt.assert_allclose(np.abs(E1), np.roll(np.abs(E0), m), atol=1e-12 * np.abs(E0).max())

    def test_linear_phase_is_invariant(self):
        omega = frequency_grid(self.pulse)
        self.assertAlmostEqual(shg_eval(0.37 * omega + 1.3, self.pulse), 1.0, places=10)

    def test_random_phase_lowers_signal(self):
        self.assertLess(shg_eval(self.rng.uniform(0, 2 * np.pi, 80), self.pulse), 1.0)

    def test_input_noise(self):
        noisy = PulseSpec(n=8, noise_std=0.2)
        rng = np.random.default_rng(1)
        a = shg_eval(np.zeros(8), noisy, rng)
        b = shg_eval(np.zeros(8), noisy, rng)
        self.assertNotEqual(a, b)
        self.assertLessEqual(max(a, b), 1.0 + 1e-12)


class TestSHGHessian(unittest.TestCase):
    def test_discrete_matches_finite_differences(self):
        pulse = PulseSpec(n=16)
        H_fd = finite_difference_hessian(lambda phi: shg_eval(phi, pulse), np.zeros(16))
        self.assertLess(relative_frobenius(shg_discrete_hessian(pulse), H_fd), 1e-4)

    def test_grouped_pixels(self):
        pulse = PulseSpec(n=8, group=2)
        H_fd = finite_difference_hessian(lambda phi: shg_eval(phi, pulse), np.zeros(8))
        self.assertLess(relative_frobenius(shg_discrete_hessian(pulse), H_fd), 1e-4)

    def test_analytic_matches_discrete(self):
        for n in (24, 80):
            pulse = PulseSpec(n=n)
            self.assertLess(relative_frobenius(shg_analytic_hessian(pulse), shg_discrete_hessian(pulse)), 0.02)

    def test_analytic_matches_finite_differences(self):
        pulse = PulseSpec(n=80)
        H_fd = finite_difference_hessian(lambda phi: shg_eval(phi, pulse), np.zeros(80))
        self.assertLess(relative_frobenius(shg_analytic_hessian(pulse), H_fd), 0.02)

    def test_symmetry_and_signs(self):
        H = shg_analytic_hessian(PulseSpec(n=80))
        npt.assert_array_equal(H, H.T)
        self.assertTrue(np.all(np.diag(H) < 0))
        self.assertTrue(np.any(H > 0))

    def test_flat_phase_is_a_maximum(self):
        values = np.linalg.eigvalsh(shg_discrete_hessian(PulseSpec(n=80)))
        self.assertLess(values.max(), 1e-10 * np.abs(values).max())
        self.assertLess(values.min(), 0)

    def test_null_directions(self):
        pulse = PulseSpec(n=80)
        omega = frequency_grid(pulse)
        ones = np.ones(80)
        H_discrete = shg_discrete_hessian(pulse)
        scale = np.linalg.norm(H_discrete, 2)
        for v in (ones, omega):
            self.assertLess(np.linalg.norm(H_discrete @ v) / (scale * np.linalg.norm(v)), 1e-10)

        H = shg_analytic_hessian(pulse)
        scale = np.linalg.norm(H, 2)
        for v in (ones, omega):
            self.assertLess(np.linalg.norm(H @ v) / (scale * np.linalg.norm(v)), 0.02)


if __name__ == "__main__":
    unittest.main()
