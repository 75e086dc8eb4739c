"""Quadrature engines against analytic oracles.

Oracle kernels and their closed forms:

* propagative: int_0^{w/c} k/k_z dk = w/c,
  int_0^{w/c} (c^2/w^2) k k_z dk = w/(3c);
* oscillatory: int_0^{w/c} (k/k_z) cos(2 k_z z) dk = sin(2 z w/c)/(2z)
  (substitute u = k_z);
* evanescent: with kappa = sqrt(k^2 - w^2/c^2),
  int f dk with f = k kappa e^{-2 kappa z} equals
  int_0^inf kappa^2 e^{-2 kappa z} d kappa = 1/(4 z^3), and
  int_{w/c}^inf k^2 e^{-2 k z} dk = e^{-2az}(a^2/(2z) + a/(2z^2) + 1/(4z^3))
  with a = w/c, which scales as 1/(4z^3) for z -> 0.
"""

import math

import numpy as np
import pytest
from scipy.constants import c

from neqatom.quadrature import (
    QuadratureResult,
    QuadratureSpec,
    QuadratureToleranceError,
    integrate_evanescent,
    integrate_oscillatory,
    integrate_propagative,
)

OMEGA = 1.495e14
U = OMEGA / c


def vec(values):
    return np.asarray(values)[:, None] * np.ones(3)


def kernel_one_over_kz(k, kz):
    return vec(k / kz)


def kernel_k_kz(k, kz):
    return vec((c**2 / OMEGA**2) * k * kz)


class TestPropagative:
    def test_endpoint_singularity_kernel(self):
        res = integrate_propagative(kernel_one_over_kz, OMEGA)
        assert res.value == pytest.approx(U, rel=1e-12)
        assert np.all(res.error_estimate <= np.maximum(1e-9 * np.abs(res.value), 1e-14))

    def test_polynomial_kernel(self):
        res = integrate_propagative(kernel_k_kz, OMEGA)
        assert res.value == pytest.approx(U / 3.0, rel=1e-12)

    def test_zero_integrand(self):
        res = integrate_propagative(lambda k, kz: vec(np.zeros_like(k)), OMEGA)
        assert np.all(res.value == 0.0)
        assert np.all(res.error_estimate == 0.0)

    def test_deterministic(self):
        r1 = integrate_propagative(kernel_one_over_kz, OMEGA)
        r2 = integrate_propagative(kernel_one_over_kz, OMEGA)
        assert np.array_equal(r1.value, r2.value)
        assert np.array_equal(r1.error_estimate, r2.error_estimate)
        assert r1.evaluations == r2.evaluations

    def test_linearity(self):
        a, b = 2.75, -0.5
        spec = QuadratureSpec()
        combo = integrate_propagative(
            lambda k, kz: a * kernel_one_over_kz(k, kz) + b * kernel_k_kz(k, kz),
            OMEGA, spec)
        f = integrate_propagative(kernel_one_over_kz, OMEGA, spec)
        g = integrate_propagative(kernel_k_kz, OMEGA, spec)
        expected = a * f.value + b * g.value
        tol = 2 * np.maximum(spec.rel_tol * np.abs(expected), spec.abs_tol)
        assert np.all(np.abs(combo.value - expected) <= tol + 2e-16 * np.abs(expected))

    def test_breakpoints_accepted(self):
        res = integrate_propagative(kernel_one_over_kz, OMEGA, breakpoints=[0.3 * U, 0.7 * U])
        assert res.value == pytest.approx(U, rel=1e-12)

    def test_scalar_integrand_supported(self):
        res = integrate_propagative(lambda k, kz: k / kz, OMEGA)
        assert res.value.shape == (1,)
        assert res.value[0] == pytest.approx(U, rel=1e-12)


class TestOscillatory:
    def test_reduces_to_propagative_at_zero_height(self):
        r_prop = integrate_propagative(kernel_one_over_kz, OMEGA)
        r_osc = integrate_oscillatory(kernel_one_over_kz, OMEGA, 0.0)
        assert np.array_equal(r_prop.value, r_osc.value)

    @pytest.mark.parametrize("zu", [0.5, 7.0, 30.0, 100.0, 2000.0])
    def test_phase_kernel_closed_form(self, zu):
        z = zu / U

        def kernel(k, kz):
            return vec((k / kz) * np.cos(2.0 * kz * z))

        res = integrate_oscillatory(kernel, OMEGA, z)
        exact = math.sin(2.0 * z * U) / (2.0 * z)
        rel = 1e-8 if zu <= 100.0 else 1e-6
        assert res.value == pytest.approx(exact, rel=rel)

    def test_zero_reflection(self):
        res = integrate_oscillatory(lambda k, kz: vec(np.zeros_like(k)), OMEGA, 5.0 / U)
        assert np.all(res.value == 0.0)

    def test_rejects_negative_height(self):
        with pytest.raises(ValueError):
            integrate_oscillatory(kernel_one_over_kz, OMEGA, -1e-9)


class TestEvanescent:
    def test_pure_kappa_kernel(self):
        z = 1e-7

        def kernel(k, kappa):
            return vec(k * kappa * np.exp(-2.0 * kappa * z))

        res = integrate_evanescent(kernel, OMEGA, z)
        assert res.value == pytest.approx(1.0 / (4.0 * z**3), rel=1e-9)

    def test_near_field_kernel_and_scaling(self):
        def kernel_at(z):
            def kernel(k, kappa):
                return vec(k**2 * np.exp(-2.0 * k * z))
            return kernel

        def exact(z):
            a = U
            return math.exp(-2 * a * z) * (a**2 / (2 * z) + a / (2 * z**2) + 1 / (4 * z**3))

        z = 1e-4 / U
        got_z = integrate_evanescent(kernel_at(z), OMEGA, z)
        got_half = integrate_evanescent(kernel_at(z / 2), OMEGA, z / 2)
        assert got_z.value == pytest.approx(exact(z), rel=1e-9)
        assert got_half.value == pytest.approx(exact(z / 2), rel=1e-9)
        ratio = got_half.value[0] / got_z.value[0]
        assert abs(ratio - 8.0) < 0.05

    def test_zero_imaginary_reflection(self):
        res = integrate_evanescent(lambda k, kappa: vec(np.zeros_like(k)), OMEGA, 1e-7)
        assert np.all(res.value == 0.0)

    def test_requires_positive_height(self):
        with pytest.raises(ValueError, match="positive height"):
            integrate_evanescent(lambda k, kappa: vec(k), OMEGA, 0.0)
        with pytest.raises(ValueError, match="positive height"):
            integrate_evanescent(lambda k, kappa: vec(k), OMEGA, -1e-9)


class TestFailureAndSpec:
    def test_tolerance_failure_carries_best_estimate(self):
        spec = QuadratureSpec(rel_tol=1e-13, abs_tol=0.0, max_subdivisions=1)

        def spiky(k, kz):
            return vec(1.0 / (1e-6 + (k / U - 0.3) ** 2))

        with pytest.raises(QuadratureToleranceError) as err:
            integrate_propagative(spiky, OMEGA, spec)
        best = err.value.best
        assert isinstance(best, QuadratureResult)
        assert np.all(np.isfinite(best.value))
        assert best.evaluations > 0

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(rel_tol=0.0)
        with pytest.raises(ValueError):
            QuadratureSpec(abs_tol=-1.0)
        with pytest.raises(ValueError):
            QuadratureSpec(max_subdivisions=0)

    def test_convergence_monotonicity(self):
        # halving rel_tol never worsens the true error on the oracle kernel
        z = 30.0 / U

        def kernel(k, kz):
            return vec((k / kz) * np.cos(2.0 * kz * z))

        exact = math.sin(2.0 * z * U) / (2.0 * z)
        errors = []
        rel = 1e-3
        while rel >= 1e-9:
            res = integrate_oscillatory(kernel, OMEGA, z, QuadratureSpec(rel_tol=rel))
            errors.append(abs(res.value[0] - exact))
            rel /= 2.0
        for earlier, later in zip(errors, errors[1:]):
            assert later <= earlier + 1e-15 * abs(exact)
