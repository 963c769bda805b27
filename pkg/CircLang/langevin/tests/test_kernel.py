import math
import unittest

from langevin import kernel
from langevin import quad
from langevin.exceptions import DomainError
from langevin.malliavin import compose
from langevin.malliavin import zero_point
from langevin.models import Regime
from langevin.models import TargetPoint


class ClassifyTest(unittest.TestCase):

    def test_regimes(self):
        self.assertEqual(kernel.classify(TargetPoint(1.0, 0.0, 0.0)), Regime.NON_DEGENERATE)
        self.assertEqual(kernel.classify(TargetPoint(-1e-12, 0.3, 0.2)), Regime.NON_DEGENERATE)
        self.assertEqual(kernel.classify(TargetPoint(0.0, -0.5, 0.0)), Regime.DEGENERATE_AXIS)
        self.assertEqual(kernel.classify(TargetPoint(0.0, 0.0, 0.0)), Regime.DEGENERATE_AXIS)
        self.assertEqual(kernel.classify(TargetPoint(0.0, 0.5, 0.0)), Regime.DEGENERATE_GENERIC)
        self.assertEqual(kernel.classify(TargetPoint(0.0, -0.5, 0.1)), Regime.DEGENERATE_GENERIC)


class NonDegenerateTest(unittest.TestCase):

    def test_exponent_at_zero_point(self):
        eps = 0.05
        for w in (0.5, 1.0, -2.0, 4.0):
            s_ratio, k_ratio = zero_point(w)
            result = kernel.p_case_i(eps, w, eps * s_ratio, eps * k_ratio)
            self.assertAlmostEqual(result.exponent, -w * w / (2.0 * eps), places=9)
            self.assertEqual(result.regime, Regime.NON_DEGENERATE)

    def test_matches_gaussian_fourier_inversion(self):
        for eps, w, y, z in ((0.5, 1.0, 0.3, 0.1), (0.2, -2.0, 0.1, -0.05), (0.1, 3.0, 0.02, 0.05)):
            expected = quad.fourier_invert_gaussian(eps, w, y / eps, z / eps)
            result = kernel.p_case_i(eps, w, y, z)
            self.assertAlmostEqual(result.log_density, expected.value, delta=1e-6)

    def test_symmetry_in_w_and_z(self):
        for eps, w, y, z in ((0.3, 1.2, 0.1, 0.2), (0.05, 2.5, -0.02, 0.01)):
            plus = kernel.p_case_i(eps, w, y, z)
            minus = kernel.p_case_i(eps, -w, y, -z)
            self.assertAlmostEqual(plus.log_density, minus.log_density, delta=1e-10 * abs(plus.log_density))

    def test_stated_prefactor_doubles(self):
        eps, w, y, z = 0.1, 1.5, 0.05, 0.02
        gaussian = kernel.p_case_i(eps, w, y, z, form="gaussian")
        stated = kernel.p_case_i(eps, w, y, z, form="stated")
        self.assertAlmostEqual(stated.log_prefactor - gaussian.log_prefactor, math.log(2.0), places=12)

    def test_forms_agree_on_the_diagonal(self):
        # the two forms only differ by swapping the offsets, so they agree when these are equal
        eps, w = 0.1, 1.5
        s_ratio, k_ratio = zero_point(w)
        y, z = eps * (s_ratio - 0.3), eps * (k_ratio - 0.3)
        gaussian = kernel.p_case_i(eps, w, y, z, form="gaussian")
        stated = kernel.p_case_i(eps, w, y, z, form="stated")
        self.assertAlmostEqual(stated.exponent, gaussian.exponent, places=10)

    def test_rejects_bad_arguments(self):
        with self.assertRaises(DomainError):
            kernel.p_case_i(0.1, 0.0, 0.0, 0.0)
        with self.assertRaises(DomainError):
            kernel.p_case_i(0.0, 1.0, 0.0, 0.0)
        with self.assertRaises(DomainError):
            kernel.p_case_i(0.1, 1.0, 0.0, 0.0, form="other")


class DegenerateAxisTest(unittest.TestCase):

    def test_value(self):
        eps, y = 0.1, -0.05
        result = kernel.p_case_ii(eps, y)
        expected_prefactor = (math.log(2.0 * math.sqrt(2.0) * math.e * kernel.sigma_value())
                              - 3.0 * math.log(eps) - 0.5 * math.log(eps - y))
        self.assertAlmostEqual(result.log_prefactor, expected_prefactor, places=12)
        self.assertAlmostEqual(result.exponent, -4.0 * math.pi ** 2 * 0.15 / 0.01, places=9)
        self.assertEqual(result.regime, Regime.DEGENERATE_AXIS)

    def test_sigma_positive(self):
        self.assertGreater(kernel.sigma_value(), 0.1)

    def test_positive_y_rejected(self):
        with self.assertRaises(DomainError):
            kernel.p_case_ii(0.1, 0.01)


class DegenerateGenericTest(unittest.TestCase):

    def test_c_eps(self):
        eps, y, z = 0.1, 0.2, 0.05
        expected = math.pi * z * z / (2.0 * (math.pi - 2.0 * math.tanh(math.pi / 2.0)) * eps ** 3) + (y - eps) / eps ** 2
        self.assertAlmostEqual(kernel.c_eps(eps, y, z), expected, places=10)

    def test_axis_form_differs_by_vanishing_factor(self):
        y = 0.5
        for eps in (0.1, 0.01, 0.001):
            generic = kernel.p_case_iii(eps, y, 0.0)
            axis = kernel.p_case_iii_axis(eps, y)
            self.assertAlmostEqual(generic.log_prefactor - axis.log_prefactor, 0.75 * math.log(y / (y - eps)), places=10)
            self.assertAlmostEqual(generic.exponent, axis.exponent, delta=1e-12 * abs(axis.exponent))
        self.assertLess(abs(kernel.p_case_iii(1e-4, y, 0.0).log_prefactor
                            - kernel.p_case_iii_axis(1e-4, y).log_prefactor), 2e-4)

    def test_sigma_prime_matches_closed_form(self):
        self.assertGreater(kernel.sigma_prime_value(), 0.1)
        self.assertAlmostEqual(kernel.sigma_prime_value(), quad.sigma_prime_closed_form(), delta=1e-8)

    def test_c_squared_diagnostic_is_finite(self):
        value = kernel.c_squared_diagnostic()
        self.assertTrue(math.isfinite(value))
        self.assertGreater(value, 0.0)

    def test_rejects_case_ii_points_and_negative_c(self):
        with self.assertRaises(DomainError):
            kernel.p_case_iii(0.1, -0.05, 0.0)
        with self.assertRaises(DomainError):
            kernel.p_case_iii(1.0, 0.0, 0.1)
        with self.assertRaises(DomainError):
            kernel.p_case_iii_axis(0.1, 0.0)


class GeneralTest(unittest.TestCase):

    def test_dispatch(self):
        eps = 0.01
        origin = kernel.ORIGIN
        self.assertEqual(kernel.p_general(eps, origin, TargetPoint(0.5, 0.001, 0.002)).regime, Regime.NON_DEGENERATE)
        self.assertEqual(kernel.p_general(eps, origin, TargetPoint(0.0, -0.05, 0.0)).regime, Regime.DEGENERATE_AXIS)
        self.assertEqual(kernel.p_general(eps, origin, TargetPoint(0.0, 0.05, 0.0)).regime,
                         Regime.DEGENERATE_GENERIC)

    def test_dispatch_matches_direct_calls(self):
        eps = 0.05
        target = TargetPoint(0.0, -0.02, 0.0)
        self.assertEqual(kernel.p_general(eps, kernel.ORIGIN, target), kernel.p_case_ii(eps, -0.02))
        target = TargetPoint(1.0, 0.01, 0.02)
        self.assertEqual(kernel.p_general(eps, kernel.ORIGIN, target), kernel.p_case_i(eps, 1.0, 0.01, 0.02))

    def test_invariant_under_common_shift(self):
        eps = 0.1
        start = TargetPoint(0.3, -0.1, 0.2)
        target = TargetPoint(1.4, 0.05, 0.25)
        reference = kernel.p_general(eps, start, target).log_density
        for shift in (TargetPoint(1.0, 0.5, -0.5), TargetPoint(-2.0, 0.0, 3.0), TargetPoint(math.pi, 1.0, 1.0)):
            moved = kernel.p_general(eps, compose(shift, start), compose(shift, target)).log_density
            self.assertAlmostEqual(moved, reference, delta=1e-10 * abs(reference))

    def test_support_indicator(self):
        self.assertTrue(kernel.support_indicator(0.1, 0.05, 0.05))
        self.assertTrue(kernel.support_indicator(0.1, 0.1, 0.0))
        self.assertFalse(kernel.support_indicator(0.1, 0.1, 0.1))

    def test_log_density(self):
        result = kernel.p_case_ii(0.1, -0.05)
        self.assertEqual(kernel.log_density(result), result.log_prefactor + result.exponent)


if __name__ == '__main__':
    unittest.main()
