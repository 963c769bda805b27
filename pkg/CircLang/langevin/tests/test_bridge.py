import cmath
import math
import unittest

import numpy as np
from scipy import stats

from langevin import bridge
from langevin import kernel
from langevin.exceptions import DomainError
from langevin.exceptions import ValidityError
from langevin.malliavin import zero_point

N_PATHS = 20_000
N_STEPS = 256
SEED = 20240611


def integral(paths):
    return bridge.path_integral(paths)


def grid_of(paths):
    return np.arange(paths.shape[1]) / (paths.shape[1] - 1)


class SamplingTest(unittest.TestCase):

    def test_pinned_and_shaped(self):
        paths = bridge.sample_bridges(10, 64, SEED)
        self.assertEqual(paths.shape, (10, 65))
        self.assertTrue(np.all(paths[:, 0] == 0.0))
        self.assertTrue(np.all(paths[:, -1] == 0.0))

        path = bridge.sample_bridge(32, np.random.default_rng(1))
        self.assertEqual(path.values.shape, (33,))
        self.assertEqual(path.grid[-1], 1.0)

    def test_covariance(self):
        paths = bridge.sample_bridges(N_PATHS, N_STEPS, SEED)
        quarter, half = paths[:, 64], paths[:, 128]
        self.assertAlmostEqual(np.var(quarter), 0.25 * 0.75, delta=0.01)
        self.assertAlmostEqual(np.var(half), 0.25, delta=0.012)
        self.assertAlmostEqual(np.mean(quarter * half), 0.25 * 0.5, delta=0.01)

    def test_block_streams_match_spawned_children(self):
        children = bridge.bridge_block_streams(SEED, 3)
        np.testing.assert_array_equal(bridge.block_stream(SEED, 2).standard_normal(8), children[2].standard_normal(8))

    def test_too_few_steps(self):
        with self.assertRaises(DomainError):
            bridge.sample_bridges(5, 1, SEED)


class ReproducibilityTest(unittest.TestCase):

    def test_independent_of_worker_count(self):
        def functional(paths):
            return np.exp(integral(paths))

        single = bridge.mc_expectation(functional, 10_000, 64, seed=5, workers=1)
        pooled = bridge.mc_expectation(functional, 10_000, 64, seed=5, workers=4)
        self.assertEqual(single.mean, pooled.mean)
        self.assertEqual(single.std_error, pooled.std_error)

    def test_maximum_samples_independent_of_worker_count(self):
        np.testing.assert_array_equal(bridge.bridge_abs_maximum(9000, 32, seed=3, workers=1),
                                      bridge.bridge_abs_maximum(9000, 32, seed=3, workers=3))

    def test_seed_changes_result(self):
        def functional(paths):
            return integral(paths)

        first = bridge.mc_expectation(functional, 5000, 32, seed=1)
        second = bridge.mc_expectation(functional, 5000, 32, seed=2)
        self.assertNotEqual(first.mean, second.mean)

    def test_needs_two_paths(self):
        with self.assertRaises(DomainError):
            bridge.mc_expectation(integral, 1, 32, seed=1)

    def test_p_eps_field_independent_of_worker_count(self):
        xi_grid = np.array([[0.5, 0.0], [1.0, -1.0]])
        fields = [bridge.p_eps_mc(0.1, 1.0, 0.8, 0.3, xi_grid, n_paths=9000, n_steps=32, seed=4, workers=n)
                  for n in (1, 4, 8)]
        for field in fields[1:]:
            np.testing.assert_array_equal(field.mean, fields[0].mean)
            np.testing.assert_array_equal(field.std_error, fields[0].std_error)

    def test_endpoints_independent_of_worker_count(self):
        single = bridge.simulate_endpoints(0.1, 9000, 32, seed=4, workers=1)
        for workers in (4, 8):
            pooled = bridge.simulate_endpoints(0.1, 9000, 32, seed=4, workers=workers)
            for left, right in zip(single, pooled):
                np.testing.assert_array_equal(left, right)


class LaplaceTest(unittest.TestCase):

    def test_closed_form_values(self):
        self.assertEqual(bridge.laplace_const(0.0, 0.0), 1.0)
        self.assertAlmostEqual(bridge.laplace_const(2.0, 0.0), math.exp(4.0 / 24.0), places=14)
        self.assertAlmostEqual(bridge.laplace_const(0.0, 1.0), math.sqrt(1.0 / math.sinh(1.0)), places=14)
        expected = math.sqrt(2.0 / math.sinh(2.0)) * math.exp(9.0 * (1.0 - math.tanh(1.0)) / 8.0)
        self.assertAlmostEqual(bridge.laplace_const(3.0, 2.0), expected, places=12)

    def test_series_branch_is_continuous(self):
        below = bridge.laplace_const(1.5, 0.0099)
        above = bridge.laplace_const(1.5, 0.0101)
        self.assertAlmostEqual(below, above, delta=1e-5)
        factor = (0.0101 / 2.0 - math.tanh(0.0101 / 2.0)) / 0.0101 ** 3
        self.assertAlmostEqual(factor, 1.0 / 24.0 - 0.0101 ** 2 / 240.0, delta=1e-7)

    def test_large_gamma(self):
        self.assertAlmostEqual(bridge.laplace_const(0.0, 50.0), math.sqrt(100.0) * math.exp(-25.0), delta=1e-20)

    def test_const_against_monte_carlo(self):
        def functional(paths):
            return np.exp(integral(paths) - 0.5 * integral(paths ** 2))

        estimate = bridge.mc_expectation(functional, N_PATHS, N_STEPS, SEED)
        self.assertTrue(estimate.within(bridge.laplace_const(1.0, 1.0), n_se=4.0))

    def test_imaginary_values(self):
        self.assertEqual(bridge.laplace_imaginary(0.0), 1.0)
        self.assertAlmostEqual(bridge.laplace_imaginary(1.0), math.sqrt(math.sqrt(2.0) / math.sin(math.sqrt(2.0))),
                               places=14)
        self.assertAlmostEqual(bridge.laplace_imaginary(-2.0), bridge.laplace_const(0.0, 2.0), places=14)
        with self.assertRaises(DomainError):
            bridge.laplace_imaginary(math.pi ** 2 / 2.0)

    def test_imaginary_against_monte_carlo(self):
        def functional(paths):
            return np.exp(integral(paths ** 2))

        estimate = bridge.mc_expectation(functional, N_PATHS, N_STEPS, SEED + 1)
        self.assertTrue(estimate.within(bridge.laplace_imaginary(1.0), n_se=4.0))

    def test_step_doubling_stays_below_one_standard_error(self):
        # 1024-step bridges are the 2048-step ones read at every other node, so both
        # step counts share one path ensemble and the difference is the grid bias alone.
        def functional(paths):
            coarse = paths[:, ::2]
            weights = [(grid_of(p), p) for p in (paths, coarse)]
            constant = [np.exp(integral(p) - 0.5 * integral(p ** 2)) for _, p in weights]
            varying = [np.exp(integral(np.cos(math.pi * g) * p) - integral(g * p ** 2)) for g, p in weights]
            return np.stack(constant + varying, axis=1)

        mean, std_error = bridge.mc_array(functional, 12_000, 2048, seed=SEED + 5)
        for fine, coarse, label in ((0, 1, "constant"), (2, 3, "time-dependent")):
            self.assertLess(abs(mean[fine] - mean[coarse]), min(std_error[fine], std_error[coarse]), msg=label)
        self.assertLessEqual(abs(mean[1] - bridge.laplace_const(1.0, 1.0)), 4.0 * std_error[1])
        expected = bridge.laplace_general(lambda s: math.cos(math.pi * s), lambda s: -s)
        self.assertLessEqual(abs(mean[3] - expected), 4.0 * std_error[3])


class RiccatiTest(unittest.TestCase):

    def test_constant_coefficients(self):
        value = bridge.laplace_general(lambda s: 1.0, lambda s: -0.5)
        self.assertAlmostEqual(value, bridge.laplace_const(1.0, 1.0), delta=1e-8)
        value = bridge.laplace_general(lambda s: 0.0, lambda s: 1.0)
        self.assertAlmostEqual(value, bridge.laplace_imaginary(1.0), delta=1e-8)
        value = bridge.laplace_general(lambda s: 2.0, lambda s: 0.0)
        self.assertAlmostEqual(value, math.exp(4.0 / 24.0), delta=1e-10)

    def test_solution_of_constant_equation(self):
        solution = bridge.solve_riccati(lambda s: -0.5, n_nodes=513)
        np.testing.assert_allclose(solution.u, np.cosh(solution.grid), rtol=1e-10)
        np.testing.assert_allclose(solution.g, -np.tanh(solution.grid), atol=1e-10)

    def test_time_dependent_against_monte_carlo(self):
        def functional(paths):
            grid = grid_of(paths)
            return np.exp(integral(grid * paths) - integral(grid * paths ** 2))

        estimate = bridge.mc_expectation(functional, N_PATHS, N_STEPS, SEED + 2)
        self.assertTrue(estimate.within(bridge.laplace_general(lambda s: s, lambda s: -s), n_se=4.0))

    def test_non_positive_u_rejected(self):
        with self.assertRaises(ValidityError):
            bridge.solve_riccati(lambda s: 2.0, n_nodes=257)


class FourierLaplaceTest(unittest.TestCase):

    def test_against_monte_carlo(self):
        for index, (xi, chi, x) in enumerate(((1.0, 1.0, 1.0), (0.0, -4.0, 2.0), (2.0, 0.5, 5.0))):
            def functional(paths, xi=xi, chi=chi, x=x):
                return np.exp(1j * xi * integral(paths) - 0.5 * complex(chi, x) * integral(paths ** 2))

            estimate = bridge.mc_expectation(functional, N_PATHS, N_STEPS, SEED + 10 + index)
            self.assertTrue(estimate.within(bridge.fourier_laplace_complex(xi, chi, x), n_se=4.0),
                            msg=f"(ξ, χ, x) = ({xi}, {chi}, {x})")

    def test_real_limit(self):
        for xi, chi in ((1.0, 1.0), (2.0, 4.0)):
            gamma = math.sqrt(chi)
            expected = math.sqrt(gamma / math.sinh(gamma)) * math.exp(
                -xi * xi * (gamma / 2.0 - math.tanh(gamma / 2.0)) / gamma ** 3)
            self.assertAlmostEqual(abs(bridge.fourier_laplace_complex(xi, chi, 0.0) - expected), 0.0, places=13)
            self.assertAlmostEqual(abs(bridge.fourier_laplace_complex(xi, chi, 1e-9) - expected), 0.0, places=8)

    def test_abscissa_rejected(self):
        with self.assertRaises(DomainError):
            bridge.fourier_laplace_complex(1.0, -math.pi ** 2, 1.0)


class GaussLinearTest(unittest.TestCase):

    def test_constant_integrand(self):
        for c in (1.0, 2.5, 1.0 + 2.0j):
            self.assertAlmostEqual(abs(bridge.gauss_linear(lambda s, c=c: c) - cmath.exp(c * c / 24.0)), 0.0,
                                   places=12)

    def test_matches_limiting_gaussian(self):
        xi_prime, xi, w = 1.0, 2.0, 1.3

        def u(s):
            return 1j * (-xi_prime * math.sin(w * s) + xi * math.cos(w * s))

        self.assertAlmostEqual(abs(bridge.gauss_linear(u) - bridge.e0_gaussian(xi_prime, xi, w)), 0.0, places=10)

    def test_limiting_gaussian_at_origin(self):
        self.assertEqual(bridge.e0_gaussian(0.0, 0.0, 2.0), 1.0)
        self.assertAlmostEqual(bridge.e0_gaussian(0.0, 1.0, 0.0), math.exp(-1.0 / 24.0), places=15)


class PEpsTest(unittest.TestCase):

    def test_small_time_limit(self):
        eps, w = 1e-4, 1.0
        s_ratio, k_ratio = zero_point(w)
        xi_grid = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, -1.0]])
        field = bridge.p_eps_mc(eps, w, s_ratio, k_ratio, xi_grid, n_paths=8192, n_steps=N_STEPS, seed=SEED)
        self.assertTrue(np.all(np.abs(field.mean) <= 1.0 + 1e-12))
        self.assertAlmostEqual(complex(field.mean[0]), 1.0, places=12)
        for (xi_prime, xi), mean, error in zip(xi_grid, field.mean, field.std_error):
            expected = bridge.e0_gaussian(xi_prime, xi, w)
            self.assertLessEqual(abs(mean - expected), 4.0 * error + 0.03, msg=f"ξ = ({xi_prime}, {xi})")

    def test_finite_time_near_gaussian_limit(self):
        # at ε = 0.1 the √ε phase correction is a few percent for |ξ| ≤ 1
        eps, w = 0.1, 1.0
        s_ratio, k_ratio = zero_point(w)
        xi_grid = np.array([[0.5, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.5], [1.0, 1.0]])
        field = bridge.p_eps_mc(eps, w, s_ratio, k_ratio, xi_grid, n_paths=50_000, n_steps=128, seed=SEED + 3)
        for (xi_prime, xi), mean, error in zip(xi_grid, field.mean, field.std_error):
            expected = bridge.e0_gaussian(xi_prime, xi, w)
            self.assertLessEqual(abs(mean - expected), 3.0 * error + 0.05 * expected, msg=f"ξ = ({xi_prime}, {xi})")
            self.assertLessEqual(abs(abs(mean) - expected), 3.0 * error + 0.05 * expected)

    def test_bad_epsilon(self):
        with self.assertRaises(DomainError):
            bridge.p_eps_mc(0.0, 1.0, 0.0, 0.0, np.zeros((1, 2)), n_paths=10, n_steps=8)


class EndpointTest(unittest.TestCase):

    def test_plane_endpoint_stays_in_support(self):
        eps = 0.1
        w, y, z = bridge.simulate_endpoints(eps, N_PATHS, 128, SEED)
        self.assertEqual(np.count_nonzero(~kernel.support_indicator(eps, y, z)), 0)
        self.assertAlmostEqual(np.var(w), eps, delta=0.006)
        self.assertEqual(w.shape, (N_PATHS,))


class MaximumTest(unittest.TestCase):

    def test_series_agree(self):
        y = np.linspace(0.3, 2.0, 35)
        np.testing.assert_allclose(bridge.wstar_cdf_alternating(y), bridge.wstar_cdf_dual(y), atol=1e-12)

    def test_cdf_shape(self):
        self.assertEqual(bridge.wstar_cdf(0.0), 0.0)
        self.assertEqual(bridge.wstar_cdf(-1.0), 0.0)
        self.assertAlmostEqual(bridge.wstar_cdf(10.0), 1.0, places=15)
        self.assertAlmostEqual(bridge.wstar_cdf(0.8276), 0.5, delta=1e-3)
        values = bridge.wstar_cdf(np.linspace(0.05, 3.0, 200))
        self.assertTrue(np.all(np.diff(values) >= 0))
        self.assertIsInstance(bridge.wstar_cdf(1.0), float)

    def test_tail_bound(self):
        for t in np.linspace(0.1, 5.0, 50):
            self.assertLessEqual(1.0 - bridge.wstar_cdf(math.sqrt(t)), bridge.wstar_tail_bound(t) + 1e-15)

    def test_sampled_maximum_follows_cdf(self):
        samples = bridge.bridge_abs_maximum(100_000, 128, seed=SEED)
        self.assertGreater(samples.min(), 0.0)
        result = stats.kstest(samples, bridge.wstar_cdf)
        self.assertLess(result.statistic, 0.01)


if __name__ == '__main__':
    unittest.main()
