#-*- coding: utf-8 -*-
import math
import unittest
from unittest import TestCase

import numpy as np

from forkbound.default import INTER_ARRIVAL, SERVICE_TIME
from forkbound.distributions import (Deterministic, ErlangK, Exponential,
                                     Gaussian, arrival_sigma_rho, log_mgf, mgf,
                                     parse_distribution, random_thinned_sigma_rho,
                                     rho_arrival, rho_service, sample_many,
                                     sample_quantile, scale_capacity,
                                     service_sigma_rho, split_merge_rho,
                                     thin_deterministic, thin_random)
from forkbound.errors import DomainError, ParseError
from forkbound.simulator import stream


class MgfTestCase(TestCase):

    def test_mgf_at_zero_is_one(self):
        for dist in (Exponential(2.0), Deterministic(1.5), Gaussian(1.0, 0.25), ErlangK(3, 1.0)):
            self.assertEqual(mgf(dist, 0.0), 1.0)

    def test_exponential(self):
        self.assertAlmostEqual(mgf(Exponential(1.0), 0.5), 2.0, places=12)
        self.assertAlmostEqual(log_mgf(Exponential(1.0), -1.0), math.log(0.5), places=12)

    def test_exponential_domain(self):
        self.assertRaises(DomainError, mgf, Exponential(1.0), 1.0)
        self.assertRaises(DomainError, mgf, Exponential(1.0), 2.0)

    def test_erlang(self):
        self.assertAlmostEqual(mgf(ErlangK(3, 1.0), 0.5), 8.0, places=10)

    def test_gaussian(self):
        self.assertAlmostEqual(log_mgf(Gaussian(1.0, 0.5), 2.0), 2.0 + 0.5 * 4 * 0.5, places=12)

    def test_deterministic_any_theta(self):
        self.assertAlmostEqual(log_mgf(Deterministic(1.25), 100.0), 125.0, places=9)

    def test_invalid_parameters(self):
        self.assertRaises(DomainError, Exponential, 0.0)
        self.assertRaises(DomainError, Deterministic, -1.0)
        self.assertRaises(DomainError, Gaussian, 1.0, -0.1)
        self.assertRaises(DomainError, ErlangK, 0, 1.0)


class RhoTestCase(TestCase):

    def test_mm1_parameters(self):
        self.assertAlmostEqual(rho_service(Exponential(1.0), 0.5), 2 * math.log(2), places=12)
        self.assertAlmostEqual(rho_arrival(Exponential(0.5, INTER_ARRIVAL), 0.5),
                               2 * math.log(2), places=12)

    def test_between_mean_and_extremes(self):
        arrival = Exponential(0.7, INTER_ARRIVAL)
        for theta in (0.01, 0.1, 1.0, 10.0):
            self.assertLessEqual(rho_arrival(arrival, theta), 1 / 0.7)
            self.assertGreater(rho_service(Exponential(1.0), theta * 0.09), 1.0)

    def test_gaussian_closed_forms(self):
        self.assertAlmostEqual(rho_service(Gaussian(1.0, 0.25), 2.0), 1.25, places=12)
        self.assertAlmostEqual(rho_arrival(Gaussian(1.0, 0.25, INTER_ARRIVAL), 2.0), 0.75,
                               places=12)

    def test_deterministic(self):
        self.assertEqual(rho_arrival(Deterministic(1.25, INTER_ARRIVAL), 3.0), 1.25)

    def test_role_checked(self):
        self.assertRaises(DomainError, rho_arrival, Exponential(1.0), 0.5)
        self.assertRaises(DomainError, rho_service, Exponential(1.0, INTER_ARRIVAL), 0.5)

    def test_theta_positive(self):
        self.assertRaises(DomainError, rho_service, Exponential(1.0), 0.0)

    def test_scale_capacity(self):
        scaled = scale_capacity(Exponential(1.0), 2.0)
        self.assertAlmostEqual(rho_service(scaled, 0.5), rho_service(Exponential(2.0), 0.5))
        self.assertAlmostEqual(scale_capacity(Gaussian(2.0, 4.0), 2.0).var, 1.0)
        self.assertRaises(DomainError, scale_capacity, Exponential(1.0), 0.0)

    def test_scale_capacity_mgf_identity(self):
        # E[exp(theta X / c)] = M_X(theta / c)
        rng = np.random.default_rng(2026)
        for _ in range(100):
            kind = rng.integers(4)
            if kind == 0:
                dist = Exponential(rng.uniform(0.2, 5.0))
            elif kind == 1:
                dist = ErlangK(int(rng.integers(1, 8)), rng.uniform(0.2, 5.0))
            elif kind == 2:
                dist = Gaussian(rng.uniform(0.1, 5.0), rng.uniform(0.0, 4.0))
            else:
                dist = Deterministic(rng.uniform(0.0, 5.0))
            c = rng.uniform(0.2, 5.0)
            if math.isinf(dist.theta_max):
                theta = rng.uniform(0.01, 3.0)
            else:
                theta = rng.uniform(0.01, 0.9) * c * dist.theta_max
            expected = log_mgf(dist, theta / c)
            self.assertAlmostEqual(log_mgf(scale_capacity(dist, c), theta), expected,
                                   delta=1e-12 * max(1.0, abs(expected)))


class ThinningTestCase(TestCase):

    def test_random_thinning_of_poisson_is_poisson(self):
        lam, p, theta = 4.0, 0.2, 0.3
        thinned = thin_random(Exponential(lam, INTER_ARRIVAL), p, theta)
        expected = rho_arrival(Exponential(p * lam, INTER_ARRIVAL), theta)
        self.assertAlmostEqual(thinned, expected, places=12)

    def test_random_thinning_p_one(self):
        arrival = Exponential(0.7, INTER_ARRIVAL)
        self.assertAlmostEqual(thin_random(arrival, 1.0, 0.4), rho_arrival(arrival, 0.4),
                               places=12)

    def test_deterministic_thinning(self):
        arrival = Exponential(4.0, INTER_ARRIVAL)
        self.assertAlmostEqual(thin_deterministic(arrival, 5, 0.3),
                               5 * rho_arrival(arrival, 0.3), places=12)
        self.assertRaises(DomainError, thin_deterministic, arrival, 0, 0.3)

    def test_deterministic_dominates_random(self):
        arrival = Exponential(4.0, INTER_ARRIVAL)
        for k in range(2, 11):
            for theta in (0.01, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0):
                self.assertGreaterEqual(thin_deterministic(arrival, k, theta),
                                        thin_random(arrival, 1.0 / k, theta) - 1e-12)

    def test_gaussian_random_thinning_domain(self):
        arrival = Gaussian(1.0, 1.0, INTER_ARRIVAL)
        pair = random_thinned_sigma_rho(arrival, 0.5)
        self.assertTrue(math.isfinite(pair.theta_max))
        self.assertTrue(math.isfinite(pair.rho(pair.theta_max * 0.5)))
        self.assertRaises(DomainError, pair.rho, pair.theta_max * 2)

    def test_split_merge_single_server(self):
        self.assertAlmostEqual(split_merge_rho([Exponential(1.0)], 0.3),
                               rho_service(Exponential(1.0), 0.3), places=12)

    def test_split_merge_identical_servers(self):
        value = split_merge_rho([Exponential(1.0)] * 4, 0.3)
        self.assertAlmostEqual(value, rho_service(Exponential(1.0), 0.3) + math.log(4) / 0.3,
                               places=12)


class SigmaRhoTestCase(TestCase):

    def setUp(self):
        self.grid = np.linspace(0.01, 0.95, 50)

    def test_service_monotone(self):
        for dist in (Exponential(1.0), ErlangK(2, 2.0), Gaussian(1.0, 0.3), Deterministic(1.0)):
            self.assertTrue(service_sigma_rho(dist).is_monotone(self.grid))

    def test_arrival_monotone(self):
        for dist in (Exponential(0.7, INTER_ARRIVAL), Gaussian(1.0, 0.3, INTER_ARRIVAL)):
            self.assertTrue(arrival_sigma_rho(dist).is_monotone(self.grid * 10))

    def test_outside_domain(self):
        pair = service_sigma_rho(Exponential(1.0))
        self.assertRaises(DomainError, pair.rho, 1.0)
        self.assertRaises(DomainError, pair.rho, 0.0)
        self.assertEqual(pair.sigma(0.5), 0.0)


class SamplingTestCase(TestCase):

    def test_exponential_mean_and_mgf(self):
        draws = sample_many(Exponential(1.0), stream(7, 0), 200000)
        self.assertAlmostEqual(draws.mean(), 1.0, delta=0.01)
        self.assertAlmostEqual(np.exp(0.25 * draws).mean(), mgf(Exponential(1.0), 0.25),
                               delta=0.01)

    def test_erlang_mean(self):
        draws = sample_many(ErlangK(3, 2.0), stream(7, 1), 100000)
        self.assertAlmostEqual(draws.mean(), 1.5, delta=0.02)

    def test_monte_carlo_mgf(self):
        # Gaussian(5, 1) is truncated at 0 with probability below 3e-7
        laws = (Exponential(1.0), ErlangK(3, 2.0), Gaussian(5.0, 1.0), Deterministic(1.25))
        n = 200000
        for i, dist in enumerate(laws):
            draws = sample_many(dist, stream(11, i), n)
            # theta < theta_max / 2 keeps exp(theta X) square integrable
            for theta in (0.1, 0.25, 0.4):
                values = np.exp(theta * draws)
                stderr = values.std(ddof=1) / math.sqrt(n)
                self.assertAlmostEqual(values.mean(), mgf(dist, theta),
                                       delta=5 * stderr + 1e-12 * mgf(dist, theta))

    def test_gaussian_truncated(self):
        dist = Gaussian(0.0, 1.0)
        self.assertTrue(dist.truncated_in_simulation)
        self.assertTrue(np.all(sample_many(dist, stream(7, 2), 10000) >= 0))
        self.assertFalse(Gaussian(1.0, 0.0).truncated_in_simulation)

    def test_deterministic(self):
        self.assertTrue(np.all(sample_many(Deterministic(1.25), stream(7, 3), 10) == 1.25))

    def test_quantile_transform(self):
        self.assertAlmostEqual(float(sample_quantile(Exponential(1.0), 0.5)), math.log(2))
        self.assertAlmostEqual(float(sample_quantile(Gaussian(1.0, 4.0), 0.5)), 1.0)
        self.assertEqual(float(sample_quantile(Deterministic(2.0), 0.3)), 2.0)

    def test_same_stream_same_draws(self):
        first = sample_many(Exponential(1.0), stream(3, 1, 0, 2), 100)
        second = sample_many(Exponential(1.0), stream(3, 1, 0, 2), 100)
        other = sample_many(Exponential(1.0), stream(3, 1, 0, 3), 100)
        self.assertTrue(np.array_equal(first, second))
        self.assertFalse(np.array_equal(first, other))


class ParseTestCase(TestCase):

    def test_literals(self):
        self.assertEqual(parse_distribution("exp:mu=1", SERVICE_TIME), Exponential(1.0))
        self.assertEqual(parse_distribution("exp:lambda=0.7", INTER_ARRIVAL),
                         Exponential(0.7, INTER_ARRIVAL))
        self.assertEqual(parse_distribution("det:d=1.25", INTER_ARRIVAL),
                         Deterministic(1.25, INTER_ARRIVAL))
        self.assertEqual(parse_distribution("gauss:mean=1,var=0.25", SERVICE_TIME),
                         Gaussian(1.0, 0.25))
        self.assertEqual(parse_distribution("erlang:k=3,lambda=1", SERVICE_TIME),
                         ErlangK(3, 1.0))

    def test_defaults_and_case(self):
        self.assertEqual(parse_distribution(" GAUSS:mean=2 ", SERVICE_TIME), Gaussian(2.0, 0.0))

    def test_errors(self):
        for text in ("foo:x=1", "exp:", "exp:mu", "exp:mu=abc", "exp:mu=-1",
                     "exp:mu=1,shape=2", "erlang:k=2.5,lambda=1"):
            self.assertRaises(ParseError, parse_distribution, text, SERVICE_TIME)

    def test_describe_roundtrip(self):
        dist = ErlangK(3, 1.5)
        self.assertEqual(parse_distribution(str(dist), SERVICE_TIME), dist)


def buildTestSuite():
    return unittest.defaultTestLoader.loadTestsFromName(__name__)


def main():
    buildTestSuite()
    unittest.main()

if __name__ == "__main__":
    main()
