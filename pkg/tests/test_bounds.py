#-*- coding: utf-8 -*-
import math
import unittest
from unittest import TestCase

from scipy import optimize

from forkbound.bounds import (ExpectedSojourn, QuantileAt, ServerSpec, TailAt,
                              TailBound, allocate_capacity_mean,
                              allocate_capacity_tail, capacity_bound,
                              choose_thetas, expected_sojourn, forkjoin_bound,
                              forkjoin_servers, load_balancing_bound,
                              mm1_exact_tail, optimize_theta, sojourn_bound,
                              splitmerge_bound, split_rates_mean,
                              split_rates_tail, thinning_bound,
                              waiting_bound)
from forkbound.default import (INTER_ARRIVAL, RANDOM, ROUND_ROBIN, THETA_MAX,
                               THETA_OPTIMIZE)
from forkbound.distributions import (Deterministic, Exponential,
                                     arrival_sigma_rho, rho_service,
                                     scale_capacity, split_merge_sigma_rho)
from forkbound.errors import DomainError, InfeasibleError, StabilityError


def mm1(lam, k=1, mu=1.0, iid=True):
    return forkjoin_servers(Exponential(lam, INTER_ARRIVAL), [Exponential(mu)] * k, iid)


class SojournBoundTestCase(TestCase):

    def test_mm1_closed_form(self):
        bound = sojourn_bound(mm1(0.7), [0.3])
        self.assertAlmostEqual(bound(20), math.exp(-6) / 0.7, places=12)

    def test_ratio_to_exact_tail(self):
        bound = sojourn_bound(mm1(0.7), [0.3])
        for tau in (0, 1, 5, 20, 50):
            self.assertAlmostEqual(math.exp(bound.log_value(tau)) / mm1_exact_tail(0.7, 1.0, tau),
                                   1 / 0.7, places=10)
        # below ln(mu/lambda)/(mu - lambda) the raw value exceeds 1
        self.assertEqual(bound(1.0), 1.0)
        self.assertAlmostEqual(bound(5.0) / mm1_exact_tail(0.7, 1.0, 5.0), 1 / 0.7, places=10)

    def test_union_over_identical_servers(self):
        one = sojourn_bound(mm1(0.7), [0.3])
        two = sojourn_bound(mm1(0.7, 2), [0.3, 0.3])
        self.assertEqual(len(two.terms), 1)
        for tau in (10, 20, 40):
            self.assertAlmostEqual(two(tau), 2 * one(tau), places=14)

    def test_clamped_and_monotone(self):
        bound = sojourn_bound(mm1(0.7, 4), [0.3] * 4)
        self.assertEqual(bound(0), 1.0)
        values = bound.curve(range(0, 100, 5))
        self.assertTrue(all(a >= b for a, b in zip(values, values[1:])))

    def test_gg1_dominates_gi(self):
        gi = sojourn_bound(mm1(0.7), [0.15])
        gg1_server = mm1(0.7, iid=False)[0]
        gg1 = sojourn_bound([gg1_server], [0.15])
        self.assertGreater(gg1_server.alpha(0.15), 1.0)
        for tau in (20, 40, 60):
            self.assertGreater(gg1(tau), gi(tau))

    def test_gg1_pole(self):
        server = mm1(0.7, iid=False)[0]
        self.assertRaises(StabilityError, sojourn_bound, [server], [0.3])

    def test_unstable(self):
        self.assertRaises(StabilityError, mm1(1.2)[0].theta_max)

    def test_outside_domain(self):
        self.assertRaises(StabilityError, sojourn_bound, mm1(0.7), [0.5])

    def test_splitmerge_interval_away_from_zero(self):
        # (1 + 10 theta)(1 - theta) >= 2 for lambda = 0.1 and two Exp(1) servers
        server = ServerSpec(arrival_sigma_rho(Exponential(0.1, INTER_ARRIVAL)),
                            split_merge_sigma_rho([Exponential(1.0)] * 2))
        lo, hi = server.admissible_interval()
        self.assertAlmostEqual(lo, (9 - math.sqrt(41)) / 20, places=8)
        self.assertAlmostEqual(hi, (9 + math.sqrt(41)) / 20, places=8)
        self.assertEqual(server.theta_interval(), (lo, hi))
        self.assertFalse(server.is_admissible(lo / 2))
        self.assertTrue(server.is_admissible((lo + hi) / 2))

    def test_splitmerge_bound(self):
        arrival = Exponential(0.1, INTER_ARRIVAL)
        services = [Exponential(1.0)] * 2
        for rule in (THETA_MAX, THETA_OPTIMIZE):
            bound, thetas = splitmerge_bound(arrival, services, theta_rule=rule, eps=1e-6)
            self.assertTrue(0.1298 < thetas[0] < 0.7702)
            self.assertTrue(math.isfinite(bound.quantile(1e-6)))
        fj, _ = forkjoin_bound(arrival, services, theta_rule=THETA_OPTIMIZE, eps=1e-6)
        self.assertGreaterEqual(bound.quantile(1e-6), fj.quantile(1e-6) - 1e-9)

    def test_splitmerge_union_too_loose(self):
        # 2 / (1 - theta) > 1 + 2 theta for every theta in (0, 1)
        self.assertRaises(StabilityError, splitmerge_bound, Exponential(0.5, INTER_ARRIVAL),
                          [Exponential(1.0)] * 2)

    def test_splitmerge_matches_union_at_same_theta(self):
        services = [Exponential(1.0)] * 2
        arrival = Exponential(0.1, INTER_ARRIVAL)
        server = ServerSpec(arrival_sigma_rho(arrival), split_merge_sigma_rho(services))
        theta = sum(server.admissible_interval()) / 2
        sm = sojourn_bound([server], [theta])
        fj = sojourn_bound(forkjoin_servers(arrival, services), [theta, theta])
        for tau in (10, 30, 60):
            self.assertAlmostEqual(sm(tau), fj(tau), places=12)


class WaitingBoundTestCase(TestCase):

    def test_single(self):
        bound = waiting_bound(mm1(0.7), [0.3])
        self.assertEqual(bound(0), 1.0)
        self.assertAlmostEqual(bound(10), math.exp(-3), places=12)

    def test_homogeneous(self):
        bound = waiting_bound(mm1(0.5, 3), [0.5] * 3)
        self.assertAlmostEqual(bound(10), 3 * math.exp(-5), places=12)

    def test_below_sojourn(self):
        servers = mm1(0.7, 2)
        for tau in (0, 5, 25):
            self.assertLessEqual(waiting_bound(servers, [0.2, 0.25])(tau),
                                 sojourn_bound(servers, [0.2, 0.25])(tau))


class QuantileTestCase(TestCase):

    def test_single_term(self):
        bound = TailBound(((1 / 0.7, 0.3, 0.0),))
        self.assertAlmostEqual(bound.quantile(1e-6),
                               (math.log(1 / 0.7) + math.log(1e6)) / 0.3, places=9)

    def test_inverts_multi_term(self):
        arrival = Exponential(0.5, INTER_ARRIVAL)
        servers = forkjoin_servers(arrival, [Exponential(1.0), Exponential(2.0)])
        bound = sojourn_bound(servers, [s.theta_max() for s in servers])
        self.assertEqual(len(bound.terms), 2)
        self.assertAlmostEqual(bound.quantile(bound(5.0)), 5.0, places=7)

    def test_ln_k_law(self):
        theta = 0.5
        base = sojourn_bound(mm1(0.5), [theta]).quantile(1e-6)
        for k in (2, 4, 8, 16):
            value = sojourn_bound(mm1(0.5, k), [theta] * k).quantile(1e-6)
            self.assertAlmostEqual(value - base, math.log(k) / theta, places=9)

    def test_monotone_in_eps(self):
        bound = sojourn_bound(mm1(0.7, 3), [0.3] * 3)
        self.assertGreater(bound.quantile(1e-6), bound.quantile(1e-3))

    def test_bad_eps(self):
        bound = sojourn_bound(mm1(0.7), [0.3])
        self.assertRaises(DomainError, bound.quantile, 0.0)
        self.assertRaises(DomainError, bound.quantile, 1.0)

    def test_forkjoin_k4(self):
        bound, thetas = forkjoin_bound(Exponential(0.7, INTER_ARRIVAL), [Exponential(1.0)] * 4,
                                       theta_rule=THETA_MAX)
        self.assertAlmostEqual(thetas[0], 0.3, places=9)
        expected = (math.log(4) + math.log(1 / 0.7) + math.log(1e6)) / 0.3
        self.assertAlmostEqual(bound.quantile(1e-6), expected, places=6)
        self.assertAlmostEqual(bound.quantile(1e-6), 51.862, places=3)


class ExpectedSojournTestCase(TestCase):

    def test_values(self):
        rho_s = rho_service(Exponential(1.0), 0.5)
        self.assertAlmostEqual(expected_sojourn(1, rho_s, 0.5, 1.0), 3.386294, places=6)
        self.assertAlmostEqual(expected_sojourn(4, rho_s, 0.5, 1.0), 6.158883, places=6)
        self.assertAlmostEqual(expected_sojourn(4, rho_s, 0.5, 1.0)
                               - expected_sojourn(1, rho_s, 0.5, 1.0), math.log(4) / 0.5)

    def test_errors(self):
        self.assertRaises(DomainError, expected_sojourn, 1, 1.0, 0.5, 0.5)
        self.assertRaises(DomainError, expected_sojourn, 0, 1.0, 0.5, 1.0)
        self.assertRaises(DomainError, expected_sojourn, 1, 1.0, 0.0, 1.0)


class OptimizeThetaTestCase(TestCase):

    def test_mm1_maximal_theta(self):
        server = mm1(0.7)[0]
        self.assertAlmostEqual(optimize_theta(server, TailAt(200.0)), 0.3, delta=1e-6)

    def test_dm1_theta(self):
        server = forkjoin_servers(Deterministic(1.25, INTER_ARRIVAL), [Exponential(1.0)])[0]
        root = optimize.brentq(lambda t: -math.log1p(-t) / t - 1.25, 1e-6, 1.0 - 1e-9, xtol=1e-15)
        self.assertAlmostEqual(server.theta_max(), root, places=8)
        self.assertLessEqual(rho_service(Exponential(1.0), server.theta_max()), 1.25 + 1e-12)

    def test_gg1_interior(self):
        server = mm1(0.7, iid=False)[0]
        theta = optimize_theta(server, QuantileAt(1e-6))
        self.assertGreater(theta, 0)
        self.assertLess(theta, server.theta_max())
        self.assertGreaterEqual(server.gap(theta), 1e-9)

    def test_optimized_not_worse_than_max(self):
        arrival = Exponential(4.0, INTER_ARRIVAL)
        services = [Exponential(1.0)] * 6
        fixed, _ = thinning_bound(arrival, services, ROUND_ROBIN, theta_rule=THETA_MAX)
        tuned, _ = thinning_bound(arrival, services, ROUND_ROBIN, theta_rule=THETA_OPTIMIZE,
                                  eps=1e-3)
        self.assertLessEqual(tuned.quantile(1e-3), fixed.quantile(1e-3) + 1e-9)

    def test_expected_sojourn_objective(self):
        server = mm1(0.5)[0]
        theta = optimize_theta(server, ExpectedSojourn())
        value = ExpectedSojourn()(server, theta, 1)
        self.assertLessEqual(value, ExpectedSojourn()(server, 0.5 * server.theta_max(), 1) + 1e-9)

    def test_choose_thetas_rules(self):
        servers = mm1(0.7, 2)
        self.assertEqual(len(choose_thetas(servers, THETA_MAX)), 2)
        self.assertRaises(DomainError, choose_thetas, servers, "median")


class ThinningTestCase(TestCase):

    def test_random_thinning_is_split_poisson(self):
        _, thetas = thinning_bound(Exponential(4.0, INTER_ARRIVAL), [Exponential(1.0)] * 5,
                                   RANDOM, [0.2] * 5)
        self.assertAlmostEqual(thetas[0], 1.0 - 4.0 / 5, places=8)

    def test_round_robin_tighter(self):
        arrival = Exponential(4.0, INTER_ARRIVAL)
        services = [Exponential(1.0)] * 8
        det, det_thetas = thinning_bound(arrival, services, ROUND_ROBIN)
        rnd, rnd_thetas = thinning_bound(arrival, services, RANDOM)
        self.assertGreaterEqual(det_thetas[0], rnd_thetas[0])

    def test_unstable_thinning(self):
        self.assertRaises(StabilityError, thinning_bound, Exponential(4.0, INTER_ARRIVAL),
                          [Exponential(1.0)] * 4, ROUND_ROBIN)


class AllocationTestCase(TestCase):

    def test_capacity_mean(self):
        self.assertEqual(allocate_capacity_mean([1, 1], 2).values, (1.0, 1.0))
        values = allocate_capacity_mean([1, 2], 3).values
        self.assertAlmostEqual(values[0], 1.0)
        self.assertAlmostEqual(values[1], 2.0)
        self.assertRaises(DomainError, allocate_capacity_mean, [1, 0], 3)

    def test_capacity_mean_equalizes_mm1(self):
        mus = [1.0, 2.0, 4.0]
        allocation = allocate_capacity_mean([1 / mu for mu in mus], 3.0)
        rhos = [rho_service(scale_capacity(Exponential(mu), c), 0.2)
                for mu, c in zip(mus, allocation.values)]
        for rho in rhos:
            self.assertAlmostEqual(rho, rhos[0], places=12)

    def test_capacity_tail(self):
        allocation = allocate_capacity_tail([(1.0, 1.0)], (3.0, 2.0), 1.0)
        self.assertAlmostEqual(1 / allocation.values[0], -1 + math.sqrt(5), places=12)
        self.assertAlmostEqual(allocation.values[0], 0.80902, places=5)

    def test_capacity_tail_linear(self):
        allocation = allocate_capacity_tail([(1.5, 0.0)], (2.0, 0.0), 1.0)
        self.assertAlmostEqual(allocation.values[0], 0.75, places=12)

    def test_capacity_tail_residual(self):
        services = [(1.0, 0.5), (2.0, 1.0), (0.5, 3.0)]
        theta, arrival = 0.7, (4.0, 1.0)
        r = arrival[0] - 0.5 * theta * arrival[1]
        allocation = allocate_capacity_tail(services, arrival, theta)
        for (eta, var), c in zip(services, allocation.values):
            self.assertAlmostEqual(eta / c + 0.5 * theta * var / (c * c), r, places=10)

    def test_capacity_tail_symmetric(self):
        values = allocate_capacity_tail([(1.0, 1.0)] * 2, (3.0, 2.0), 1.0).values
        self.assertEqual(values[0], values[1])

    def test_capacity_tail_infeasible(self):
        self.assertRaises(InfeasibleError, allocate_capacity_tail, [(1.0, 1.0)], (1.0, 4.0), 1.0)

    def test_split_rates_mean(self):
        values = split_rates_mean([1, 1], 0.8).values
        self.assertAlmostEqual(values[0], 0.4)
        self.assertAlmostEqual(values[1], 0.4)
        values = split_rates_mean([1, 0.5], 0.6).values
        self.assertAlmostEqual(values[0], 0.4)
        self.assertAlmostEqual(values[1], 0.2)
        self.assertRaises(InfeasibleError, split_rates_mean, [1, 0.5], 1.5)

    def test_split_rates_tail(self):
        allocation = split_rates_tail([1, 0.5], 0.8)
        self.assertAlmostEqual(allocation.values[0], 0.65, places=12)
        self.assertAlmostEqual(allocation.values[1], 0.15, places=12)
        self.assertAlmostEqual(allocation.common_decay, 0.35, places=12)
        self.assertAlmostEqual(sum(allocation.values), 0.8, places=9)

    def test_split_rates_tail_excludes(self):
        allocation = split_rates_tail([1, 0.2], 0.3)
        self.assertEqual(allocation.excluded, frozenset([1]))
        self.assertAlmostEqual(allocation.values[0], 0.3, places=12)
        self.assertEqual(allocation.values[1], 0.0)
        self.assertEqual(allocation.active, [0])

    def test_split_rates_homogeneous(self):
        tail = split_rates_tail([1, 1, 1], 1.2).values
        mean = split_rates_mean([1, 1, 1], 1.2).values
        for a, b in zip(tail, mean):
            self.assertAlmostEqual(a, b, places=12)

    def test_load_balancing_order(self):
        for lam in (0.4, 0.8):
            for mu2 in (0.5, 0.7, 0.9):
                first, _ = load_balancing_bound(lam, [1.0, mu2], 1, 1e-6)
                second, _ = load_balancing_bound(lam, [1.0, mu2], 2, 1e-6)
                self.assertLessEqual(second, first + 1e-9)

    def test_load_balancing_homogeneous(self):
        first, _ = load_balancing_bound(0.8, [1.0, 1.0], 1, 1e-6)
        second, _ = load_balancing_bound(0.8, [1.0, 1.0], "tail", 1e-6)
        self.assertAlmostEqual(first, second, places=9)

    def test_load_balancing_unknown(self):
        self.assertRaises(DomainError, load_balancing_bound, 0.8, [1.0, 1.0], 3, 1e-6)

    def test_capacity_bound(self):
        arrival = Exponential(0.7, INTER_ARRIVAL)
        scaled, _ = capacity_bound(arrival, [Exponential(1.0)], [2.0])
        direct, _ = forkjoin_bound(arrival, [Exponential(2.0)])
        self.assertAlmostEqual(scaled.quantile(1e-6), direct.quantile(1e-6), places=9)


class ExactTailTestCase(TestCase):

    def test_exact(self):
        self.assertEqual(mm1_exact_tail(0.7, 1.0, 0.0), 1.0)
        self.assertAlmostEqual(mm1_exact_tail(0.7, 1.0, 10.0), math.exp(-3.0))
        self.assertRaises(StabilityError, mm1_exact_tail, 1.0, 1.0, 1.0)


def buildTestSuite():
    return unittest.defaultTestLoader.loadTestsFromName(__name__)


def main():
    buildTestSuite()
    unittest.main()

if __name__ == "__main__":
    main()
