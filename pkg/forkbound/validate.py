# -*- coding: utf-8 -*-

# Copyright 2026 The forkbound authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Release validation: analytic identities of every module plus simulation
cross-checks that every bound dominates the empirical tail.

``fault`` multiplies every analytic bound used in a dominance check; the
value 0.5 is a negative control that must make the run fail.
"""

import logging
import math
import time
from collections import namedtuple

import numpy as np
from scipy import optimize

from forkbound.bounds import (forkjoin_servers, load_balancing_bound,
                              expected_sojourn, mm1_exact_tail, sojourn_bound,
                              thinning_bound, waiting_bound)
from forkbound.default import (CI_BATCHES, INTER_ARRIVAL, RANDOM,
                               ROUND_ROBIN, THETA_OPTIMIZE)
from forkbound.distributions import (Deterministic, Exponential, rho_arrival,
                                     rho_service)
from forkbound.document import Table
from forkbound.envelopes import (KLConfig, envelope_from_iid, kl_error_profile,
                                 kl_tail, latency_rate_strategies,
                                 service_theta_max)
from forkbound.figures import fig4
from forkbound.multistage import (NetworkTemplate, e2e_search, scaling_curve)
from forkbound.simulator import (departures_bruteforce, departures_recursive,
                                 envelope_violation_rate, make_workload,
                                 serve_fifo, sim_forkjoin, sim_kl,
                                 sim_multistage, sim_splitmerge, sim_thinning,
                                 stream, supermartingale_check)

log = logging.getLogger("forkbound")

ValidationConfig = namedtuple("ValidationConfig", "seed quick fault")

CHECKS = []


def check(name):
    def register(func):
        CHECKS.append((name, func))
        return func
    return register


def _jobs(cfg, full=1000000, quick=200000):
    return quick if cfg.quick else full


def _dominates(rows, bound, fault):
    """
    rows of (tau, p, half); returns (ok, worst detail).
    """
    worst = None
    ok = True
    for tau, p, half in rows:
        b = fault * bound(tau)
        if p > b + half:
            ok = False
        margin = b + half - p
        if worst is None or margin < worst[1]:
            worst = (tau, margin, p, b)
    detail = "worst tau=%g: empirical %.4g vs bound %.4g" % (worst[0], worst[2], worst[3])
    return ok, detail


def _tail_rows(result, taus, batches=None):
    return [(tau,) + result.empirical_tail(tau, batches) for tau in taus]


@check("mm1-ratio")
def check_mm1_ratio(cfg):
    bound = sojourn_bound(forkjoin_servers(Exponential(0.7, INTER_ARRIVAL), [Exponential(1.0)]),
                          [0.3])
    # unclamped: the bound exceeds 1 below tau = ln(mu/lambda) / (mu - lambda)
    ratios = [math.exp(bound.log_value(t)) / mm1_exact_tail(0.7, 1.0, t) for t in range(1, 60)]
    error = max(abs(r - 1 / 0.7) for r in ratios)
    return error < 1e-12, "max |ratio - 1/0.7| = %.3g" % error


@check("mm1-simulation")
def check_mm1_simulation(cfg):
    arrival = Exponential(0.7, INTER_ARRIVAL)
    bound = sojourn_bound(forkjoin_servers(arrival, [Exponential(1.0)]), [0.3])
    result = sim_forkjoin(make_workload(arrival, [Exponential(1.0)], _jobs(cfg), cfg.seed))
    taus = (5.0, 10.0, 15.0, 20.0)
    rows = _tail_rows(result, taus)
    ok, detail = _dominates(rows, bound, cfg.fault)
    slope = np.polyfit(taus, [math.log(max(p, 1e-300)) for _, p, _ in rows], 1)[0]
    tolerance = 0.05 if cfg.quick else 0.02
    ok = ok and abs(slope + 0.3) <= tolerance
    return ok, "%s; log-slope %.4f" % (detail, slope)


@check("waiting-bound")
def check_waiting(cfg):
    arrival = Exponential(0.7, INTER_ARRIVAL)
    services = [Exponential(1.0)] * 2
    bound = waiting_bound(forkjoin_servers(arrival, services), [0.3, 0.3])
    result = sim_forkjoin(make_workload(arrival, services, _jobs(cfg), cfg.seed))
    waitings = result.waitings[result.warmup_discard:]
    rows = []
    for tau in (2.0, 5.0, 10.0, 15.0):
        p = float(np.count_nonzero(waitings > tau)) / len(waitings)
        rows.append((tau, p, 3.0 * math.sqrt(p * (1.0 - p) / len(waitings))))
    return _dominates(rows, bound, cfg.fault)


@check("ln-k-growth")
def check_ln_k(cfg):
    arrival = Exponential(0.5, INTER_ARRIVAL)
    theta = 0.5

    def quantile(k):
        servers = forkjoin_servers(arrival, [Exponential(1.0)] * k)
        return sojourn_bound(servers, [theta] * k).quantile(1e-6)

    base = quantile(1)
    error = max(abs(quantile(k) - base - math.log(k) / theta) for k in (2, 4, 8, 16))
    mean4 = expected_sojourn(4, rho_service(Exponential(1.0), theta), theta, 1.0)
    ok = error < 1e-9 and abs(mean4 - 6.158883) < 1e-6
    return ok, "max deviation %.3g; E[T] bound at k=4 = %.7f" % (error, mean4)


@check("thinning-dominance")
def check_thinning_dominance(cfg):
    rows = fig4()[0].rows
    bad = [k for k, _, det, _, _, rnd, _ in rows
           if not (math.isfinite(det) and math.isfinite(rnd) and det <= rnd + 1e-9)]
    return not bad, "violations at k=%s" % bad if bad else "%d values of k" % len(rows)


@check("thinning-simulation")
def check_thinning_simulation(cfg):
    arrival = Exponential(4.0, INTER_ARRIVAL)
    k = 6
    services = [Exponential(1.0)] * k
    taus = (20.0, 40.0)
    details = []
    ok = True
    for mode, p in ((ROUND_ROBIN, None), (RANDOM, [1.0 / k] * k)):
        bound, _ = thinning_bound(arrival, services, mode, p, theta_rule=THETA_OPTIMIZE, eps=1e-3)
        result = sim_thinning(arrival, services, mode, 1000000, cfg.seed, p)
        good, detail = _dominates(_tail_rows(result, taus, CI_BATCHES), bound, cfg.fault)
        ok = ok and good
        details.append("%s: %s" % (mode, detail))
    return ok, "; ".join(details)


@check("load-balancing")
def check_load_balancing(cfg):
    ok = True
    worst = 0.0
    for lam in (0.4, 0.8):
        singles = []
        for mu2 in (0.5, 0.75, 1.0):
            first, _ = load_balancing_bound(lam, [1.0, mu2], 1, 1e-6)
            second, _ = load_balancing_bound(lam, [1.0, mu2], 2, 1e-6)
            singles.append(load_balancing_bound(lam, [1.0, mu2], "single", 1e-6)[0])
            ok = ok and second <= first + 1e-9
            if mu2 == 1.0:
                ok = ok and abs(first - second) <= 1e-9
            worst = max(worst, second - first)
        ok = ok and max(singles) - min(singles) <= 1e-12
    return ok, "max strategy2 - strategy1 = %.3g" % worst


def _dm1():
    arrival = Deterministic(1.25, INTER_ARRIVAL)
    service = Exponential(1.0)
    theta = service_theta_max(service, 1.25)
    return arrival, service, theta


def _dm1_root():
    # (1/theta) ln(1 / (1 - theta)) = d for Exp(1) service, d = 1.25
    return optimize.brentq(lambda t: -math.log1p(-t) / t - 1.25, 1e-6, 1.0 - 1e-9, xtol=1e-15)


@check("kl-profiles")
def check_kl_profiles(cfg):
    error = 0.0
    for k in range(1, 21):
        for p in np.linspace(0.0, 1.0, 11):
            error = max(error, abs(kl_error_profile(KLConfig(k, 1), p) - p ** k),
                        abs(kl_error_profile(KLConfig(k, k), p) - (1 - (1 - p) ** k)))
    _, _, theta = _dm1()
    redundancy = all(kl_error_profile(KLConfig(15, 10), math.exp(-theta * t))
                     < kl_error_profile(KLConfig(10, 10), math.exp(-theta * t))
                     for t in np.linspace(0.1, 50, 100))
    ok = error < 1e-12 and redundancy and abs(theta - _dm1_root()) < 1e-9
    return ok, "identity error %.3g; theta_S %.6f" % (error, theta)


@check("kl-simulation")
def check_kl_simulation(cfg):
    arrival, service, theta = _dm1()
    cfg_kl = KLConfig(15, 10)
    arr = envelope_from_iid(arrival, theta)
    srv = envelope_from_iid(service, theta)
    w = make_workload(arrival, [service] * 15, _jobs(cfg), cfg.seed)
    result = sim_kl(w, 10)
    return _dominates(_tail_rows(result, (5.0, 10.0, 15.0)),
                      lambda tau: kl_tail(cfg_kl, arr, srv, tau), cfg.fault)


@check("latency-rate-crossover")
def check_latency_rate(cfg):
    low = latency_rate_strategies(0.7, 0.01, 1e-6)
    high = latency_rate_strategies(0.7, 1000.0, 1e-6)
    ok = low.redundant_21 < low.thinned and high.thinned < high.redundant_21
    return ok, "kappa=0.01: %s; kappa=1000: %s" % (
        ", ".join("%.4g" % v for v in low), ", ".join("%.4g" % v for v in high))


@check("multistage-scaling")
def check_multistage_scaling(cfg):
    arrival = Exponential(0.7, INTER_ARRIVAL)
    worst = 1.0
    for k in (2, 4):
        template = NetworkTemplate(1, k, arrival, Exponential(1.0))
        net, _ = e2e_search(template, 1e-3)
        curve = scaling_curve(net, (1, 2, 4, 8, 16), 1e-3)
        worst = min(worst, curve.r_squared)
    return worst > 0.99, "min R^2 %.6f" % worst


@check("multistage-simulation")
def check_multistage_simulation(cfg):
    arrival = Exponential(0.7, INTER_ARRIVAL)
    _, bound = e2e_search(NetworkTemplate(4, 2, arrival, Exponential(1.0)), 1e-3)
    result = sim_multistage(4, 2, arrival, Exponential(1.0), _jobs(cfg), cfg.seed)
    empirical = result.empirical_quantile(max(1e-3, 10.0 / len(result.samples)))
    return empirical <= cfg.fault * bound, "empirical %.4g vs bound %.4g" % (
        empirical, cfg.fault * bound)


@check("fifo-oracle")
def check_oracle(cfg):
    rng = stream(cfg.seed, 9)
    error = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 11))
        arrivals = np.cumsum(rng.exponential(1.0, n))
        services = rng.exponential(1.0, n)
        fast = serve_fifo(arrivals, services)
        error = max(error, float(np.max(np.abs(fast - departures_bruteforce(arrivals, services)))),
                    float(np.max(np.abs(fast - departures_recursive(arrivals, services)))))
    return error <= 1e-12, "max deviation %.3g" % error


@check("supermartingale")
def check_supermartingale(cfg):
    rows = supermartingale_check(Exponential(0.5, INTER_ARRIVAL), Exponential(1.0), 0.5, 21,
                                 20000 if cfg.quick else 100000, cfg.seed)
    bad = [r.m for prev, r in zip(rows, rows[1:]) if r.mean_u > prev.mean_u + 3 * r.diff_stderr]
    return not bad, "increases at m=%s" % bad if bad else "E[U(1)]=%.4f" % rows[0].mean_u


@check("splitmerge-dominance")
def check_splitmerge(cfg):
    arrival = Exponential(0.5, INTER_ARRIVAL)
    services = [Exponential(1.0)] * 3
    count = 200 if cfg.quick else 1000
    for i in range(count):
        w = make_workload(arrival, services, 50, cfg.seed * 100003 + i)
        if np.any(sim_splitmerge(w).sojourns < sim_forkjoin(w).sojourns - 1e-12):
            return False, "split-merge faster than fork-join on workload %d" % i
    return True, "%d workloads" % count


@check("envelope-validity")
def check_envelope_validity(cfg):
    arrival = Exponential(1.0, INTER_ARRIVAL)
    theta = 0.5
    rate = rho_arrival(arrival, theta)
    paths = 20000 if cfg.quick else 100000
    ok = True
    details = []
    for tau in (1.0, 3.0, 6.0):
        p, se = envelope_violation_rate(arrival, rate, tau, paths, 200, cfg.seed)
        bound = cfg.fault * math.exp(-theta * tau)
        ok = ok and p <= bound + 3 * se
        details.append("tau=%g: %.4g vs %.4g" % (tau, p, bound))
    return ok, "; ".join(details)


@check("determinism")
def check_determinism(cfg):
    arrival = Exponential(0.7, INTER_ARRIVAL)
    first = sim_forkjoin(make_workload(arrival, [Exponential(1.0)] * 2, 5000, cfg.seed))
    second = sim_forkjoin(make_workload(arrival, [Exponential(1.0)] * 2, 5000, cfg.seed))
    return bool(np.array_equal(first.sojourns, second.sojourns)), "5000 jobs, k=2"


def run_validate(seed=1, quick=False, inject_fault=False, context=None):
    """
    Run every check; returns (all passed, Table of check, status, detail).
    """
    cfg = ValidationConfig(seed, quick, 0.5 if inject_fault else 1.0)
    rows = []
    passed = True
    for name, func in CHECKS:
        started = time.time()
        try:
            ok, detail = func(cfg)
        except Exception as e:
            ok, detail = False, "%s: %s" % (e.__class__.__name__, e)
            log.exception("check %s raised", name)
        status = "pass" if ok else "FAIL"
        if not ok and context is not None:
            log.error(context.error("check %s failed: %s", name, detail))
        log.info("%s %s (%.1fs) %s", status, name, time.time() - started, detail)
        passed = passed and ok
        rows.append((name, status, detail))
    metadata = {"seed": seed, "quick": quick, "fault": cfg.fault}
    return passed, Table("validate", ("check", "status", "detail"), rows, metadata)
