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
Data series of the bound figures fig2 .. fig7. Every function returns a
list of ``document.Table``; nothing is plotted.
"""

import logging

from forkbound.bounds import (TailAt, expected_sojourn, forkjoin_servers,
                              load_balancing_bound, mm1_exact_tail,
                              optimize_theta, sojourn_bound, thinning_bound)
from forkbound.default import (FIGURE_PARAMETERS, FIGURES, INTER_ARRIVAL,
                               RANDOM, ROUND_ROBIN, THETA_OPTIMIZE)
from forkbound.distributions import (Deterministic, Exponential, rho_service)
from forkbound.document import Table
from forkbound.envelopes import (KLConfig, envelope_from_iid, kl_quantile,
                                 kl_tail, latency_rate_strategies,
                                 service_theta_max)
from forkbound.errors import DomainError

log = logging.getLogger("forkbound")


def fig2(params=None):
    """
    M|M|1: GI|GI|1 bound at theta = mu - lambda, G|G|1 bound with theta
    optimized per tau, and the exact sojourn tail.
    """
    p = params or FIGURE_PARAMETERS["fig2"]
    mu = p["mu"]
    rows = []
    for lam in p["lambdas"]:
        arrival = Exponential(lam, INTER_ARRIVAL)
        gi = forkjoin_servers(arrival, [Exponential(mu)], iid=True)
        gg1 = forkjoin_servers(arrival, [Exponential(mu)], iid=False)[0]
        gi_bound = sojourn_bound(gi, [mu - lam])
        for tau in p["taus"]:
            theta = optimize_theta(gg1, TailAt(tau))
            rows.append((lam, tau, mm1_exact_tail(lam, mu, tau), gi_bound(tau),
                         sojourn_bound([gg1], [theta])(tau), theta))
    metadata = {"figure": "fig2", "mu": mu, "gi_theta": "mu - lambda",
                "gg1_theta": "optimized per tau"}
    return [Table("fig2", ("lambda", "tau", "exact", "gi_bound", "gg1_bound", "gg1_theta"),
                  rows, metadata)]


def fig3(params=None):
    """
    Expected sojourn and eps-quantile bounds against the number of
    servers k, at theta = mu - lambda.
    """
    p = params or FIGURE_PARAMETERS["fig3"]
    mu, eps = p["mu"], p["eps"]
    rows = []
    for lam in p["lambdas"]:
        arrival = Exponential(lam, INTER_ARRIVAL)
        theta = mu - lam
        rho_s = rho_service(Exponential(mu), theta)
        for k in p["ks"]:
            servers = forkjoin_servers(arrival, [Exponential(mu)] * k)
            bound = sojourn_bound(servers, [theta] * k)
            rows.append((lam, k, theta, expected_sojourn(k, rho_s, theta, 1.0),
                         bound.quantile(eps)))
    metadata = {"figure": "fig3", "mu": mu, "eps": eps, "theta": "mu - lambda"}
    return [Table("fig3", ("lambda", "k", "theta", "expected_bound", "quantile_bound"),
                  rows, metadata)]


def fig4(params=None):
    """
    Round-robin against random thinning of one Poisson stream onto k
    servers, theta optimized for the eps-quantile.
    """
    p = params or FIGURE_PARAMETERS["fig4"]
    lam, mu, eps = p["lambda"], p["mu"], p["eps"]
    arrival = Exponential(lam, INTER_ARRIVAL)
    rows = []
    for k in p["ks"]:
        services = [Exponential(mu)] * k
        random_bound, random_thetas = thinning_bound(
            arrival, services, RANDOM, [1.0 / k] * k, theta_rule=THETA_OPTIMIZE, eps=eps)
        # the random-thinning optimum is admissible for round-robin too
        det_bound, det_thetas = thinning_bound(
            arrival, services, ROUND_ROBIN, theta_rule=THETA_OPTIMIZE, eps=eps,
            candidates=[(t,) for t in random_thetas])
        rows.append((k, det_thetas[0], det_bound.quantile(eps), _expected(det_bound),
                     random_thetas[0], random_bound.quantile(eps), _expected(random_bound)))
    metadata = {"figure": "fig4", "lambda": lam, "mu": mu, "eps": eps,
                "theta": "optimized for the eps-quantile"}
    return [Table("fig4", ("k", "det_theta", "det_quantile", "det_expected",
                           "random_theta", "random_quantile", "random_expected"),
                  rows, metadata)]


def _expected(bound):
    # identical servers leave a single merged term
    (alpha, theta, shift), = bound.terms
    return expected_sojourn(1, shift, theta, alpha)


def fig5(params=None):
    """
    Two heterogeneous M|M|1 servers: equal utilization (strategy 1),
    equal tail decay (strategy 2) and the faster server alone.
    """
    p = params or FIGURE_PARAMETERS["fig5"]
    mu1, eps = p["mu1"], p["eps"]
    rows = []
    for lam in p["lambdas"]:
        single, _ = load_balancing_bound(lam, [mu1], "single", eps)
        for mu2 in p["mu2s"]:
            mus = [mu1, mu2]
            first, _ = load_balancing_bound(lam, mus, 1, eps)
            second, allocation = load_balancing_bound(lam, mus, 2, eps)
            rows.append((lam, mu2, first, second, single, len(allocation.excluded)))
    metadata = {"figure": "fig5", "mu1": mu1, "eps": eps, "theta": "mu_i - lambda_i"}
    return [Table("fig5", ("lambda", "mu2", "strategy1", "strategy2", "single", "excluded"),
                  rows, metadata)]


def fig6(params=None):
    """
    (k,l) fork-join with deterministic arrivals and exponential service:
    tail bounds for fixed (k,l) pairs and quantiles with and without
    redundant servers.
    """
    p = params or FIGURE_PARAMETERS["fig6"]
    d, mu, eps = p["d"], p["mu"], p["eps"]
    arrival = Deterministic(d, INTER_ARRIVAL)
    service = Exponential(mu)
    theta_s = service_theta_max(service, d)
    srv = envelope_from_iid(service, theta_s)
    arr = envelope_from_iid(arrival, theta_s)

    tails = []
    for k, l in p["pairs"]:
        cfg = KLConfig(k, l)
        for tau in p["taus"]:
            tails.append((tau, k, l, kl_tail(cfg, arr, srv, tau)))
    quantiles = []
    for l in p["ls"]:
        for k in (l, l + p["redundancy"]):
            quantiles.append((l, k, kl_quantile(KLConfig(k, l), arr, srv, eps)))
    metadata = {"figure": "fig6", "d": d, "mu": mu, "eps": eps, "theta_s": theta_s}
    return [Table("fig6a", ("tau", "k", "l", "bound"), tails, metadata),
            Table("fig6b", ("l", "k", "quantile"), quantiles, metadata)]


def fig7(params=None):
    """
    Two latency-rate servers: single server, round-robin thinning and
    (2,1) redundancy against the service tail decay kappa.
    """
    p = params or FIGURE_PARAMETERS["fig7"]
    lam, rho_s, eps = p["lambda"], p["rho_s"], p["eps"]
    rows = []
    for kappa in p["kappas"]:
        result = latency_rate_strategies(lam, kappa, eps, rho_s)
        rows.append((kappa, result.single, result.thinned, result.redundant_21))
    metadata = {"figure": "fig7", "lambda": lam, "rho_s": rho_s, "eps": eps,
                "theta_a": "largest with rho_A >= rho_S",
                "thinned": "union over both servers doubles both error terms"}
    return [Table("fig7", ("kappa", "single", "thinned", "redundant_21"), rows, metadata)]


FIGURE_FUNCTIONS = {
    "fig2": fig2,
    "fig3": fig3,
    "fig4": fig4,
    "fig5": fig5,
    "fig6": fig6,
    "fig7": fig7,
}


def run_figure(name):
    """
    Tables of one figure, or of all figures for ``name == "all"``.
    """
    if name == "all":
        tables = []
        for figure in FIGURES:
            tables.extend(run_figure(figure))
        return tables
    if name not in FIGURE_FUNCTIONS:
        raise DomainError("Unknown figure %r" % (name,))
    log.info("computing %s", name)
    return FIGURE_FUNCTIONS[name]()
