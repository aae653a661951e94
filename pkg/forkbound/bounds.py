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
Waiting and sojourn time bounds for fork-join systems with k parallel
FIFO servers.

For every server i with arrival pair (sigma_A, rho_A) and service pair
(sigma_S_i, rho_S_i) and a free theta_i > 0::

    P[T > tau] <= sum_i alpha_i exp(theta_i rho_S_i(theta_i)) exp(-theta_i tau)
    P[W > tau] <= sum_i alpha_i exp(-theta_i tau)

with alpha_i = 1 if arrivals and service are independent increments
(GI|GI|1) and otherwise (G|G|1)::

    alpha_i = exp(theta_i (sigma_A + sigma_S_i)) / (1 - exp(-theta_i (rho_A - rho_S_i)))
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from forkbound.default import (GI_TOLERANCE, INTER_ARRIVAL, QUANTILE_XTOL,
                               ROOT_XTOL, ROUND_ROBIN, STABILITY_MARGIN, THETA_CEILING,
                               THETA_FLOOR_FRACTION, THETA_MAX, THETA_OPTIMIZE)
from forkbound.distributions import (Exponential, arrival_sigma_rho,
                                     deterministic_thinned_sigma_rho,
                                     random_thinned_sigma_rho, scale_capacity,
                                     service_sigma_rho, split_merge_sigma_rho)
from forkbound.errors import (DomainError, InfeasibleError, ShapeError,
                              StabilityError)
from forkbound.util import find_root, minimize_on_interval

log = logging.getLogger("forkbound")

MEAN_BALANCED = "mean"
TAIL_BALANCED = "tail"


class ServerSpec(object):
    """
    One server of a fork-join system: the arrival pair every server sees
    and this server's service pair. ``iid`` selects the GI|GI|1 branch.
    """

    def __init__(self, arrival, service, iid=True):
        self.arrival = arrival
        self.service = service
        self.iid = iid
        self._interval = None

    def gap(self, theta):
        return self.arrival.rho(theta) - self.service.rho(theta)

    @property
    def required_gap(self):
        return -GI_TOLERANCE if self.iid else STABILITY_MARGIN

    def is_admissible(self, theta):
        try:
            return self.gap(theta) >= self.required_gap
        except DomainError:
            return False

    def theta_max(self):
        """
        Largest admissible theta.

        :raises StabilityError: if no theta > 0 is admissible
        """
        return self.admissible_interval()[1]

    def _safe_gap(self, theta):
        try:
            return self.gap(theta)
        except DomainError:
            return -np.inf

    def admissible_interval(self):
        """
        (theta_min, theta_max) with rho_A(-theta) - rho_S(theta) above the
        required gap. The gap is unimodal in theta: non-increasing for a
        single server, rising from -inf first when the service parameter
        carries a ln(k)/theta term (split-merge), so the admissible set can
        start away from 0.

        :raises StabilityError: if no theta > 0 is admissible
        """
        if self._interval is None:
            self._interval = self._find_interval()
        return self._interval

    def _find_interval(self):
        upper = min(self.arrival.theta_max, self.service.theta_max, THETA_CEILING)
        lower = upper * 1e-9
        need = max(self.required_gap, 0.0)
        peak, neg_gap = minimize_on_interval(lambda t: -self.gap(t), lower, upper,
                                             log_grid=True)
        if not -neg_gap >= need:
            raise StabilityError("No admissible theta: max rho_A - rho_S = %.6g at theta=%.6g (%s)"
                                 % (-neg_gap, peak, "GI|GI|1" if self.iid else "G|G|1"))
        if self._safe_gap(upper) >= need:
            hi = upper
        else:
            hi = find_root(lambda t: self.gap(t) - need, peak, upper, xtol=ROOT_XTOL)
            # brentq may land just outside on the G|G|1 branch
            while not self.is_admissible(hi) and hi > peak:
                hi -= ROOT_XTOL * 10
        if self._safe_gap(lower) >= need:
            lo = hi * THETA_FLOOR_FRACTION
        else:
            lo = find_root(lambda t: self.gap(t) - need, lower, peak, xtol=ROOT_XTOL)
            while not self.is_admissible(lo) and lo < peak:
                lo += ROOT_XTOL * 10
        log.debug("admissible theta interval %.10g..%.10g (peak gap %.6g at %.6g)",
                  lo, hi, -neg_gap, peak)
        return lo, hi

    def theta_interval(self):
        return self.admissible_interval()

    def alpha(self, theta):
        if self.iid:
            return 1.0
        return math.exp(self.log_alpha(theta))

    def log_alpha(self, theta):
        if self.iid:
            return 0.0
        gap = self.gap(theta)
        if gap < STABILITY_MARGIN:
            raise StabilityError("G|G|1 branch needs rho_A - rho_S >= %g, got %g at theta=%r"
                                 % (STABILITY_MARGIN, gap, theta))
        burst = theta * (self.arrival.sigma(theta) + self.service.sigma(theta))
        return burst - math.log(-math.expm1(-theta * gap))

    def check(self, theta):
        gap = self.gap(theta)
        if gap < self.required_gap:
            raise StabilityError("theta=%r violates rho_S <= rho_A (gap %.6g)" % (theta, gap))


@dataclass(frozen=True)
class TailBound:
    """
    sum_i alpha_i exp(-theta_i (tau - shift_i)), clamped at 1. Terms with
    the same (theta, shift) are merged on construction.
    """

    terms: tuple
    valid_from: float = 0.0

    def __post_init__(self):
        merged = {}
        for alpha, theta, shift in self.terms:
            if not alpha > 0 or not theta > 0:
                raise DomainError("tail terms need alpha > 0 and theta > 0, got (%r, %r)"
                                  % (alpha, theta))
            key = (float(theta), float(shift))
            merged[key] = merged.get(key, 0.0) + float(alpha)
        object.__setattr__(self, "terms",
                           tuple((a, t, s) for (t, s), a in merged.items()))

    def log_value(self, tau):
        return float(special.logsumexp(
            [math.log(a) - t * (tau - s) for a, t, s in self.terms]))

    def __call__(self, tau):
        return min(1.0, math.exp(min(0.0, self.log_value(tau))))

    def curve(self, taus):
        return np.array([self(t) for t in taus])

    def scaled(self, factor):
        return TailBound(tuple((a * factor, t, s) for a, t, s in self.terms), self.valid_from)

    def _term_quantile(self, term, eps):
        alpha, theta, shift = term
        return shift + (math.log(alpha) - math.log(eps)) / theta

    def quantile(self, eps):
        """
        Smallest tau >= valid_from with bound(tau) <= eps.
        """
        if not 0 < eps < 1:
            raise DomainError("eps must be in (0, 1), got %r" % (eps,))
        if len(self.terms) == 1:
            return max(self.valid_from, self._term_quantile(self.terms[0], eps))
        m = len(self.terms)
        lo = max(self._term_quantile(term, eps) for term in self.terms)
        hi = max(self._term_quantile(term, eps / m) for term in self.terms)
        log_eps = math.log(eps)
        if self.log_value(lo) <= log_eps:
            tau = lo
        else:
            tau = find_root(lambda t: self.log_value(t) - log_eps, lo, hi, xtol=QUANTILE_XTOL)
        return max(self.valid_from, tau)


def _pairs(servers, thetas):
    if len(servers) != len(thetas):
        raise ShapeError("need one theta per server, got %d servers and %d thetas"
                         % (len(servers), len(thetas)))
    if not servers:
        raise ShapeError("need at least one server")
    return zip(servers, thetas)


def sojourn_bound(servers, thetas):
    terms = []
    for server, theta in _pairs(servers, thetas):
        server.check(theta)
        rho_s = server.service.rho(theta)
        terms.append((server.alpha(theta), theta, rho_s))
    return TailBound(tuple(terms))


def waiting_bound(servers, thetas):
    terms = []
    for server, theta in _pairs(servers, thetas):
        server.check(theta)
        terms.append((server.alpha(theta), theta, 0.0))
    return TailBound(tuple(terms))


# =========================================================================
# theta optimization
# =========================================================================

@dataclass(frozen=True)
class TailAt:
    tau: float

    def __call__(self, server, theta, k):
        return (math.log(k) + server.log_alpha(theta)
                + theta * server.service.rho(theta) - theta * self.tau)


@dataclass(frozen=True)
class QuantileAt:
    eps: float

    def __call__(self, server, theta, k):
        return (server.service.rho(theta)
                + (math.log(k) + server.log_alpha(theta) - math.log(self.eps)) / theta)


@dataclass(frozen=True)
class ExpectedSojourn:

    def __call__(self, server, theta, k):
        return server.service.rho(theta) + (math.log(k) + server.log_alpha(theta) + 1.0) / theta


def max_theta(server):
    return server.theta_max()


def optimize_theta(server, objective, k=1, candidates=()):
    """
    theta minimizing the per-server bound term for ``objective`` over the
    admissible interval: log-spaced grid seed plus bounded Brent refinement.
    ``k`` identical servers only shift the objective by ln k.
    """
    lo, hi = server.theta_interval()
    theta, value = minimize_on_interval(
        lambda t: objective(server, t, k), lo, hi, log_grid=True,
        candidates=tuple(candidates) + (hi,))
    if not np.isfinite(value):
        raise StabilityError("No admissible theta gives a finite bound")
    log.debug("optimize_theta %r: theta=%.10g value=%.10g (interval %.4g..%.4g)",
              objective, theta, value, lo, hi)
    return theta


def choose_thetas(servers, rule=THETA_MAX, eps=None, candidates=None):
    if rule == THETA_MAX:
        return [server.theta_max() for server in servers]
    if rule != THETA_OPTIMIZE:
        raise DomainError("Unknown theta rule %r" % (rule,))
    objective = QuantileAt(eps) if eps else ExpectedSojourn()
    k = len(servers)
    candidates = candidates or [()] * k
    return [optimize_theta(server, objective, k, candidates=c)
            for server, c in zip(servers, candidates)]


def expected_sojourn(k, rho_s, theta, alpha):
    """
    E[T] <= rho_S(theta) + (ln(k alpha) + 1) / theta.
    """
    if int(k) != k or k < 1:
        raise DomainError("k must be an integer >= 1, got %r" % (k,))
    if not theta > 0:
        raise DomainError("theta must be > 0, got %r" % (theta,))
    if k * alpha < 1:
        raise DomainError("k alpha must be >= 1, got %r" % (k * alpha,))
    return rho_s + (math.log(k * alpha) + 1.0) / theta


def mm1_exact_tail(lam, mu, tau):
    """
    P[T > tau] of the M|M|1 queue.
    """
    if not 0 < lam < mu:
        raise StabilityError("M|M|1 needs 0 < lambda < mu")
    if tau <= 0:
        return 1.0
    return math.exp(-(mu - lam) * tau)


# =========================================================================
# Systems built from laws
# =========================================================================

def forkjoin_servers(arrival, services, iid=True):
    arrival_pair = arrival_sigma_rho(arrival)
    return [ServerSpec(arrival_pair, service_sigma_rho(s), iid) for s in services]


def forkjoin_bound(arrival, services, iid=True, theta_rule=THETA_MAX, eps=None):
    """
    Sojourn bound of a fork-join system with one arrival law and one
    service law per server; returns (TailBound, thetas).
    """
    servers = forkjoin_servers(arrival, services, iid)
    thetas = choose_thetas(servers, theta_rule, eps)
    return sojourn_bound(servers, thetas), thetas


def splitmerge_bound(arrival, services, iid=True, theta_rule=THETA_MAX, eps=None):
    """
    A split-merge system is a single server with service max_i S_i.
    """
    server = ServerSpec(arrival_sigma_rho(arrival), split_merge_sigma_rho(services), iid)
    thetas = choose_thetas([server], theta_rule, eps)
    return sojourn_bound([server], thetas), thetas


def thinned_servers(arrival, services, mode, p=None, iid=True):
    k = len(services)
    if mode == ROUND_ROBIN:
        pairs = [deterministic_thinned_sigma_rho(arrival, k)] * k
    else:
        p = list(p) if p is not None else [1.0 / k] * k
        if len(p) != k:
            raise ShapeError("need one probability per server")
        pairs = [random_thinned_sigma_rho(arrival, pi) for pi in p]
    return [ServerSpec(a, service_sigma_rho(s), iid) for a, s in zip(pairs, services)]


def thinning_bound(arrival, services, mode, p=None, iid=True, theta_rule=THETA_MAX,
                   eps=None, candidates=None):
    """
    Sojourn bound with resequencing when jobs are routed whole to one of
    k servers, round-robin or at random. Each server sees the thinned
    arrival pair; the in-order departure is a max over servers.
    """
    servers = thinned_servers(arrival, services, mode, p, iid)
    thetas = choose_thetas(servers, theta_rule, eps, candidates)
    return sojourn_bound(servers, thetas), thetas


def capacity_bound(arrival, services, capacities, iid=True, theta_rule=THETA_MAX, eps=None):
    if len(services) != len(capacities):
        raise ShapeError("need one capacity per server")
    scaled = [scale_capacity(s, c) for s, c in zip(services, capacities)]
    return forkjoin_bound(arrival, scaled, iid, theta_rule, eps)


# =========================================================================
# Load balancing
# =========================================================================

@dataclass(frozen=True)
class Allocation:
    values: tuple
    strategy: str
    excluded: frozenset = field(default_factory=frozenset)
    total: float = None
    common_decay: float = None

    @property
    def active(self):
        return [i for i in range(len(self.values)) if i not in self.excluded]


def _positive(values, name):
    values = [float(v) for v in values]
    if not values or any(not v > 0 for v in values):
        raise DomainError("%s must be non-empty and > 0" % name)
    return values


def allocate_capacity_mean(service_means, total_c):
    """
    Capacity proportional to the mean service requirement, so every server
    has the same utilization.
    """
    means = _positive(service_means, "service means")
    if not total_c > 0:
        raise DomainError("total capacity must be > 0")
    s = sum(means)
    return Allocation(tuple(total_c * m / s for m in means), MEAN_BALANCED, total=total_c)


def allocate_capacity_tail(services, arrival, theta):
    """
    Gaussian capacities with identical rho_{S_i/c_i}(theta) = R where
    R = eta_A - theta var_A / 2. With x = 1/c the condition is
    (theta var/2) x^2 + eta x - R = 0.

    :param services: list of (eta_i, var_i)
    :param arrival: (eta_A, var_A)
    """
    eta_a, var_a = arrival
    r = eta_a - 0.5 * theta * var_a
    if not r > 0:
        raise InfeasibleError("eta_A - theta var_A / 2 = %r <= 0" % r)
    values = []
    for eta, var in services:
        if not eta > 0 or var < 0:
            raise DomainError("need eta > 0 and var >= 0, got (%r, %r)" % (eta, var))
        # positive root, written without cancellation
        c = (eta + math.sqrt(eta * eta + 2.0 * theta * var * r)) / (2.0 * r)
        values.append(c)
    return Allocation(tuple(values), TAIL_BALANCED, total=sum(values))


def _check_rates(mus, lam):
    mus = _positive(mus, "service rates")
    if not lam > 0:
        raise DomainError("lambda must be > 0")
    if lam >= sum(mus):
        raise InfeasibleError("lambda=%r >= sum of service rates %r" % (lam, sum(mus)))
    return mus


def split_rates_mean(mus, lam):
    mus = _check_rates(mus, lam)
    s = sum(mus)
    return Allocation(tuple(lam * mu / s for mu in mus), MEAN_BALANCED, total=lam)


def split_rates_tail(mus, lam):
    """
    Water-filling: all active servers get the same decay mu_i - lambda_i;
    servers that would receive a negative rate are excluded and the step
    repeats.
    """
    mus = _check_rates(mus, lam)
    active = list(range(len(mus)))
    while True:
        decay = (sum(mus[i] for i in active) - lam) / len(active)
        negative = [i for i in active if mus[i] - decay < 0]
        if not negative:
            break
        active = [i for i in active if i not in negative]
    values = [0.0] * len(mus)
    for i in active:
        values[i] = mus[i] - decay
    excluded = frozenset(i for i in range(len(mus)) if i not in active)
    return Allocation(tuple(values), TAIL_BALANCED, excluded, total=lam, common_decay=decay)


def rate_split_bound(mus, allocation):
    """
    Sojourn bound after random splitting of a Poisson stream: server i is
    an M|M|1 queue with rate lambda_i and theta_i = mu_i - lambda_i.
    Excluded servers receive no jobs and drop out of the sum.
    """
    servers = []
    for i in allocation.active:
        if allocation.values[i] <= 0:
            continue
        arrival = Exponential(allocation.values[i], INTER_ARRIVAL)
        servers.extend(forkjoin_servers(arrival, [Exponential(mus[i])]))
    if not servers:
        raise InfeasibleError("allocation routes no jobs")
    return sojourn_bound(servers, [s.theta_max() for s in servers])


def load_balancing_bound(lam, mus, strategy, eps):
    """
    Sojourn quantile of rate-splitting strategy 1 (equal utilization),
    2 (equal decay) or "single" (everything to server 0).
    """
    if strategy == "single":
        bound = rate_split_bound(mus[:1], Allocation((lam,), "single", total=lam))
        return bound.quantile(eps), None
    if strategy in (1, MEAN_BALANCED):
        allocation = split_rates_mean(mus, lam)
    elif strategy in (2, TAIL_BALANCED):
        allocation = split_rates_tail(mus, lam)
    else:
        raise DomainError("Unknown strategy %r" % (strategy,))
    return rate_split_bound(mus, allocation).quantile(eps), allocation
