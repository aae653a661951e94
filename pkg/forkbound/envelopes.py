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
Statistical sample-path envelopes.

An arrival envelope (rho_A, eps_A) states that
``P[max_nu {rho_A (n - nu) - A(nu, n)} > tau] <= eps_A(tau)``, a service
envelope (rho_S, eps_S) the symmetric statement for cumulative service.
Together they give ``P[T > tau_A + tau_S + rho_S] <= eps_A(tau_A) + eps_S(tau_S)``.
"""

import logging
import math
from collections import namedtuple
from dataclasses import dataclass

from scipy.special import comb as nchoosek

from forkbound.default import (ARRIVAL_LOWER, DETERMINISTIC, DOMAIN_EPSILON,
                               INTER_ARRIVAL,
                               QUANTILE_XTOL, ROOT_XTOL, SERVICE_TIME,
                               SERVICE_UPPER, THETA_CEILING, THETA_FLOOR_FRACTION)
from forkbound.distributions import (Exponential, rho_arrival, rho_service,
                                     thin_deterministic)
from forkbound.errors import (DomainError, IndependenceError, InfeasibleError,
                              StabilityError)
from forkbound.util import find_root, minimize_on_interval

log = logging.getLogger("forkbound")

ARRIVAL = ARRIVAL_LOWER
SERVICE = SERVICE_UPPER

EnvelopeSplit = namedtuple("EnvelopeSplit", "tau fraction tau_a tau_s")


class Envelope(object):
    """
    A rate (time per job) and a non-increasing error profile.

    Exponential profiles ``min(1, prefactor exp(-decay tau))`` are kept in
    closed form; ``prefactor == 0`` is the degenerate envelope of a
    deterministic process. Any other profile is given as a callable.
    """

    def __init__(self, direction, rate, decay=None, prefactor=1.0, profile=None):
        if direction not in (ARRIVAL, SERVICE):
            raise DomainError("Unknown envelope direction %r" % (direction,))
        if not rate > 0:
            raise DomainError("envelope rate must be > 0, got %r" % (rate,))
        if profile is None and prefactor > 0 and not (decay and decay > 0):
            raise DomainError("exponential profile needs a decay > 0")
        self.direction = direction
        self.rate = rate
        self.decay = decay
        self.prefactor = prefactor
        self._profile = profile

    @property
    def degenerate(self):
        return self._profile is None and self.prefactor == 0

    @property
    def exponential(self):
        return self._profile is None and self.prefactor > 0

    def raw(self, tau):
        """
        Unclamped profile value.
        """
        if self._profile is not None:
            return self._profile(tau)
        if self.prefactor == 0:
            return 0.0
        return self.prefactor * math.exp(-self.decay * tau)

    def error(self, tau):
        return min(1.0, self.raw(max(0.0, tau)))

    __call__ = error

    def slack(self, eps):
        """
        Smallest tau >= 0 with error(tau) <= eps.
        """
        if not eps > 0:
            raise DomainError("eps must be > 0, got %r" % (eps,))
        if self.degenerate:
            return 0.0
        if self.exponential:
            return max(0.0, math.log(self.prefactor / eps) / self.decay)
        if self.raw(0.0) <= eps:
            return 0.0
        hi = 1.0
        while self.raw(hi) > eps:
            hi *= 2.0
            if hi > 1e12:
                raise InfeasibleError("error profile never drops below %r" % eps)
        return find_root(lambda t: self.raw(t) - eps, 0.0, hi, xtol=QUANTILE_XTOL)

    def __repr__(self):
        if self.degenerate:
            return "<Envelope %s rate=%.6g degenerate>" % (self.direction, self.rate)
        if self.exponential:
            return "<Envelope %s rate=%.6g %.4g*exp(-%.6g tau)>" % (
                self.direction, self.rate, self.prefactor, self.decay)
        return "<Envelope %s rate=%.6g profile=%r>" % (self.direction, self.rate, self._profile)


def envelope_from_iid(dist, theta, scale=1):
    """
    Envelope of a process with iid increments: rate rho_A(-theta) or
    rho_S(theta), profile exp(-theta tau). Deterministic laws give the
    degenerate envelope. ``scale`` > 1 builds the arrival envelope of
    round-robin thinning to every scale-th job.
    """
    if dist.role == INTER_ARRIVAL:
        rate = thin_deterministic(dist, scale, theta)
        direction = ARRIVAL
    elif dist.role == SERVICE_TIME:
        rate = rho_service(dist, theta)
        direction = SERVICE
    else:
        raise DomainError("Unknown role %r" % (dist.role,))
    prefactor = 0.0 if dist.kind == DETERMINISTIC else 1.0
    return Envelope(direction, rate, decay=theta, prefactor=prefactor)


def _check_pair(arr, srv):
    if arr.direction != ARRIVAL or srv.direction != SERVICE:
        raise DomainError("need an arrival and a service envelope")
    if srv.rate > arr.rate * (1 + 1e-12):
        raise InfeasibleError("service rate parameter %.6g exceeds arrival rate parameter %.6g"
                              % (srv.rate, arr.rate))


def envelope_split(arr, srv, eps):
    """
    Best split of eps between the arrival and the service profile;
    returns (tau, fraction, tau_A, tau_S) where ``fraction`` goes to the
    arrival side.
    """
    if not 0 < eps < 1:
        raise DomainError("eps must be in (0, 1), got %r" % (eps,))
    _check_pair(arr, srv)
    if arr.degenerate or srv.degenerate:
        fraction = 0.0 if arr.degenerate else 1.0
        tau_a = 0.0 if arr.degenerate else arr.slack(eps)
        tau_s = 0.0 if srv.degenerate else srv.slack(eps)
        return EnvelopeSplit(tau_a + tau_s + srv.rate, fraction, tau_a, tau_s)

    def total(f):
        return arr.slack(f * eps) + srv.slack((1.0 - f) * eps)

    candidates = [0.5]
    if arr.exponential and srv.exponential:
        candidates.append(srv.decay / (srv.decay + arr.decay))
    f, value = minimize_on_interval(total, 1e-9, 1 - 1e-9, candidates=candidates)
    tau_a = arr.slack(f * eps)
    tau_s = srv.slack((1.0 - f) * eps)
    return EnvelopeSplit(tau_a + tau_s + srv.rate, f, tau_a, tau_s)


def sojourn_bound_envelopes(arr, srv, eps):
    """
    Sojourn time quantile min tau_A + tau_S + rho_S subject to
    eps_A(tau_A) + eps_S(tau_S) <= eps.
    """
    return envelope_split(arr, srv, eps).tau


def envelope_tail(arr, srv, tau):
    """
    Smallest violation probability bound at ``tau``, optimized over how
    the slack tau - rho_S is divided between the two profiles.
    """
    _check_pair(arr, srv)
    budget = tau - srv.rate
    if budget <= 0:
        return 1.0
    if arr.degenerate:
        return srv.error(budget)
    if srv.degenerate:
        return arr.error(budget)
    _, value = minimize_on_interval(lambda x: arr.raw(x) + srv.raw(budget - x), 0.0, budget)
    return min(1.0, value)


# =========================================================================
# (k,l) fork-join
# =========================================================================

@dataclass(frozen=True)
class KLConfig:
    k: int
    l: int
    independent: bool = True

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError("k must be an integer >= 1, got %r" % (self.k,))
        if int(self.l) != self.l or not 1 <= self.l <= self.k:
            raise DomainError("l must satisfy 1 <= l <= k, got l=%r, k=%r" % (self.l, self.k))


def kl_error_profile(cfg, p):
    """
    Probability that fewer than l of k independent servers meet their
    envelope when each fails with probability p:
    sum_{j<l} C(k,j) (1-p)^j p^(k-j).
    """
    if not cfg.independent:
        raise IndependenceError("the binomial (k,l) profile needs independent servers;"
                                " use the union bound k*p with l=k instead")
    if not 0 <= p <= 1:
        raise DomainError("p must be in [0, 1], got %r" % (p,))
    k, l = cfg.k, cfg.l
    if l == k:
        return -math.expm1(k * math.log1p(-p)) if p < 1 else 1.0
    total = 0.0
    for j in range(l):
        total += nchoosek(k, j) * (1.0 - p) ** j * p ** (k - j)
    return min(1.0, total)


def forkjoin_stage_profile(k, srv_profile, independent=True, l=None):
    """
    Error profile of k parallel servers that each satisfy ``srv_profile``:
    the union bound k eps_S without independence, otherwise the binomial
    (k,l) profile with p = eps_S(tau).
    """
    l = k if l is None else l
    if not independent and l < k:
        raise IndependenceError("(k,l)=(%d,%d) needs independent servers" % (k, l))
    cfg = KLConfig(k, l, independent)
    if k == 1:
        return srv_profile
    if not independent:
        return lambda tau: k * srv_profile(tau)
    return lambda tau: kl_error_profile(cfg, min(1.0, srv_profile(tau)))


def stage_envelope(k, srv, independent=True, l=None):
    """
    Service envelope of a fork-join stage built from the per-server
    envelope ``srv``.
    """
    l = k if l is None else l
    if k == 1 or srv.degenerate:
        return srv
    if not independent and l == k and srv.exponential:
        return Envelope(SERVICE, srv.rate, decay=srv.decay, prefactor=k * srv.prefactor)
    return Envelope(SERVICE, srv.rate,
                    profile=forkjoin_stage_profile(k, srv.raw, independent, l))


def kl_quantile(cfg, arr, srv, eps):
    """
    Sojourn quantile of a (k,l) fork-join system with per-server
    envelope ``srv``.
    """
    return sojourn_bound_envelopes(arr, stage_envelope(cfg.k, srv, cfg.independent, cfg.l), eps)


def kl_tail(cfg, arr, srv, tau):
    return envelope_tail(arr, stage_envelope(cfg.k, srv, cfg.independent, cfg.l), tau)


# =========================================================================
# Parameter choice
# =========================================================================

def arrival_theta_for_rate(arrival, target, scale=1):
    """
    Largest theta with scale * rho_A(-theta) >= target. rho_A(-theta)
    decreases from the mean, so larger theta means a tighter profile at the
    price of a smaller rate.
    """
    def excess(theta):
        return thin_deterministic(arrival, scale, theta) - target

    if scale * arrival.expectation() < target * (1 + 1e-12):
        raise StabilityError("mean inter-arrival time %.6g below the service rate %.6g"
                             % (scale * arrival.expectation(), target))
    if excess(THETA_CEILING) >= 0:
        return THETA_CEILING
    lower = THETA_CEILING * 1e-12
    if excess(lower) < 0:
        raise StabilityError("no theta > 0 keeps the arrival rate above %.6g" % target)
    theta = find_root(excess, lower, THETA_CEILING, xtol=ROOT_XTOL)
    while excess(theta) < 0 and theta > lower:
        theta -= ROOT_XTOL * 10
    return theta


def service_theta_max(service, rate_cap):
    """
    Largest theta in the service MGF domain with rho_S(theta) <= rate_cap.
    """
    upper = min(service.theta_max - 2 * DOMAIN_EPSILON, THETA_CEILING)
    lower = upper * 1e-9
    if rho_service(service, lower) > rate_cap:
        raise StabilityError("mean service time %.6g exceeds %.6g" % (service.expectation(), rate_cap))
    if rho_service(service, upper) <= rate_cap:
        return upper
    theta = find_root(lambda t: rho_service(service, t) - rate_cap, lower, upper, xtol=ROOT_XTOL)
    while rho_service(service, theta) > rate_cap and theta > lower:
        theta -= ROOT_XTOL * 10
    return theta


EnvelopeChoice = namedtuple("EnvelopeChoice", "tau theta_a theta_s arrival service fraction")


def envelopes_at(arrival, service, theta_s, stage=None, scale=1):
    """
    Arrival and (stage) service envelopes for a given theta_S, with
    theta_A tied to the largest value keeping rho_A(-theta_A) >= rho_S.
    """
    srv = envelope_from_iid(service, theta_s)
    theta_a = arrival_theta_for_rate(arrival, srv.rate, scale)
    arr = envelope_from_iid(arrival, theta_a, scale)
    if stage is not None:
        srv = stage(srv)
    return arr, srv, theta_a


def optimize_envelopes(arrival, service, eps, stage=None, scale=1, theta_s=None):
    """
    Choose theta_S (and with it theta_A) minimizing the envelope sojourn
    quantile. ``stage`` maps the per-server service envelope to the
    envelope actually used, e.g. a (k,l) aggregation.
    """
    def evaluate(t):
        arr, srv, _ = envelopes_at(arrival, service, t, stage, scale)
        return sojourn_bound_envelopes(arr, srv, eps)

    if theta_s is None:
        hi = service_theta_max(service, scale * arrival.expectation())
        theta_s, value = minimize_on_interval(evaluate, hi * THETA_FLOOR_FRACTION, hi,
                                              log_grid=True, candidates=(hi,))
        if not math.isfinite(value):
            raise InfeasibleError("no admissible envelope parameters")
    arr, srv, theta_a = envelopes_at(arrival, service, theta_s, stage, scale)
    split = envelope_split(arr, srv, eps)
    log.debug("optimize_envelopes: theta_S=%.8g theta_A=%.8g tau=%.8g", theta_s, theta_a, split.tau)
    return EnvelopeChoice(split.tau, theta_a, theta_s, arr, srv, split.fraction)


# =========================================================================
# Latency-rate servers
# =========================================================================

@dataclass(frozen=True)
class LatencyRateServer:
    rate_inverse: float
    decay: float

    def __post_init__(self):
        if not self.rate_inverse > 0 or not self.decay > 0:
            raise DomainError("latency-rate server needs rho_S > 0 and kappa > 0")

    def envelope(self, prefactor=1.0):
        return Envelope(SERVICE, self.rate_inverse, decay=self.decay, prefactor=prefactor)


LatencyRateResult = namedtuple("LatencyRateResult", "single thinned redundant_21")


def latency_rate_strategies(lam, kappa, eps, rho_s=1.0):
    """
    Sojourn quantiles of three ways to use two latency-rate servers:
    one server alone, round-robin thinning over both with resequencing,
    and (2,1) redundancy where every job goes to both and the first copy
    wins.
    """
    arrival = Exponential(lam, INTER_ARRIVAL)
    server = LatencyRateServer(rho_s, kappa)

    theta_a = arrival_theta_for_rate(arrival, rho_s)
    arr = envelope_from_iid(arrival, theta_a)
    single = sojourn_bound_envelopes(arr, server.envelope(), eps)

    # each server sees every other job; the union over both servers
    # doubles both error terms
    theta_thin = arrival_theta_for_rate(arrival, rho_s, scale=2)
    arr_thin = Envelope(ARRIVAL, 2 * rho_arrival(arrival, theta_thin), decay=theta_thin,
                        prefactor=2.0)
    thinned = sojourn_bound_envelopes(arr_thin, server.envelope(prefactor=2.0), eps)

    redundant = sojourn_bound_envelopes(
        arr, stage_envelope(2, server.envelope(), independent=True, l=1), eps)

    log.debug("latency-rate kappa=%.6g: theta_A=%.6g, theta_A(thinned)=%.6g", kappa, theta_a,
              theta_thin)
    return LatencyRateResult(single, thinned, redundant)
