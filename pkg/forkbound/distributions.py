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
Parametric inter-arrival and service-time laws, their moment generating
functions and the (sigma, rho) parameters derived from them.

All MGFs are closed form. For a law X and theta > 0 the arrival rate
parameter is ``rho_A(-theta) = -(1/theta) ln E[exp(-theta X)]`` and the
service rate parameter is ``rho_S(theta) = (1/theta) ln E[exp(theta X)]``.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from forkbound.default import (ALIASES, ARRIVAL_LOWER, DETERMINISTIC,
                               DISTRIBUTIONS, DOMAIN_EPSILON, ERLANG,
                               EXPONENTIAL, GAUSSIAN, INT, INTER_ARRIVAL,
                               MONOTONE_TOLERANCE, MUST, SERVICE_TIME,
                               SERVICE_UPPER)
from forkbound.errors import DomainError, ParseError
from forkbound.util import get_float, get_int

log = logging.getLogger("forkbound")


@dataclass(frozen=True)
class DistributionSpec:
    """
    A parametric law. ``rate`` is used by exponential and Erlang laws,
    ``shape`` by Erlang, ``d`` by deterministic and ``mean``/``var`` by
    Gaussian laws.
    """

    kind: str
    role: str
    rate: float = None
    shape: int = None
    d: float = None
    mean: float = None
    var: float = None

    def __post_init__(self):
        if self.role not in (INTER_ARRIVAL, SERVICE_TIME):
            raise DomainError("Unknown role %r" % (self.role,))
        if self.kind in (EXPONENTIAL, ERLANG):
            if self.rate is None or not self.rate > 0:
                raise DomainError("%s needs a rate > 0, got %r" % (self.kind, self.rate))
            if self.kind == ERLANG and (self.shape is None or int(self.shape) != self.shape
                                        or self.shape < 1):
                raise DomainError("erlang needs an integer shape k >= 1, got %r" % (self.shape,))
        elif self.kind == DETERMINISTIC:
            if self.d is None or not self.d >= 0:
                raise DomainError("det needs d >= 0, got %r" % (self.d,))
        elif self.kind == GAUSSIAN:
            if self.mean is None:
                raise DomainError("gauss needs a mean")
            if self.var is None or not self.var >= 0:
                raise DomainError("gauss needs var >= 0, got %r" % (self.var,))
        else:
            raise DomainError("Unknown distribution kind %r" % (self.kind,))

    @property
    def theta_max(self):
        """
        Supremum of the MGF domain (exclusive); inf if the MGF exists for
        every theta.
        """
        if self.kind in (EXPONENTIAL, ERLANG):
            return self.rate
        return math.inf

    @property
    def truncated_in_simulation(self):
        return self.kind == GAUSSIAN and self.var > 0

    def expectation(self):
        if self.kind == EXPONENTIAL:
            return 1.0 / self.rate
        if self.kind == ERLANG:
            return self.shape / self.rate
        if self.kind == DETERMINISTIC:
            return self.d
        return self.mean

    def with_role(self, role):
        return DistributionSpec(self.kind, role, self.rate, self.shape,
                                self.d, self.mean, self.var)

    def describe(self):
        if self.kind == EXPONENTIAL:
            return "exp:rate=%r" % self.rate
        if self.kind == ERLANG:
            return "erlang:k=%d,rate=%r" % (self.shape, self.rate)
        if self.kind == DETERMINISTIC:
            return "det:d=%r" % self.d
        return "gauss:mean=%r,var=%r" % (self.mean, self.var)

    def __str__(self):
        return self.describe()


def Exponential(rate, role=SERVICE_TIME):
    return DistributionSpec(EXPONENTIAL, role, rate=float(rate))


def Deterministic(d, role=SERVICE_TIME):
    return DistributionSpec(DETERMINISTIC, role, d=float(d))


def Gaussian(mean, var=0.0, role=SERVICE_TIME):
    return DistributionSpec(GAUSSIAN, role, mean=float(mean), var=float(var))


def ErlangK(k, rate, role=SERVICE_TIME):
    return DistributionSpec(ERLANG, role, rate=float(rate), shape=int(k))


# =========================================================================
# MGFs
# =========================================================================

def _check_domain(dist, theta):
    if theta > 0 and theta >= dist.theta_max - DOMAIN_EPSILON:
        raise DomainError("theta=%r outside the MGF domain of %s (theta < %r)"
                          % (theta, dist, dist.theta_max))


def log_mgf(dist, theta):
    """
    ln E[exp(theta X)] in closed form.
    """
    _check_domain(dist, theta)
    if dist.kind == EXPONENTIAL:
        return -math.log1p(-theta / dist.rate)
    if dist.kind == ERLANG:
        return -dist.shape * math.log1p(-theta / dist.rate)
    if dist.kind == DETERMINISTIC:
        return theta * dist.d
    return theta * dist.mean + 0.5 * theta * theta * dist.var


def mgf(dist, theta):
    """
    E[exp(theta X)] in closed form; ``mgf(dist, 0) == 1`` for every law.
    """
    _check_domain(dist, theta)
    if dist.kind == EXPONENTIAL:
        return dist.rate / (dist.rate - theta)
    if dist.kind == ERLANG:
        return (dist.rate / (dist.rate - theta)) ** dist.shape
    return math.exp(log_mgf(dist, theta))


def _positive_theta(theta):
    if not theta > 0:
        raise DomainError("theta must be > 0, got %r" % (theta,))


def _check_role(dist, role):
    if dist.role != role:
        raise DomainError("%s is a %s law, expected a %s law" % (dist, dist.role, role))


def rho_arrival(dist, theta):
    """
    Arrival rate parameter rho_A(-theta); lies between the minimum and
    the mean inter-arrival time.
    """
    _positive_theta(theta)
    _check_role(dist, INTER_ARRIVAL)
    return -log_mgf(dist, -theta) / theta


def rho_service(dist, theta):
    """
    Service rate parameter rho_S(theta); lies between the mean and the
    maximum service time.
    """
    _positive_theta(theta)
    _check_role(dist, SERVICE_TIME)
    return log_mgf(dist, theta) / theta


def scale_capacity(dist, c):
    """
    The law of X/c, i.e. the service time on a server of capacity c.
    """
    if not c > 0:
        raise DomainError("capacity must be > 0, got %r" % (c,))
    if dist.kind in (EXPONENTIAL, ERLANG):
        return DistributionSpec(dist.kind, dist.role, rate=dist.rate * c, shape=dist.shape)
    if dist.kind == DETERMINISTIC:
        return DistributionSpec(dist.kind, dist.role, d=dist.d / c)
    return DistributionSpec(dist.kind, dist.role, mean=dist.mean / c, var=dist.var / (c * c))


def thin_random(arrival, p, theta):
    """
    Arrival rate parameter of the Bernoulli(p) thinned process. The number
    of original inter-arrival times between two thinned arrivals is
    geometric, which requires ``(1-p) M(-theta) < 1``.
    """
    if not 0 < p <= 1:
        raise DomainError("thinning probability must be in (0, 1], got %r" % (p,))
    _positive_theta(theta)
    _check_role(arrival, INTER_ARRIVAL)
    log_m = log_mgf(arrival, -theta)
    q = (1.0 - p) * math.exp(log_m)
    if q >= 1.0:
        raise DomainError("random thinning with p=%r needs M(-theta) < 1/(1-p) at theta=%r"
                          % (p, theta))
    return -(math.log(p) + log_m - math.log1p(-q)) / theta


def thin_deterministic(arrival, k, theta):
    """
    Arrival rate parameter of round-robin thinning to every k-th job.
    """
    if int(k) != k or k < 1:
        raise DomainError("k must be an integer >= 1, got %r" % (k,))
    return k * rho_arrival(arrival, theta)


def split_merge_rho(services, theta):
    """
    Upper estimate (1/theta) ln sum_i E[exp(theta S_i)] of the service rate
    parameter of max_i S_i.
    """
    _positive_theta(theta)
    if not services:
        raise DomainError("split-merge needs at least one server")
    for dist in services:
        _check_role(dist, SERVICE_TIME)
    return special.logsumexp([log_mgf(dist, theta) for dist in services]) / theta


# =========================================================================
# (sigma, rho) pairs
# =========================================================================

def _zero(theta):
    return 0.0


class SigmaRho(object):
    """
    A (sigma(theta), rho(theta)) bounding pair. ``direction`` is
    ARRIVAL_LOWER or SERVICE_UPPER; the theta domain is (0, theta_max].
    """

    def __init__(self, direction, rho, sigma=None, theta_max=math.inf, mean=None,
                 description=""):
        if direction not in (ARRIVAL_LOWER, SERVICE_UPPER):
            raise DomainError("Unknown direction %r" % (direction,))
        self.direction = direction
        self._rho = rho
        self._sigma = sigma or _zero
        self.theta_max = theta_max
        self.mean = mean
        self.description = description

    def _check(self, theta):
        if not 0 < theta <= self.theta_max:
            raise DomainError("theta=%r outside (0, %r] for %s"
                              % (theta, self.theta_max, self.description or self.direction))

    def rho(self, theta):
        self._check(theta)
        return self._rho(theta)

    def sigma(self, theta):
        self._check(theta)
        return self._sigma(theta)

    def is_monotone(self, thetas, tolerance=MONOTONE_TOLERANCE):
        """
        Service rho must be non-decreasing and arrival rho non-increasing
        on the increasing grid ``thetas``.
        """
        values = np.array([self.rho(t) for t in thetas])
        steps = np.diff(values)
        if self.direction == SERVICE_UPPER:
            return bool(np.all(steps >= -tolerance))
        return bool(np.all(steps <= tolerance))

    def __repr__(self):
        return "<SigmaRho %s %s theta<=%r>" % (self.direction, self.description, self.theta_max)


def _service_theta_max(theta_max):
    if math.isinf(theta_max):
        return theta_max
    return theta_max - 2 * DOMAIN_EPSILON


def arrival_sigma_rho(dist):
    return SigmaRho(ARRIVAL_LOWER, lambda t: rho_arrival(dist, t),
                    mean=dist.expectation(), description=str(dist))


def service_sigma_rho(dist):
    return SigmaRho(SERVICE_UPPER, lambda t: rho_service(dist, t),
                    theta_max=_service_theta_max(dist.theta_max),
                    mean=dist.expectation(), description=str(dist))


def split_merge_sigma_rho(services):
    theta_max = min(_service_theta_max(d.theta_max) for d in services)
    return SigmaRho(SERVICE_UPPER, lambda t: split_merge_rho(services, t),
                    theta_max=theta_max,
                    mean=max(d.expectation() for d in services),
                    description="split-merge(%s)" % ", ".join(str(d) for d in services))


def deterministic_thinned_sigma_rho(arrival, k):
    return SigmaRho(ARRIVAL_LOWER, lambda t: thin_deterministic(arrival, k, t),
                    mean=k * arrival.expectation(),
                    description="det-thinned(%s, k=%d)" % (arrival, k))


def _random_thinning_theta_max(arrival, p):
    if p >= 1 or arrival.kind != GAUSSIAN or arrival.var == 0:
        return math.inf
    # ln M(-theta) < -ln(1-p) on a Gaussian law is quadratic in theta
    eta, var = arrival.mean, arrival.var
    root = (eta + math.sqrt(eta * eta - 2.0 * var * math.log1p(-p))) / var
    return root * (1 - DOMAIN_EPSILON)


def random_thinned_sigma_rho(arrival, p):
    return SigmaRho(ARRIVAL_LOWER, lambda t: thin_random(arrival, p, t),
                    theta_max=_random_thinning_theta_max(arrival, p),
                    mean=arrival.expectation() / p,
                    description="random-thinned(%s, p=%r)" % (arrival, p))


# =========================================================================
# Sampling
# =========================================================================

def sample(dist, rng):
    """
    One draw from ``dist`` using the numpy Generator ``rng``. Gaussian
    draws are truncated at 0.
    """
    if dist.kind == EXPONENTIAL:
        return float(rng.exponential(1.0 / dist.rate))
    if dist.kind == ERLANG:
        return float(rng.exponential(1.0 / dist.rate, size=dist.shape).sum())
    if dist.kind == DETERMINISTIC:
        return dist.d
    return max(0.0, float(rng.normal(dist.mean, math.sqrt(dist.var))))


def sample_many(dist, rng, size):
    if dist.kind == EXPONENTIAL:
        return rng.exponential(1.0 / dist.rate, size=size)
    if dist.kind == ERLANG:
        return rng.exponential(1.0 / dist.rate, size=(size, dist.shape)).sum(axis=1)
    if dist.kind == DETERMINISTIC:
        return np.full(size, dist.d)
    return np.maximum(0.0, rng.normal(dist.mean, math.sqrt(dist.var), size=size))


def sample_quantile(dist, u):
    """
    Inverse-CDF transform of uniforms ``u``; used to drive several laws by
    one common uniform per job.
    """
    u = np.asarray(u, dtype=float)
    if dist.kind == EXPONENTIAL:
        return stats.expon.ppf(u, scale=1.0 / dist.rate)
    if dist.kind == ERLANG:
        return stats.gamma.ppf(u, a=dist.shape, scale=1.0 / dist.rate)
    if dist.kind == DETERMINISTIC:
        return np.full(u.shape, dist.d)
    return np.maximum(0.0, stats.norm.ppf(u, loc=dist.mean, scale=math.sqrt(dist.var)))


# =========================================================================
# Literals
# =========================================================================

def parse_distribution(text, role):
    """
    Parse literals like ``exp:mu=1``, ``exp:lambda=0.7``, ``det:d=1.25``,
    ``gauss:mean=1,var=0.25`` or ``erlang:k=3,lambda=1``.
    """
    text = str(text).strip()
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind not in DISTRIBUTIONS:
        raise ParseError("Unknown distribution %r, allowed is one of: %s"
                         % (kind, ", ".join(sorted(DISTRIBUTIONS))))
    given = {}
    for item in rest.split(","):
        if not item.strip():
            continue
        name, sep, value = item.partition("=")
        if not sep:
            raise ParseError("Malformed parameter %r in %r" % (item, text))
        name = name.strip().lower()
        given[ALIASES.get(name, name)] = value.strip()

    adef = DISTRIBUTIONS[kind]
    unknown = set(given) - set(adef)
    if unknown:
        raise ParseError("Unknown parameter(s) %s for %s" % (", ".join(sorted(unknown)), kind))

    params = {}
    for name, (ptype, dfl) in adef.items():
        if name not in given:
            if dfl == MUST:
                raise ParseError("Parameter '%s' must be set for %s" % (name, kind))
            value = dfl
        else:
            value = given[name]
        if ptype == INT:
            params[name] = get_int(value, name)
        else:
            params[name] = get_float(value, name)

    try:
        if kind == EXPONENTIAL:
            return Exponential(params["rate"], role)
        if kind == DETERMINISTIC:
            return Deterministic(params["d"], role)
        if kind == GAUSSIAN:
            return Gaussian(params["mean"], params["var"], role)
        return ErlangK(params["k"], params["rate"], role)
    except DomainError as e:
        raise ParseError(str(e))
