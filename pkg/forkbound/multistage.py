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
End-to-end sojourn bounds for h homogeneous fork-join stages in tandem.

A stage with envelope error eps_stg satisfies a sample-path service
guarantee with rate rho_S + delta and error
``sum_{j=1..m} eps_stg(tau + delta j)``; for eps_stg = k exp(-theta tau)
and m -> inf this is at most ``k exp(-theta tau) / (theta delta)``.
Concatenating h stages with delta = beta / h gives::

    T_e2e <= beta + tau_A + h (rho_S + tau_S + ln(h^2 k / (theta_S beta)) / theta_S)

with probability at least 1 - exp(-theta_A tau_A) - exp(-theta_S tau_S),
as long as rho_S(theta_S) + beta <= rho_A(-theta_A).
"""

import logging
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from forkbound.default import (DETERMINISTIC, GRID_POINTS, SERIES_TERMS,
                               THETA_FLOOR_FRACTION)
from forkbound.distributions import rho_arrival, rho_service
from forkbound.envelopes import (Envelope, ARRIVAL, arrival_theta_for_rate,
                                 forkjoin_stage_profile, service_theta_max)
from forkbound.errors import DomainError, InfeasibleError, StabilityError
from forkbound.util import minimize_on_interval

log = logging.getLogger("forkbound")


@dataclass(frozen=True)
class StageSpec:
    """
    One fork-join stage of k homogeneous servers. ``union`` marks the
    union-bound profile k exp(-theta_s tau), which has a closed-form
    sample-path sum.
    """

    k: int
    rho_s: float
    stage_profile: object
    theta_s: float
    union: bool = True

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError("k must be an integer >= 1, got %r" % (self.k,))
        if not self.theta_s > 0:
            raise DomainError("theta_s must be > 0")


def stage_from_service(service, k, theta_s, independent=False, l=None):
    """
    StageSpec for k servers with iid service law ``service`` and the
    per-server profile exp(-theta_s tau).
    """
    rho_s = rho_service(service, theta_s)
    if service.kind == DETERMINISTIC:
        return StageSpec(k, rho_s, lambda tau: 0.0, theta_s, union=False)
    single = lambda tau: math.exp(-theta_s * tau)
    l = k if l is None else l
    union = not independent and l == k
    return StageSpec(k, rho_s, forkjoin_stage_profile(k, single, independent, l), theta_s,
                     union=union)


def samplepath_profile(stage, delta, horizon=math.inf):
    """
    The sample-path error profile tau -> sum_{j=1..m} eps_stg(tau + delta j).
    With an infinite horizon the union-bound stage uses the closed form
    k exp(-theta tau) / (theta delta); other profiles sum the series
    numerically.
    """
    if not delta > 0:
        raise DomainError("delta must be > 0, got %r" % (delta,))
    if horizon != math.inf and (int(horizon) != horizon or horizon < 1):
        raise DomainError("horizon must be a positive integer or inf")

    if horizon == math.inf and stage.union:
        k, theta = stage.k, stage.theta_s
        return lambda tau: k * math.exp(-theta * tau) / (theta * delta)

    profile = np.vectorize(stage.stage_profile, otypes=[float])

    if horizon != math.inf:
        offsets = delta * np.arange(1, int(horizon) + 1)
        return lambda tau: float(np.sum(profile(tau + offsets)))

    def series(tau):
        total = 0.0
        start = 1
        chunk = 1024
        while start <= SERIES_TERMS:
            values = profile(tau + delta * np.arange(start, start + chunk))
            total += float(np.sum(values))
            if values[-1] <= 1e-17 * max(total, 1e-300):
                break
            start += chunk
            chunk *= 2
        return total
    return series


@dataclass(frozen=True)
class NetworkSpec:
    """
    h identical stages behind one arrival envelope, with rate slack beta
    and delta = beta / h.
    """

    h: int
    stage: StageSpec
    arrival: Envelope
    beta: float

    def __post_init__(self):
        if int(self.h) != self.h or self.h < 1:
            raise DomainError("h must be an integer >= 1, got %r" % (self.h,))
        if not self.beta > 0:
            raise DomainError("beta must be > 0")
        if self.stage.rho_s + self.beta > self.arrival.rate * (1 + 1e-12):
            raise StabilityError("rho_S + beta = %.6g exceeds rho_A = %.6g"
                                 % (self.stage.rho_s + self.beta, self.arrival.rate))

    @property
    def delta(self):
        return self.beta / self.h

    def with_h(self, h):
        return NetworkSpec(h, self.stage, self.arrival, self.beta)

    def stage_offset(self):
        """
        Per-stage slack (1/theta_S) ln(h^2 k / (theta_S beta)) that turns
        the sample-path sum into a single exp(-theta_S tau_S) term.
        """
        h, k, theta = self.h, self.stage.k, self.stage.theta_s
        return math.log(h * h * k / (theta * self.beta)) / theta


@dataclass(frozen=True)
class NetworkTemplate:
    """
    h stages of k servers fed by iid arrival and service laws; the free
    parameters beta, theta_A and theta_S are chosen by the search.
    """

    h: int
    k: int
    arrival_law: object
    service_law: object

    def with_h(self, h):
        return NetworkTemplate(h, self.k, self.arrival_law, self.service_law)

    def build(self, beta, theta_s):
        stage = stage_from_service(self.service_law, self.k, theta_s)
        theta_a = arrival_theta_for_rate(self.arrival_law, stage.rho_s + beta)
        rate = rho_arrival(self.arrival_law, theta_a)
        prefactor = 0.0 if self.arrival_law.kind == DETERMINISTIC else 1.0
        arrival = Envelope(ARRIVAL, rate, decay=theta_a, prefactor=prefactor)
        return NetworkSpec(self.h, stage, arrival, beta)

    def theta_s_max(self):
        return service_theta_max(self.service_law, self.arrival_law.expectation())

    def beta_max(self, theta_s):
        return self.arrival_law.expectation() - rho_service(self.service_law, theta_s)


E2ESplit = namedtuple("E2ESplit", "tau tau_a tau_s fraction")


def _split(net, eps):
    """
    Minimize tau_A + h tau_S subject to exp(-theta_A tau_A) + exp(-theta_S tau_S) <= eps.
    The optimal arrival share is theta_S / (theta_S + h theta_A).
    """
    h, theta_s = net.h, net.stage.theta_s
    if net.arrival.degenerate:
        return 0.0, math.log(1.0 / eps) / theta_s, 0.0
    theta_a = net.arrival.decay
    f = theta_s / (theta_s + h * theta_a)
    tau_a = math.log(net.arrival.prefactor / (f * eps)) / theta_a
    tau_s = math.log(1.0 / ((1.0 - f) * eps)) / theta_s
    return max(0.0, tau_a), tau_s, f


def e2e_split(net, eps):
    if not 0 < eps < 1:
        raise DomainError("eps must be in (0, 1), got %r" % (eps,))
    tau_a, tau_s, f = _split(net, eps)
    tau = net.beta + tau_a + net.h * (net.stage.rho_s + tau_s + net.stage_offset())
    return E2ESplit(tau, tau_a, tau_s, f)


def e2e_quantile_at(net, eps):
    """
    End-to-end quantile at fixed (beta, theta_A, theta_S), error split
    optimized.
    """
    return e2e_split(net, eps).tau


def e2e_tail_at(net, tau):
    """
    Violation probability bound of the end-to-end sojourn time at ``tau``
    for fixed parameters.
    """
    h, theta_s = net.h, net.stage.theta_s
    budget = tau - net.beta - h * (net.stage.rho_s + net.stage_offset())
    if budget <= 0:
        return 1.0
    if net.arrival.degenerate:
        return min(1.0, math.exp(-theta_s * budget / h))
    _, value = minimize_on_interval(
        lambda x: net.arrival.raw(x) + math.exp(-theta_s * (budget - x) / h), 0.0, budget)
    return min(1.0, value)


def default_parameters(template):
    """
    Midpoint heuristic: theta_S halfway into its admissible range, beta
    half of the remaining rate slack.
    """
    theta_s = 0.5 * template.theta_s_max()
    beta = 0.5 * template.beta_max(theta_s)
    return beta, theta_s


def _best_beta(template, theta_s, eps, points):
    beta_hi = template.beta_max(theta_s)
    if not beta_hi > 0:
        return None, math.inf

    def evaluate(beta):
        return e2e_quantile_at(template.build(beta, theta_s), eps)

    return minimize_on_interval(evaluate, beta_hi * THETA_FLOOR_FRACTION, beta_hi * (1 - 1e-9),
                                points=points, log_grid=True)


def e2e_search(template, eps, points=GRID_POINTS // 2):
    """
    Nested search: theta_S outside, beta inside, theta_A tied to the
    largest value with rho_A(-theta_A) >= rho_S(theta_S) + beta and the
    error split in closed form. Returns the NetworkSpec and its quantile;
    never worse than the midpoint heuristic.
    """
    theta_hi = template.theta_s_max()
    found = {}

    def outer(theta_s):
        beta, value = _best_beta(template, theta_s, eps, points)
        found[theta_s] = beta
        return value

    theta_s, value = minimize_on_interval(outer, theta_hi * THETA_FLOOR_FRACTION,
                                          theta_hi * (1 - 1e-9), points=points, log_grid=True)
    best = None
    if math.isfinite(value):
        if theta_s not in found:
            outer(theta_s)
        best = (value, template.build(found[theta_s], theta_s))

    beta0, theta0 = default_parameters(template)
    try:
        net0 = template.build(beta0, theta0)
        value0 = e2e_quantile_at(net0, eps)
        if best is None or value0 < best[0]:
            best = (value0, net0)
    except (InfeasibleError, DomainError):
        pass

    if best is None:
        raise InfeasibleError("no admissible (beta, theta_A, theta_S) for h=%d, k=%d"
                              % (template.h, template.k))
    log.debug("e2e_search h=%d k=%d: beta=%.6g theta_S=%.6g theta_A=%.6g tau=%.6g",
              template.h, template.k, best[1].beta, best[1].stage.theta_s,
              best[1].arrival.decay or 0.0, best[0])
    return best[1], best[0]


def e2e_sojourn_quantile(net, eps):
    """
    End-to-end sojourn quantile. A NetworkTemplate is optimized over its
    free parameters; a NetworkSpec is evaluated at its own parameters.
    """
    if isinstance(net, NetworkSpec):
        return e2e_quantile_at(net, eps)
    return e2e_search(net, eps)[1]


ScalingCurve = namedtuple("ScalingCurve", "rows a b r_squared")


def scaling_curve(net_template, h_values, eps):
    """
    (h, quantile) rows and the least-squares fit tau(h) ~ a h ln(h^2 k) + b.
    A NetworkSpec keeps its parameters for every h; a NetworkTemplate is
    optimized per h.
    """
    h_values = [int(h) for h in h_values]
    rows = [(h, e2e_sojourn_quantile(net_template.with_h(h), eps)) for h in h_values]
    k = net_template.stage.k if isinstance(net_template, NetworkSpec) else net_template.k
    x = np.array([h * math.log(h * h * k) for h in h_values], dtype=float)
    y = np.array([q for _, q in rows], dtype=float)
    if len(rows) < 2:
        return ScalingCurve(rows, math.nan, math.nan, math.nan)
    a, b = np.polyfit(x, y, 1)
    residual = y - (a * x + b)
    total = y - y.mean()
    ss_tot = float(np.dot(total, total))
    r_squared = 1.0 - float(np.dot(residual, residual)) / ss_tot if ss_tot > 0 else 1.0
    return ScalingCurve(rows, float(a), float(b), r_squared)
