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
Trajectory simulation of the queueing systems by max-plus recursions.

A lossless work-conserving FIFO server departs job n at
``D(n) = max(A(n), D(n-1)) + S(n)`` with D(0) = 0, which unrolls to
``D(n) = max_{nu <= n} {A(nu) + S(nu, n)}``. The unrolled form is a
running maximum over cumulative sums and is evaluated vectorized.

Random streams are keyed by (purpose, stage, server) through
``numpy.random.SeedSequence`` spawn keys, so a server keeps its service
draws when other servers are added or removed.
"""

import logging
import math
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from forkbound.default import (CI_SIGMAS, RANDOM, ROUND_ROBIN, STREAM_ARRIVAL,
                               STREAM_COPULA, STREAM_REPLICATION,
                               STREAM_ROUTING, STREAM_SERVICE, WARMUP_CAP,
                               WARMUP_FRACTION, WARMUP_JOBS)
from forkbound.distributions import (rho_arrival, rho_service, sample_many,
                                     sample_quantile)
from forkbound.errors import (DomainError, EmptyError, ShapeError,
                              StabilityError)
from forkbound.util import get_threads

log = logging.getLogger("forkbound")


def stream(seed, *key):
    """
    Independent generator for the stream ``key`` of ``seed``.
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.SFC64(sequence))


@dataclass
class Workload:
    """
    Arrival times A(1..n) and a k x n matrix of task service times.
    """

    arrivals: np.ndarray
    services: np.ndarray
    seed: int = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.arrivals = np.asarray(self.arrivals, dtype=float)
        self.services = np.atleast_2d(np.asarray(self.services, dtype=float))
        if self.arrivals.ndim != 1:
            raise ShapeError("arrivals must be one-dimensional")
        if self.services.shape[1] != len(self.arrivals):
            raise ShapeError("services have %d columns for %d jobs"
                             % (self.services.shape[1], len(self.arrivals)))
        if len(self.arrivals) > 1 and np.any(np.diff(self.arrivals) < 0):
            raise DomainError("arrival times must be non-decreasing")
        if np.any(self.services < 0):
            raise DomainError("service times must be non-negative")

    @property
    def n_jobs(self):
        return len(self.arrivals)

    @property
    def k(self):
        return self.services.shape[0]


def _draw_services(services, n, seed, stage=0, dependent=False):
    if dependent:
        u = stream(seed, STREAM_COPULA, stage).random(n)
        return np.vstack([sample_quantile(dist, u) for dist in services])
    return np.vstack([sample_many(dist, stream(seed, STREAM_SERVICE, stage, i), n)
                      for i, dist in enumerate(services)])


def _truncation_note(laws, metadata):
    truncated = [str(d) for d in laws if d.truncated_in_simulation]
    if truncated:
        log.warning("Gaussian draws truncated at 0 in simulation: %s", ", ".join(truncated))
        metadata["truncated_at_zero"] = ", ".join(truncated)


def make_workload(arrival, services, n, seed, dependent=False, stage=0):
    """
    Draw a workload: n arrivals of the inter-arrival law ``arrival`` and one
    service row per law in ``services``. ``dependent`` drives all servers
    by one common uniform per job.
    """
    if n < 1:
        raise DomainError("need at least one job")
    arrivals = np.cumsum(sample_many(arrival, stream(seed, STREAM_ARRIVAL), n))
    matrix = _draw_services(services, n, seed, stage, dependent)
    metadata = {
        "arrival": str(arrival),
        "services": ";".join(str(s) for s in services),
        "dependent": dependent,
    }
    _truncation_note([arrival] + list(services), metadata)
    return Workload(arrivals, matrix, seed, metadata)


# =========================================================================
# Departures
# =========================================================================

def serve_fifo(arrivals, services):
    """
    FIFO departure times D(n) = C(n) + max(0, max_{nu <= n} A(nu) - C(nu-1))
    with C the cumulative service.
    """
    arrivals = np.asarray(arrivals, dtype=float)
    services = np.asarray(services, dtype=float)
    if arrivals.shape != services.shape:
        raise ShapeError("arrivals and services differ in length: %s vs %s"
                         % (arrivals.shape, services.shape))
    if len(arrivals) == 0:
        return np.zeros(0)
    work = np.cumsum(services)
    backlog = np.maximum.accumulate(arrivals - (work - services))
    return work + np.maximum(backlog, 0.0)


def departures_recursive(arrivals, services):
    if len(arrivals) != len(services):
        raise ShapeError("arrivals and services differ in length")
    departures = np.empty(len(arrivals))
    last = 0.0
    for n, (a, s) in enumerate(zip(arrivals, services)):
        last = max(a, last) + s
        departures[n] = last
    return departures


def departures_bruteforce(arrivals, services):
    """
    D(n) = max(S(1, n), max_{nu in [1, n]} A(nu) + S(nu, n)); quadratic,
    for checking the other two forms.
    """
    if len(arrivals) != len(services):
        raise ShapeError("arrivals and services differ in length")
    n = len(arrivals)
    departures = np.empty(n)
    for m in range(n):
        best = sum(services[:m + 1])
        for nu in range(m + 1):
            best = max(best, arrivals[nu] + sum(services[nu:m + 1]))
        departures[m] = best
    return departures


# =========================================================================
# Results
# =========================================================================

def warmup_for(n):
    return min(max(WARMUP_JOBS, int(math.ceil(WARMUP_FRACTION * n))), int(n * WARMUP_CAP))


class SimResult(object):
    """
    Per-job sojourn times; estimators use the jobs after ``warmup_discard``.
    """

    def __init__(self, sojourns, warmup=None, departures=None, waitings=None, metadata=None):
        self.sojourns = np.asarray(sojourns, dtype=float)
        self.warmup_discard = warmup_for(len(self.sojourns)) if warmup is None else int(warmup)
        self.departures = departures
        self.waitings = waitings
        self.metadata = dict(metadata or {})

    @property
    def samples(self):
        return self.sojourns[self.warmup_discard:]

    def empirical_tail(self, tau, batches=None):
        """
        (fraction of jobs with T > tau, half-width). The half-width is
        binomial, or with ``batches`` taken from the spread of the fraction
        over that many contiguous batches, which covers the correlation of
        consecutive sojourns.
        """
        samples = self.samples
        if len(samples) == 0:
            raise EmptyError("no sojourn samples after discarding %d warmup jobs"
                             % self.warmup_discard)
        above = samples > tau
        p = float(np.count_nonzero(above)) / len(samples)
        if not batches:
            return p, CI_SIGMAS * math.sqrt(p * (1.0 - p) / len(samples))
        if batches < 2 or len(samples) < batches:
            raise DomainError("need 2 <= batches <= %d, got %r" % (len(samples), batches))
        size = len(samples) // batches
        fractions = above[:size * batches].reshape(batches, size).mean(axis=1)
        half = CI_SIGMAS * float(np.std(fractions, ddof=1)) / math.sqrt(batches)
        return p, half

    def empirical_quantile(self, eps):
        samples = self.samples
        if len(samples) == 0:
            raise EmptyError("no sojourn samples")
        return float(np.quantile(samples, 1.0 - eps))

    @classmethod
    def pooled(cls, results):
        """
        Concatenate replications, each after its own warmup.
        """
        results = list(results)
        if not results:
            raise EmptyError("no replications to pool")
        metadata = dict(results[0].metadata)
        metadata["replications"] = len(results)
        return cls(np.concatenate([r.samples for r in results]), warmup=0, metadata=metadata)


def empirical_tail(result, taus, batches=None):
    """
    Rows (tau, fraction, ci_halfwidth).
    """
    rows = []
    for tau in taus:
        p, half = result.empirical_tail(tau, batches)
        rows.append((float(tau), p, half))
    return rows


# =========================================================================
# Systems
# =========================================================================

def _per_server(w):
    return np.vstack([serve_fifo(w.arrivals, row) for row in w.services])


def _waitings(w, per_server):
    # the task that starts service last: max_i [D_i(n-1) - A(n)]^+
    previous = np.hstack([np.zeros((w.k, 1)), per_server[:, :-1]])
    return np.maximum(previous.max(axis=0) - w.arrivals, 0.0)


def sim_forkjoin(w, warmup=None):
    per_server = _per_server(w)
    departures = per_server.max(axis=0)
    return SimResult(departures - w.arrivals, warmup, departures, _waitings(w, per_server),
                     w.metadata)


def sim_splitmerge(w, warmup=None):
    """
    All tasks of a job start together, so the system is one FIFO server
    with service max_i S_i(n).
    """
    departures = serve_fifo(w.arrivals, w.services.max(axis=0))
    return SimResult(departures - w.arrivals, warmup, departures, metadata=w.metadata)


def sim_kl(w, l, warmup=None):
    """
    (k,l) fork-join: the job leaves with the l-th finished task; the other
    tasks stay in service.
    """
    if int(l) != l or not 1 <= l <= w.k:
        raise DomainError("l must satisfy 1 <= l <= k=%d, got %r" % (w.k, l))
    per_server = _per_server(w)
    departures = np.partition(per_server, l - 1, axis=0)[l - 1]
    return SimResult(departures - w.arrivals, warmup, departures, metadata=w.metadata)


def round_robin_index(k, i, m):
    """
    X_i(m): original index of the m-th job sent to server i (1-based).
    """
    return k * (m - 1) + i


def round_robin_count(k, i, n):
    """
    Y_i(n): number of the first n jobs sent to server i (1-based).
    """
    return max(0, -(-(n - i + 1) // k))


def _routing(mode, k, n, seed, p):
    if mode == ROUND_ROBIN:
        return np.arange(n) % k
    if mode != RANDOM:
        raise DomainError("Unknown thinning mode %r" % (mode,))
    p = np.full(k, 1.0 / k) if p is None else np.asarray(p, dtype=float)
    if p.shape != (k,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise DomainError("routing probabilities must be %d non-negative values summing to 1" % k)
    return stream(seed, STREAM_ROUTING).choice(k, size=n, p=p / p.sum())


def sim_thinning(arrival, services, mode, n, seed, p=None, warmup=None):
    """
    Whole jobs are routed to one of k servers; departures are resequenced
    so D(n) = max_i D_i(Y_i(n)) with D_i(0) = 0.
    """
    k = len(services)
    if k < 1:
        raise DomainError("need at least one server")
    arrivals = np.cumsum(sample_many(arrival, stream(seed, STREAM_ARRIVAL), n))
    route = _routing(mode, k, n, seed, p)
    departures = np.zeros(n)
    for i, dist in enumerate(services):
        mine = route == i
        jobs = np.flatnonzero(mine)
        own = serve_fifo(arrivals[jobs],
                         sample_many(dist, stream(seed, STREAM_SERVICE, 0, i), len(jobs)))
        padded = np.concatenate(([0.0], own))
        np.maximum(departures, padded[np.cumsum(mine)], out=departures)
    metadata = {
        "arrival": str(arrival),
        "services": ";".join(str(s) for s in services),
        "mode": mode,
    }
    _truncation_note([arrival] + list(services), metadata)
    return SimResult(departures - arrivals, warmup, departures, metadata=metadata)


def sim_multistage(h, k, arrival, service, n, seed, warmup=None):
    """
    h fork-join stages in tandem; the departures of stage j are the
    arrivals of stage j+1. Every stage draws fresh service times.
    """
    if h < 1 or k < 1:
        raise DomainError("h and k must be >= 1")
    first = np.cumsum(sample_many(arrival, stream(seed, STREAM_ARRIVAL), n))
    current = first
    for stage in range(h):
        matrix = _draw_services([service] * k, n, seed, stage)
        current = np.vstack([serve_fifo(current, row) for row in matrix]).max(axis=0)
    metadata = {"arrival": str(arrival), "service": str(service), "h": h, "k": k}
    _truncation_note([arrival, service], metadata)
    return SimResult(current - first, warmup, current, metadata=metadata)


# =========================================================================
# Property checks
# =========================================================================

MartingaleRow = namedtuple("MartingaleRow", "m mean_u stderr diff_stderr")


def supermartingale_check(arrival, service, theta, n, replications, seed):
    """
    Estimate E[U(m)], U(m) = exp(theta (S(n-m+1, n) - A(n-m+1, n))), for
    m = 1..n: m service times against m-1 inter-arrival times.
    ``diff_stderr`` is the standard error of U(m) - U(m-1) on the same
    replications.
    """
    if rho_service(service, theta) > rho_arrival(arrival, theta) + 1e-12:
        raise StabilityError("rho_S(theta) > rho_A(-theta) at theta=%r" % theta)
    if n < 1 or replications < 2:
        raise DomainError("need n >= 1 and at least two replications")
    s = sample_many(service, stream(seed, STREAM_SERVICE, 0, 0), replications * n)
    a = sample_many(arrival, stream(seed, STREAM_ARRIVAL), replications * n)
    s = s.reshape(replications, n)
    a = a.reshape(replications, n)
    drift = np.cumsum(s, axis=1)
    drift[:, 1:] -= np.cumsum(a[:, :-1], axis=1)
    u = np.exp(theta * drift)
    root = math.sqrt(replications)
    means = u.mean(axis=0)
    stderr = u.std(axis=0, ddof=1) / root
    diffs = np.diff(u, axis=1, prepend=0.0)
    diff_stderr = diffs.std(axis=0, ddof=1) / root
    diff_stderr[0] = stderr[0]
    return [MartingaleRow(m + 1, float(means[m]), float(stderr[m]), float(diff_stderr[m]))
            for m in range(n)]


def envelope_violation_rate(arrival, rate, tau, paths, length, seed, chunk=100000):
    """
    Fraction of sample paths with max_nu {rate (n - nu) - A(nu, n)} > tau
    over the last ``length`` inter-arrival times, and its standard error.
    """
    rng = stream(seed, STREAM_ARRIVAL)
    hits = 0
    done = 0
    while done < paths:
        size = min(chunk, paths - done)
        gaps = sample_many(arrival, rng, size * length).reshape(size, length)
        excess = np.cumsum(rate - gaps, axis=1).max(axis=1)
        hits += int(np.count_nonzero(excess > tau))
        done += size
    p = hits / float(paths)
    return p, math.sqrt(max(p * (1 - p), 1.0 / paths) / paths)


def run_replications(func, seed, count, threads=None):
    """
    Run ``func(child_seed)`` for ``count`` independent child seeds on a
    thread pool; results come back in seed order.
    """
    children = np.random.SeedSequence(int(seed), spawn_key=(STREAM_REPLICATION,)).spawn(count)
    seeds = [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]
    workers = min(get_threads(threads), max(1, count))
    log.debug("running %d replications on %d threads", count, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, seeds))
