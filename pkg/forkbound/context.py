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

import logging
from collections import OrderedDict
from dataclasses import dataclass, field

from forkbound.default import (COMMANDS, DEFAULT_EPS, DEFAULT_JOBS,
                               DEFAULT_SEED, DEFAULT_TAUS, FB_ERROR,
                               FB_WARNING, FIGURES, INTER_ARRIVAL, RANDOM,
                               ROUND_ROBIN, SERVICE_TIME, THETA_MAX,
                               THETA_OPTIMIZE, TOPOLOGIES)
from forkbound.distributions import parse_distribution
from forkbound.errors import ParseError
from forkbound.util import get_threads

log = logging.getLogger("forkbound")


class RunContext(object):
    """
    Collects the metadata written into output headers together with the
    warnings and errors of one run.
    """

    def __init__(self, debug=0):
        self.debug = debug
        self.log = []
        self.err = 0
        self.warn = 0
        self.metadata = OrderedDict()

    def __setitem__(self, key, value):
        self.metadata[key] = value

    def __getitem__(self, key):
        return self.metadata[key]

    def update(self, values):
        for key, value in values.items():
            self.metadata[key] = value

    def _format(self, msg, args):
        try:
            return msg % args
        except (TypeError, ValueError):
            return str(msg)

    def warning(self, msg, *args):
        self.warn += 1
        text = self._format(msg, args)
        self.log.append((FB_WARNING, text))
        return text

    def error(self, msg, *args):
        self.err += 1
        text = self._format(msg, args)
        self.log.append((FB_ERROR, text))
        return text

    def messages(self, mode=None):
        return [text for m, text in self.log if mode is None or m == mode]


@dataclass
class ExperimentConfig:
    command: str = None
    topology: str = None
    figure: str = None
    arrival: str = None
    services: list = field(default_factory=list)
    k: int = None
    l: int = None
    h: int = None
    eps: float = DEFAULT_EPS
    n_jobs: int = DEFAULT_JOBS
    seed: int = DEFAULT_SEED
    taus: tuple = DEFAULT_TAUS
    mode: str = ROUND_ROBIN
    p: list = None
    output_path: str = None
    dependent: bool = False
    gg1: bool = False
    theta_rule: str = THETA_MAX
    replications: int = 1
    quick: bool = False
    inject_fault: bool = False
    threads: int = None

    def validate(self):
        """
        Check what the target modules need before dispatch.

        :raises ParseError: on any inconsistent option
        """
        if self.command not in COMMANDS:
            raise ParseError("Unknown command %r, allowed is one of: %s"
                             % (self.command, ", ".join(COMMANDS)))
        if self.command in ("bound", "simulate"):
            if self.topology not in TOPOLOGIES:
                raise ParseError("Unknown topology %r, allowed is one of: %s"
                                 % (self.topology, ", ".join(TOPOLOGIES)))
            if not self.arrival:
                raise ParseError("--arrival must be set")
            if not self.services:
                raise ParseError("--service must be set")
        if self.command == "figure" and self.figure not in FIGURES + ("all",):
            raise ParseError("Unknown figure %r, allowed is one of: %s"
                             % (self.figure, ", ".join(FIGURES + ("all",))))
        if not 0 < self.eps < 1:
            raise ParseError("--eps must be in (0, 1)")
        for name in ("k", "l", "h"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ParseError("--%s must be >= 1" % name)
        if self.l is not None and self.k is not None and self.l > self.k:
            raise ParseError("--l must not exceed --k")
        if self.n_jobs < 1 or self.replications < 1:
            raise ParseError("--n and --replications must be >= 1")
        if self.mode not in (ROUND_ROBIN, RANDOM):
            raise ParseError("--mode must be det or random")
        if self.theta_rule not in (THETA_MAX, THETA_OPTIMIZE):
            raise ParseError("--theta must be max or optimize")
        if self.seed < 0:
            raise ParseError("--seed must be >= 0")
        return self

    def arrival_law(self):
        return parse_distribution(self.arrival, INTER_ARRIVAL)

    def service_laws(self):
        """
        One law per server. A single --service is repeated k times.
        """
        laws = [parse_distribution(s, SERVICE_TIME) for s in self.services]
        k = self.k
        if k is None:
            return laws
        if len(laws) == 1:
            return laws * k
        if len(laws) != k:
            raise ParseError("got %d --service values for --k %d" % (len(laws), k))
        return laws

    @property
    def workers(self):
        return get_threads(self.threads)
