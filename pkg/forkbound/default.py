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

FB_WARNING = "warning"
FB_ERROR = "error"

# Distribution kinds, as written in literals like ``exp:mu=1``
EXPONENTIAL = "exp"
DETERMINISTIC = "det"
GAUSSIAN = "gauss"
ERLANG = "erlang"

# Roles of a law
INTER_ARRIVAL = "arrival"
SERVICE_TIME = "service"

# Directions of a (sigma, rho) pair / an envelope
ARRIVAL_LOWER = "arrival-lower"
SERVICE_UPPER = "service-upper"

# Parameter types
REAL = 1
INT = 2
MUST = 23

"""
Definition of all known distribution literals. For every kind, the
parameters with (type, default) or (type, MUST). Aliases map alternative
spellings onto the canonical parameter name.
"""

DISTRIBUTIONS = {
    EXPONENTIAL: {
        "rate": (REAL, MUST),
    },
    DETERMINISTIC: {
        "d": (REAL, MUST),
    },
    GAUSSIAN: {
        "mean": (REAL, MUST),
        "var": (REAL, "0"),
    },
    ERLANG: {
        "k": (INT, MUST),
        "rate": (REAL, MUST),
    },
}

ALIASES = {
    "lambda": "rate",
    "mu": "rate",
    "value": "d",
    "eta": "mean",
    "variance": "var",
}

# Numerics
DOMAIN_EPSILON = 1e-9       # distance kept from an MGF pole
STABILITY_MARGIN = 1e-9     # minimal rho_A - rho_S on the G|G|1 branch
GI_TOLERANCE = 1e-12        # slack accepted on the GI stability inequality
MONOTONE_TOLERANCE = 1e-12
ROOT_XTOL = 1e-14
QUANTILE_XTOL = 1e-12
THETA_CEILING = 1e3         # cap for theta when every theta is admissible
THETA_FLOOR_FRACTION = 1e-6
GRID_POINTS = 64
MINIMIZE_XATOL = 1e-10
SERIES_TERMS = 1000000

# Simulation
WARMUP_JOBS = 10000
WARMUP_FRACTION = 0.01
WARMUP_CAP = 0.1
CI_SIGMAS = 3.0
CI_BATCHES = 20

STREAM_ARRIVAL = 0
STREAM_SERVICE = 1
STREAM_COPULA = 2
STREAM_ROUTING = 3
STREAM_REPLICATION = 4

ROUND_ROBIN = "det"
RANDOM = "random"

THETA_MAX = "max"
THETA_OPTIMIZE = "optimize"

THREADS_ENV = "FORKBOUND_THREADS"

# Command line
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2
EXIT_PARSE = 3

TOPOLOGIES = ("forkjoin", "splitmerge", "kl", "thinning", "multistage")
COMMANDS = ("bound", "simulate", "figure", "validate")
FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7")

DEFAULT_EPS = 1e-6
DEFAULT_JOBS = 100000
DEFAULT_SEED = 1
DEFAULT_TAUS = tuple(float(t) for t in range(0, 101, 5))

"""
Parameters of the figure series fig2 .. fig7.
"""

FIGURE_PARAMETERS = {
    "fig2": {
        "mu": 1.0,
        "lambdas": (0.3, 0.7),
        "taus": tuple(float(t) for t in range(0, 51, 2)),
    },
    "fig3": {
        "mu": 1.0,
        "lambdas": (0.3, 0.5, 0.7),
        "ks": tuple(range(1, 21)),
        "eps": 1e-6,
    },
    "fig4": {
        "lambda": 4.0,
        "mu": 1.0,
        "ks": tuple(range(5, 31)),
        "eps": 1e-3,
    },
    "fig5": {
        "mu1": 1.0,
        "mu2s": tuple(0.5 + 0.05 * i for i in range(11)),
        "lambdas": (0.4, 0.8),
        "eps": 1e-6,
    },
    "fig6": {
        "d": 1.25,
        "mu": 1.0,
        "pairs": ((10, 10), (15, 10)),
        "taus": tuple(float(t) for t in range(0, 61, 2)),
        "ls": tuple(range(1, 21)),
        "redundancy": 5,
        "eps": 1e-6,
    },
    "fig7": {
        "lambda": 0.7,
        "rho_s": 1.0,
        "eps": 1e-6,
        "kappas": tuple(10.0 ** (x / 4.0) for x in range(-8, 13)),
    },
}
