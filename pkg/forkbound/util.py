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
import math
import os

import numpy as np
from scipy import optimize

from forkbound.default import (GRID_POINTS, MINIMIZE_XATOL, THREADS_ENV)
from forkbound.errors import ForkboundError, ParseError

log = logging.getLogger("forkbound")


def to_list(value):
    if value is None:
        return []
    if type(value) not in (list, tuple):
        return [value]
    return list(value)


def str_to_bool(value):
    return str(value).strip().lower() in ("1", "y", "yes", "true", "on")


def get_float(value, name="value"):
    try:
        result = float(str(value).strip())
    except (TypeError, ValueError):
        raise ParseError("%s expects a number, got %r" % (name, value))
    if math.isnan(result):
        raise ParseError("%s must not be NaN" % name)
    return result


def get_int(value, name="value"):
    try:
        result = float(str(value).strip())
    except (TypeError, ValueError):
        raise ParseError("%s expects an integer, got %r" % (name, value))
    if not result.is_integer():
        raise ParseError("%s expects an integer, got %r" % (name, value))
    return int(result)


def get_float_list(value, name="value"):
    """
    Parse a comma separated list of numbers, e.g. ``"10,20,30"``.
    """
    if isinstance(value, (list, tuple)):
        return [get_float(v, name) for v in value]
    parts = [p for p in str(value).split(",") if p.strip()]
    if not parts:
        raise ParseError("%s expects a comma separated list of numbers" % name)
    return [get_float(p, name) for p in parts]


def get_threads(default=None):
    """
    Number of worker threads, capped by the ``FORKBOUND_THREADS`` environment
    variable.
    """
    threads = default or os.cpu_count() or 1
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            cap = int(env)
        except ValueError:
            log.warning("Ignoring %s=%r, not an integer", THREADS_ENV, env)
        else:
            threads = min(threads, max(1, cap))
    return max(1, threads)


def _guarded(func):
    def helper(x):
        try:
            value = float(func(x))
        except (ArithmeticError, ValueError, ForkboundError):
            return np.inf
        if math.isnan(value):
            return np.inf
        return value
    return helper


def minimize_on_interval(func, lo, hi, points=GRID_POINTS, log_grid=False,
                         candidates=(), xatol=MINIMIZE_XATOL):
    """
    Minimize a scalar function on [lo, hi].

    The interval is scanned on a grid (log-spaced if ``log_grid``), the best
    grid cell is refined with a bounded Brent search, and the result is
    compared with the grid, both endpoints and any extra ``candidates``.
    Points where ``func`` raises an arithmetic or domain error count as
    +inf.

    :param func: objective, float -> float
    :param lo: lower end of the interval
    :param hi: upper end of the interval
    :param candidates: extra abscissae that are always evaluated
    :return: (x, f(x)); f(x) is inf if no finite value was found
    """
    f = _guarded(func)
    if hi < lo:
        lo, hi = hi, lo
    if hi == lo:
        return lo, f(lo)
    if log_grid and lo > 0:
        grid = np.geomspace(lo, hi, points)
    else:
        grid = np.linspace(lo, hi, points)
    values = np.array([f(x) for x in grid])
    i = int(np.argmin(values))
    best_x, best_f = float(grid[i]), float(values[i])

    if np.isfinite(best_f):
        a = float(grid[max(i - 1, 0)])
        b = float(grid[min(i + 1, len(grid) - 1)])
        if b > a:
            res = optimize.minimize_scalar(
                f, bounds=(a, b), method="bounded",
                options={"xatol": xatol * max(1.0, abs(b))})
            if res.fun < best_f:
                best_x, best_f = float(res.x), float(res.fun)

    for x in candidates:
        if x is None or not (lo <= x <= hi):
            continue
        value = f(x)
        if value < best_f:
            best_x, best_f = float(x), value
    return best_x, best_f


def find_root(func, lo, hi, xtol):
    """
    Root of a monotone function on [lo, hi] by Brent's method. Both ends
    must bracket a sign change.
    """
    return float(optimize.brentq(func, lo, hi, xtol=xtol, maxiter=500))
