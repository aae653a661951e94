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
Exceptions raised by the library. The command line maps ``ParseError`` to
``forkbound.default.EXIT_PARSE`` and the other library errors to
``EXIT_INFEASIBLE``; a failed ``validate`` run exits with ``EXIT_VALIDATION``.
"""


class ForkboundError(Exception):
    pass


class DomainError(ForkboundError, ValueError):
    """
    A parameter lies outside the domain of the operation, e.g. a theta at
    or beyond the pole of an exponential MGF.
    """


class InfeasibleError(ForkboundError):
    """
    No admissible parameter set exists, so no finite bound can be given.
    """


class StabilityError(InfeasibleError):
    """
    The service rate parameter exceeds the arrival rate parameter for
    every admissible theta.
    """


class IndependenceError(ForkboundError):
    """
    The binomial (k,l) aggregation needs independent servers.
    """


class ShapeError(ForkboundError, ValueError):
    pass


class EmptyError(ForkboundError):
    pass


class ParseError(ForkboundError, ValueError):
    pass
