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

import getopt
import logging
import sys

from forkbound.bounds import forkjoin_bound, splitmerge_bound, thinning_bound
from forkbound.context import ExperimentConfig, RunContext
from forkbound.default import (EXIT_INFEASIBLE, EXIT_OK, EXIT_PARSE,
                               EXIT_VALIDATION)
from forkbound.document import Table, csv_document, write_document, write_tables
from forkbound.envelopes import (envelope_tail, forkjoin_stage_profile,
                                 optimize_envelopes, stage_envelope)
from forkbound.errors import (DomainError, EmptyError, IndependenceError,
                              InfeasibleError, ParseError, ShapeError)
from forkbound.figures import run_figure
from forkbound.multistage import NetworkTemplate, e2e_search, e2e_split, e2e_tail_at
from forkbound.simulator import (SimResult, make_workload, run_replications,
                                 sim_forkjoin, sim_kl, sim_multistage,
                                 sim_splitmerge, sim_thinning)
from forkbound.util import get_float, get_float_list, get_int
from forkbound.validate import run_validate
from forkbound.version import VERSION, VERSION_STR

log = logging.getLogger("forkbound")

__version__ = VERSION

USAGE = (VERSION_STR + """

USAGE: forkbound COMMAND [ARGS] [options]

COMMAND
  bound TOPOLOGY
    Tail bound curve (tau, bound_p) and eps-quantile of the sojourn time
  simulate TOPOLOGY
    Empirical sojourn tail next to the bound
    (tau, empirical_p, ci_halfwidth, bound_p)
  figure NAME
    Data series of fig2 .. fig7, or "all", one CSV per table
  validate
    Run all checks and print a pass/fail table

TOPOLOGY
  forkjoin, splitmerge, kl, thinning, multistage

[options]
  --arrival:
    Inter-arrival law, e.g. exp:lambda=0.7, det:d=1.25,
    gauss:mean=1,var=0.25, erlang:k=3,lambda=1
  --service:
    Service law, e.g. exp:mu=1. Repeat once per server for
    heterogeneous servers; a single value is used for all k
  --k, --l, --h:
    Servers per stage, tasks needed (kl), number of stages
  --eps:
    Violation probability of the quantile (default 1e-6)
  --n:
    Jobs per simulation run
  --seed:
    Seed of all random streams
  --tau:
    Comma separated tau values
  --mode:
    Thinning mode, det (round-robin) or random
  --p:
    Comma separated routing probabilities for random thinning
  --theta:
    max (largest admissible theta, default) or optimize
  --gg1:
    Use the bound without the iid assumption
  --dependent:
    Servers are not independent; simulation drives all tasks of a
    job by one common uniform
  --replications:
    Independent simulation runs, pooled
  --out, -o:
    Output file (bound, simulate) or directory (figure)
  --quick:
    Shorter simulations in validate
  --inject-fault:
    Halve every bound in validate; the run must fail
  --debug, -d:
    Show debugging informations
  --help, -h:
    Show this help text
  --quiet, -q:
    Show no messages
  --version:
    Show version information
  --warn, -w:
    Show warnings
  --profile:
    Run under cProfile
""").strip()

COPYRIGHT = VERSION_STR

LOG_FORMAT = "%(levelname)s [%(name)s] %(message)s"
LOG_FORMAT_DEBUG = "%(levelname)s [%(name)s] %(pathname)s line %(lineno)d: %(message)s"

LONG_OPTIONS = [
    "arrival=", "service=", "k=", "l=", "h=", "eps=", "n=", "seed=", "tau=",
    "mode=", "p=", "theta=", "out=", "gg1", "dependent", "replications=",
    "threads=", "quick", "inject-fault", "debug", "warn", "quiet", "help",
    "version", "profile",
]


def usage():
    print(USAGE)


def show_logging(debug=False):
    """
    Shortcut for library users to see what is going on.
    """
    logging.basicConfig(level=logging.DEBUG if debug else logging.WARNING,
                        format=LOG_FORMAT_DEBUG if debug else LOG_FORMAT)


# =========================================================================
# Bounds
# =========================================================================

def _theta_metadata(context, thetas, prefactors):
    context["theta"] = ",".join(repr(t) for t in thetas)
    # identical servers share one merged term
    context["prefactor"] = ",".join(repr(a) for a in prefactors)


def bound_curve(cfg, context):
    """
    Tail bound of the configured system as a function of tau, together
    with its eps-quantile. Optimized internals go into ``context``.
    """
    arrival = cfg.arrival_law()
    services = cfg.service_laws()
    iid = not cfg.gg1
    topology = cfg.topology
    context.update({"command": cfg.command, "topology": topology, "arrival": str(arrival),
                    "services": ";".join(str(s) for s in services), "eps": cfg.eps})

    if topology in ("forkjoin", "splitmerge", "thinning"):
        if topology == "forkjoin":
            bound, thetas = forkjoin_bound(arrival, services, iid, cfg.theta_rule, cfg.eps)
        elif topology == "splitmerge":
            bound, thetas = splitmerge_bound(arrival, services, iid, cfg.theta_rule, cfg.eps)
        else:
            context["mode"] = cfg.mode
            bound, thetas = thinning_bound(arrival, services, cfg.mode, cfg.p, iid,
                                           cfg.theta_rule, cfg.eps)
        _theta_metadata(context, thetas, [a for a, _, _ in bound.terms])
        context["bound"] = "GI|GI|1" if iid else "G|G|1"
        return bound, bound.quantile(cfg.eps)

    if topology == "kl":
        k = len(services)
        l = cfg.l or k
        independent = not cfg.dependent
        # fails early for dependent servers with l < k
        forkjoin_stage_profile(k, lambda tau: 0.0, independent, l)
        if len(set(services)) != 1:
            raise DomainError("the (k,l) bound needs identical service laws")
        choice = optimize_envelopes(
            arrival, services[0], cfg.eps,
            stage=lambda srv: stage_envelope(k, srv, independent, l))
        context.update({"k": k, "l": l, "theta_a": choice.theta_a,
                        "theta_s": choice.theta_s, "error_split": choice.fraction})
        return (lambda tau: envelope_tail(choice.arrival, choice.service, tau)), choice.tau

    if topology == "multistage":
        if len(set(services)) != 1:
            raise DomainError("the multistage bound needs identical service laws")
        h = cfg.h or 1
        net, quantile = e2e_search(NetworkTemplate(h, len(services), arrival, services[0]),
                                   cfg.eps)
        split = e2e_split(net, cfg.eps)
        context.update({"h": h, "k": len(services), "beta": net.beta,
                        "theta_a": net.arrival.decay or 0.0, "theta_s": net.stage.theta_s,
                        "error_split": split.fraction})
        return (lambda tau: e2e_tail_at(net, tau)), quantile

    raise DomainError("Unknown topology %r" % (topology,))


def run_bound(cfg, context=None):
    context = context or RunContext()
    bound, quantile = bound_curve(cfg, context)
    context["quantile"] = quantile
    rows = [(float(tau), float(bound(tau))) for tau in cfg.taus]
    return Table("bound", ("tau", "bound_p"), rows, context.metadata)


# =========================================================================
# Simulation
# =========================================================================

def _simulate_once(cfg, arrival, services):
    topology = cfg.topology

    def run(seed):
        if topology == "thinning":
            return sim_thinning(arrival, services, cfg.mode, cfg.n_jobs, seed, cfg.p)
        if topology == "multistage":
            return sim_multistage(cfg.h or 1, len(services), arrival, services[0],
                                  cfg.n_jobs, seed)
        w = make_workload(arrival, services, cfg.n_jobs, seed, dependent=cfg.dependent)
        if topology == "forkjoin":
            return sim_forkjoin(w)
        if topology == "splitmerge":
            return sim_splitmerge(w)
        if topology == "kl":
            return sim_kl(w, cfg.l or len(services))
        raise DomainError("Unknown topology %r" % (topology,))

    return run


def run_simulate(cfg, context=None):
    context = context or RunContext()
    bound, quantile = bound_curve(cfg, context)
    arrival = cfg.arrival_law()
    services = cfg.service_laws()
    run = _simulate_once(cfg, arrival, services)
    if cfg.replications > 1:
        result = SimResult.pooled(run_replications(run, cfg.seed, cfg.replications,
                                                   cfg.workers))
    else:
        result = run(cfg.seed)
    if "truncated_at_zero" in result.metadata:
        log.warning(context.warning("Gaussian draws truncated at 0: %s",
                                    result.metadata["truncated_at_zero"]))
    context.update({"quantile": quantile, "n": cfg.n_jobs, "seed": cfg.seed,
                    "replications": cfg.replications, "warmup": result.warmup_discard,
                    "samples": len(result.samples), "dependent": cfg.dependent})
    rows = []
    for tau in cfg.taus:
        p, half = result.empirical_tail(tau)
        rows.append((float(tau), p, half, float(bound(tau))))
    return Table("simulate", ("tau", "empirical_p", "ci_halfwidth", "bound_p"), rows,
                 context.metadata)


# =========================================================================
# Options
# =========================================================================

def parse_args(argv):
    """
    ExperimentConfig and logging flags from the command line.

    :raises ParseError: on unknown options or malformed values
    """
    try:
        opts, args = getopt.gnu_getopt(argv, "dhqwo:", LONG_OPTIONS)
    except getopt.GetoptError as e:
        raise ParseError(str(e))

    cfg = ExperimentConfig()
    flags = {"help": False, "version": False, "quiet": False,
             "log_level": logging.ERROR, "log_format": LOG_FORMAT}

    for o, a in opts:
        if o in ("-h", "--help"):
            flags["help"] = True
        elif o == "--version":
            flags["version"] = True
        elif o in ("-q", "--quiet"):
            flags["quiet"] = True
        elif o in ("-w", "--warn"):
            flags["log_level"] = min(flags["log_level"], logging.WARN)
        elif o in ("-d", "--debug"):
            flags["log_level"] = logging.DEBUG
            flags["log_format"] = LOG_FORMAT_DEBUG
        elif o == "--arrival":
            cfg.arrival = a
        elif o == "--service":
            cfg.services.append(a)
        elif o in ("--k", "--l", "--h"):
            setattr(cfg, o[2:], get_int(a, o))
        elif o == "--eps":
            cfg.eps = get_float(a, o)
        elif o == "--n":
            cfg.n_jobs = get_int(a, o)
        elif o == "--seed":
            cfg.seed = get_int(a, o)
        elif o == "--tau":
            cfg.taus = tuple(get_float_list(a, o))
        elif o == "--mode":
            cfg.mode = a
        elif o == "--p":
            cfg.p = get_float_list(a, o)
        elif o == "--theta":
            cfg.theta_rule = a
        elif o in ("-o", "--out"):
            cfg.output_path = a
        elif o == "--gg1":
            cfg.gg1 = True
        elif o == "--dependent":
            cfg.dependent = True
        elif o == "--replications":
            cfg.replications = get_int(a, o)
        elif o == "--threads":
            cfg.threads = get_int(a, o)
        elif o == "--quick":
            cfg.quick = True
        elif o == "--inject-fault":
            cfg.inject_fault = True

    if flags["help"] or flags["version"]:
        return cfg, flags

    if not args:
        raise ParseError("missing command")
    cfg.command = args[0]
    rest = args[1:]
    if cfg.command in ("bound", "simulate"):
        if len(rest) != 1:
            raise ParseError("%s needs exactly one topology" % cfg.command)
        cfg.topology = rest[0]
    elif cfg.command == "figure":
        if len(rest) != 1:
            raise ParseError("figure needs exactly one name")
        cfg.figure = rest[0]
    elif rest:
        raise ParseError("unexpected arguments: %s" % " ".join(rest))
    return cfg.validate(), flags


def dispatch(cfg, context):
    """
    Run one command; returns the exit code.
    """
    if cfg.command == "figure":
        tables = run_figure(cfg.figure)
        for path in write_tables(tables, cfg.output_path, context):
            if path:
                log.info("wrote %s", path)
        return EXIT_OK
    if cfg.command == "validate":
        passed, table = run_validate(cfg.seed, cfg.quick, cfg.inject_fault, context)
        write_document(csv_document(table.columns, table.rows, table.metadata),
                       cfg.output_path)
        return EXIT_OK if passed else EXIT_VALIDATION
    if cfg.command == "bound":
        table = run_bound(cfg, context)
    else:
        table = run_simulate(cfg, context)
    write_document(csv_document(table.columns, table.rows, table.metadata, context),
                   cfg.output_path)
    return EXIT_OK


def _diagnostic(e):
    sys.stderr.write("ERROR: %s: %s\n" % (e.__class__.__name__, e))


def execute(argv=None):
    """
    Command line entry without ``sys.exit``; returns the exit code.
    """
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg, flags = parse_args(argv)
    except ParseError as e:
        _diagnostic(e)
        usage()
        return EXIT_PARSE

    if flags["help"]:
        usage()
        return EXIT_OK
    if flags["version"]:
        print(COPYRIGHT)
        return EXIT_OK

    if not flags["quiet"]:
        logging.basicConfig(level=flags["log_level"], format=flags["log_format"])

    context = RunContext(debug=flags["log_level"] == logging.DEBUG)
    try:
        code = dispatch(cfg, context)
    except ParseError as e:
        _diagnostic(e)
        return EXIT_PARSE
    except (InfeasibleError, IndependenceError, DomainError, ShapeError, EmptyError) as e:
        _diagnostic(e)
        return EXIT_INFEASIBLE
    if context.warn:
        log.info("%d warning(s)", context.warn)
    return code


def command():
    if "--profile" in sys.argv:
        print("*** PROFILING ENABLED")
        import cProfile as profile
        import pstats

        prof = profile.Profile()
        code = prof.runcall(execute)
        pstats.Stats(prof).strip_dirs().sort_stats("cumulative").print_stats()
    else:
        code = execute()
    sys.exit(code)
