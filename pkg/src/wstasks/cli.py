"""Command line entry point: ``wstasks bench|sweep|analyze|pipeline|backends``.

Exit status: 0 on success, 1 on configuration errors, 2 when a benchmark's
output fails validation.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .bench import BENCHMARKS, SWEEPS, VERSIONS, Experiment, bench, sweep, write_results
from .errors import ConfigError, ValidationFailed


def _int_list(text):
    return [int(float(x)) for x in text.split(",") if x.strip()]


def _add_experiment_args(p, with_name=True):
    if with_name:
        p.add_argument("name", choices=BENCHMARKS, help="benchmark to run")
    p.add_argument("--version", default="tasks", choices=VERSIONS)
    p.add_argument("--ps", type=int, default=16384, help="problem size")
    p.add_argument("--ts", type=int, default=1024, help="block (task) size")
    p.add_argument("--cs", type=int, default=None, help="chunksize (default TS/N)")
    p.add_argument("--team-size", type=int, default=None, help="collaborators N")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--socket-size", type=int, default=None)
    p.add_argument("--deps", default="region", choices=("discrete", "region"))
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--intensity", type=int, default=1,
                   help="multiply-adds per element in daxpy")
    p.add_argument("--iters", type=int, default=16, help="CG iterations per rep")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--task-ms", type=float, default=20.0, help="task length for the overlap benchmark")
    p.add_argument("--no-pin", action="store_true", help="do not pin worker threads")
    p.add_argument("--results", default=None, help="results CSV (stdout if omitted)")


def _experiment(args, benchmark) -> Experiment:
    return Experiment(benchmark=benchmark, version=args.version, ps=args.ps, ts=args.ts,
                      cs=args.cs, n=args.team_size, workers=args.workers, reps=args.reps,
                      deps=args.deps, socket_size=args.socket_size, intensity=args.intensity,
                      iters=args.iters, seed=args.seed, pin=not args.no_pin,
                      task_ms=args.task_ms)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wstasks", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="run one benchmark configuration")
    _add_experiment_args(p)
    p.add_argument("--trace", default=None, help="write the execution trace CSV here")

    p = sub.add_parser("sweep", help="run a parameter sweep")
    p.add_argument("kind", choices=SWEEPS)
    p.add_argument("--benchmark", default="daxpy", choices=BENCHMARKS)
    p.add_argument("--versions", default=None,
                   help="comma separated versions (default: --version)")
    p.add_argument("--points", default=None,
                   help="comma separated TS, CS or worker counts; modes for depmode")
    _add_experiment_args(p, with_name=False)

    p = sub.add_parser("analyze", help="summarize a trace CSV")
    p.add_argument("trace")
    p.add_argument("--dag", default=None, help="write dependence edges CSV here")

    p = sub.add_parser("pipeline", help="run rounds of independent worksharing loops")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--team-size", type=int, default=2)
    p.add_argument("--rounds", type=int, default=2)
    p.add_argument("--trace", default=None, help="write the execution trace CSV here")

    p = sub.add_parser("backends", help="time compiled vs numpy kernels")
    p.add_argument("--size", type=int, default=1 << 18)
    p.add_argument("--threads", type=int, default=4)
    p.add_argument("--reps", type=int, default=3)
    return parser


def _emit(rows, dest):
    text = write_results(rows, dest)
    if dest is None:
        sys.stdout.write(text)


def _analyze(args):
    from .metrics import detect_pipelining, export_dag, release_counts, utilization
    from .trace import ExecutionTrace

    trace = ExecutionTrace.from_csv(args.trace)
    util = utilization(trace)
    for w, u in sorted(util.items()):
        print(f"worker {w:3d} busy {u:6.1%}")
    print(f"tasks released: {len(release_counts(trace))}")
    print(f"pipelined region overlaps: {len(detect_pipelining(trace))}")
    if args.dag:
        export_dag(trace, args.dag)
    return 0


def _pipeline(args):
    from .bench.pipeline import run_staged_loops
    from .metrics import dependence_violations, detect_pipelining

    trace, _ = run_staged_loops(args.workers, args.team_size, rounds=args.rounds)
    if args.trace:
        trace.to_csv(args.trace)
    for worker, a, b in detect_pipelining(trace):
        print(f"worker {worker} started region {b} before region {a} was released")
    print(f"dependence violations: {len(dependence_violations(trace))}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "bench":
            _emit([bench(_experiment(args, args.name), trace_path=args.trace)], args.results)
        elif args.command == "sweep":
            if args.kind == "depmode":
                points = args.points.split(",") if args.points else None
            else:
                points = _int_list(args.points) if args.points else None
            versions = args.versions.split(",") if args.versions else None
            rows = sweep(args.kind, _experiment(args, args.benchmark), points, versions)
            _emit(rows, args.results)
        elif args.command == "analyze":
            return _analyze(args)
        elif args.command == "pipeline":
            return _pipeline(args)
        elif args.command == "backends":
            from .bench.backends import compare_backends, to_csv

            sys.stdout.write(to_csv(compare_backends(args.size, args.threads, args.reps)))
    except ValidationFailed as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    return 0
