"""Benchmark harness: blocked kernels in every version, sweeps, CSV results."""
from .experiment import BENCHMARKS, RESULT_COLUMNS, VERSIONS, Experiment, ResultRow, write_results
from .harness import SWEEPS, bench, run_experiment, sweep
from .programs import PROGRAMS, make_program

__all__ = [
    "BENCHMARKS", "PROGRAMS", "RESULT_COLUMNS", "SWEEPS", "VERSIONS", "Experiment", "ResultRow",
    "bench", "make_program", "run_experiment", "sweep", "write_results",
]
