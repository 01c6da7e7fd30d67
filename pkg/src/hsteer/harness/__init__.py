"""CLI, configuration, run orchestration, and report emission."""

from .config import RunConfig, build_config
from .runs import (
    AvgPowerResult,
    CompileResult,
    EndToEndReport,
    PlanResult,
    SimulateResult,
    compile_plan,
    run_avg_power,
    run_bench_bp,
    run_compile,
    run_end_to_end,
    run_lie_closure,
    run_plan,
    run_simulate,
    write_ledger_csv,
)

__all__ = [
    "RunConfig",
    "build_config",
    "AvgPowerResult",
    "CompileResult",
    "EndToEndReport",
    "PlanResult",
    "SimulateResult",
    "compile_plan",
    "run_avg_power",
    "run_bench_bp",
    "run_compile",
    "run_end_to_end",
    "run_lie_closure",
    "run_plan",
    "run_simulate",
    "write_ledger_csv",
]
