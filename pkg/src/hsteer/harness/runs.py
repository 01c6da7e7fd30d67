"""Run orchestration and report emission for all experiment subcommands.

Each run_* function executes one pipeline, writes its delimited outputs
(CSV with headers) plus a PNG figure into the configured output directory,
and returns an in-memory result object for programmatic use. Reports are
reproducible bit for bit for a fixed (config, seed): no timestamps, fixed
float formatting (repr round-trip), deterministic ordering.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import BudgetInfeasible, EdgeSpill, SteeringError
from ..evolution import (
    ControlSchedule,
    ControlSegment,
    HamiltonianSpec,
    accumulation_table,
    drift_by_name,
    embed_two_level_generator,
    load_schedule_jsonl,
    save_schedule_jsonl,
    simulate_schedule,
    step_propagator,
)
from ..operators import apply_primitive, build_bp, remainder_bound, shift_approx_error
from ..oscillator import GENERATOR_SETS, average_power_trials, lie_closure_dim
from ..planner import (
    ErrorBudget,
    Plan,
    allocate_budget,
    apply_plan_exact,
    load_plan_jsonl,
    plan_application_window,
    principal_generator,
    save_plan_jsonl,
    simulation_window,
    synthesize_plan,
)
from ..statespace import (
    IndexWindow,
    StateVector,
    basis_state,
    distance,
    embed,
    load_state_csv,
    normalize,
    save_state_csv,
    truncate_tail,
)
from .config import RunConfig
from . import figures


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _budget_csv_row(budget: ErrorBudget) -> list:
    return [
        _fmt(budget.delta),
        _fmt(budget.delta_tail),
        _fmt(budget.eps_shift),
        _fmt(budget.eps_trotter),
        _fmt(budget.eps_u2),
        budget.L,
        budget.N,
        "" if budget.p is None else budget.p,
        _fmt(budget.dt),
        _fmt(budget.lhs()),
    ]


_LEDGER_HEADER = [
    "delta", "delta_tail", "eps_shift", "eps_trotter", "eps_u2",
    "L", "N", "p", "dt", "lhs",
]


def write_ledger_csv(path: Path, budgets: list[ErrorBudget]) -> None:
    _write_csv(path, _LEDGER_HEADER, [_budget_csv_row(b) for b in budgets])


def compile_plan(
    plan: Plan, budget: ErrorBudget, h0: HamiltonianSpec, window: IndexWindow
) -> ControlSchedule:
    """Turn every primitive into one piecewise-constant pulse segment.

    Shifts become (dt, g = direction/dt, B_p); two-level blocks become
    (dt, g = 1/dt, H_u) with H_u the principal logarithm generator embedded
    on indices {0, 1}.
    """
    if plan.L and budget.p is None:
        raise ValueError("plan contains shifts but the budget fixes no band p")
    segments = []
    dt = budget.dt
    for op in plan.ops:
        if op.is_shift:
            segments.append(
                ControlSegment(
                    duration=dt,
                    amplitude=op.direction / dt,
                    operator=build_bp(budget.p, window),
                    h0=h0,
                    operator_id="bp",
                    p=budget.p,
                )
            )
        else:
            g2 = principal_generator(op.u)
            segments.append(
                ControlSegment(
                    duration=dt,
                    amplitude=1.0 / dt,
                    operator=embed_two_level_generator(g2, window),
                    h0=h0,
                    operator_id="u2",
                    generator2=g2,
                )
            )
    return ControlSchedule(window, tuple(segments), ledger=budget)


@dataclass
class EndToEndReport:
    passed: bool
    failure: str | None
    delta: float
    delta_tail: float | None = None
    achieved: float | None = None
    budget: ErrorBudget | None = None
    plan: Plan | None = None
    window: IndexWindow | None = None
    accumulation: list[dict] | None = None
    report_path: Path | None = None


def _report_lines(
    s0_file: str,
    target_file: str,
    report: EndToEndReport,
    tail_tol: float,
) -> list[str]:
    lines = [
        "end-to-end steering report",
        "==========================",
        f"s0_file:      {s0_file}",
        f"target_file:  {target_file}",
        f"delta:        {_fmt(report.delta)}",
        f"tail_tol:     {_fmt(tail_tol)}",
    ]
    if report.delta_tail is not None:
        lines.append(f"delta_tail:   {_fmt(report.delta_tail)}")
    if report.plan is not None:
        lines += [
            f"plan_L:       {report.plan.L}",
            f"plan_N:       {report.plan.N}",
            f"excursion:    [{report.plan.excursion[0]}, {report.plan.excursion[1]}]",
        ]
    if report.budget is not None:
        b = report.budget
        lines += [
            f"p:            {b.p}",
            f"dt:           {_fmt(b.dt)}",
            f"eps_shift:    {_fmt(b.eps_shift)}",
            f"eps_trotter:  {_fmt(b.eps_trotter)}",
            f"eps_u2:       {_fmt(b.eps_u2)}",
            f"ledger_lhs:   {_fmt(b.lhs())}",
            f"ledger_ok:    {b.satisfied()}",
        ]
    if report.window is not None:
        w = report.window
        lines.append(f"window:       [{w.lo}, {w.hi}] (d={w.dim})")
    if report.achieved is not None:
        lines.append(f"achieved:     {_fmt(report.achieved)}")
    lines.append("result:       " + ("PASS" if report.passed else f"FAILED: {report.failure}"))
    return lines


def run_end_to_end(
    s0_file: str | Path,
    target_file: str | Path,
    delta: float,
    config: RunConfig,
    h0: HamiltonianSpec | None = None,
) -> EndToEndReport:
    """Full pipeline: truncate, plan, budget, compile, simulate, report.

    The report PASSes when the compiled evolution lands within delta of the
    target; otherwise it is marked FAILED and names the first violated
    inequality (budget line, window cap, edge spill, parse error, or the
    achieved distance itself).
    """
    out = config.ensure_output_dir()
    h0 = h0 or drift_by_name("rotator")
    report = EndToEndReport(passed=False, failure=None, delta=delta)

    try:
        if not 0.0 < delta < 2.0:
            raise ValueError(f"delta must be in (0, 2), got {delta}")
        s0 = normalize(load_state_csv(s0_file))
        target = normalize(load_state_csv(target_file))
    except (ValueError, OSError, SteeringError) as exc:
        report.failure = f"parse: {exc}"
        _emit_end_to_end(out, s0_file, target_file, report, config)
        return report

    try:
        _, tail0 = truncate_tail(s0, config.tail_tol)
        _, tail1 = truncate_tail(target, config.tail_tol)
        delta_tail = 2.0 * (tail0 + tail1)
        report.delta_tail = delta_tail

        plan = synthesize_plan(s0, target, config.tail_tol)
        report.plan = plan

        budget = allocate_budget(
            plan, delta, delta_tail, h0, s0,
            p_max=config.p_max, dt_min=config.dt_min, dt_start=config.dt_start,
            max_window=config.max_window,
        )
        report.budget = budget
        report.window = window = simulation_window(plan, s0, budget.p or 0)

        schedule = compile_plan(plan, budget, h0, window)
        s0w = embed(s0, window)
        targetw = embed(target, window)

        # one propagator per distinct segment, reused by trajectory and table
        props: dict = {}
        approx_steps = []
        for seg in schedule.segments:
            key = seg.cache_key()
            if key not in props:
                props[key] = step_propagator(seg, window)
            approx_steps.append(lambda st, u=props[key]: u.apply(st))
        exact_steps = [lambda st, op=op: apply_primitive(st, op) for op in plan.ops]

        cur = s0w
        traj = [cur]
        for step in approx_steps:
            cur = step(cur)
            traj.append(cur)
        final = cur

        rows = accumulation_table(s0w, exact_steps, approx_steps)
        for row, op in zip(rows, plan.ops):
            row["op"] = op.kind
        report.accumulation = rows

        achieved = distance(final, targetw)
        report.achieved = achieved
        if achieved <= delta:
            report.passed = True
        else:
            report.failure = (
                f"distance line violated: achieved {_fmt(achieved)} > delta {_fmt(delta)}"
            )

        _write_csv(
            out / "accumulation.csv",
            ["step", "op", "step_error", "cum_bound", "actual_dev"],
            [
                [r["step"], r["op"], _fmt(r["step_error"]), _fmt(r["cum_bound"]),
                 _fmt(r["actual_dev"])]
                for r in rows
            ],
        )
        save_state_csv(out / "final_state.csv", final)
        write_ledger_csv(out / "ledger.csv", [budget])
        if config.figures:
            figures.save_accumulation_figure(rows, achieved, delta, out / "end_to_end.png")
    except (BudgetInfeasible, EdgeSpill) as exc:
        kind = "budget" if isinstance(exc, BudgetInfeasible) else "edge spill"
        report.failure = f"{kind}: {exc}"
        if report.budget is not None:
            write_ledger_csv(out / "ledger.csv", [report.budget])

    _emit_end_to_end(out, s0_file, target_file, report, config)
    return report


def _emit_end_to_end(out, s0_file, target_file, report, config) -> None:
    path = out / "report.txt"
    lines = _report_lines(str(s0_file), str(target_file), report, config.tail_tol)
    path.write_text("\n".join(lines) + "\n")
    report.report_path = path


def _random_interior_states(
    w: IndexWindow, count: int, width: int, margin: int, rng: np.random.Generator
) -> list[StateVector]:
    lo_c = w.lo + margin
    hi_c = w.hi - margin - (width - 1)
    if lo_c > hi_c:
        raise ValueError("window too small for the requested interior margin")
    states = []
    for _ in range(count):
        start = int(rng.integers(lo_c, hi_c + 1))
        coeffs = rng.standard_normal(width) + 1j * rng.standard_normal(width)
        sv = normalize(StateVector(IndexWindow(start, start + width - 1), coeffs))
        states.append(embed(sv, w))
    return states


def run_bench_bp(
    p_list: list[int],
    n_quad: int | None,
    config: RunConfig,
    *,
    window_radius: int = 128,
    samples: int = 20,
    support_width: int = 1,
) -> list[dict]:
    """Tabulate the shift-approximation bound against measured state errors.

    For each band p, reports remainder_bound(p) and the worst measured
    ||shift(phi) - exp(i B_p) phi|| over `samples` random interior states
    (shared across the whole p list, kept max(p)+2 indices clear of the
    window edges).

    With the default width-1 samples (random position and phase) the
    measured error equals the bound up to quadrature and window-truncation
    allowances. Wider supports can exceed the bound: the approximant's
    defect is concentrated at one point of the spectral circle, where a
    superposition's spectral density may peak above 1.
    """
    out = config.ensure_output_dir()
    w = IndexWindow(-window_radius, window_radius)
    rng = np.random.default_rng(config.seed)
    margin = max(p_list) + 2
    states = _random_interior_states(w, samples, support_width, margin, rng)

    def one(p: int) -> dict:
        return {
            "p": p,
            "epsilon_bound": remainder_bound(p, n_quad),
            "epsilon_measured": shift_approx_error(p, w, states),
        }

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(one, p_list))
    else:
        rows = [one(p) for p in p_list]

    _write_csv(
        out / "bench_bp.csv",
        ["p", "epsilon_bound", "epsilon_measured"],
        [[r["p"], _fmt(r["epsilon_bound"]), _fmt(r["epsilon_measured"])] for r in rows],
    )
    if config.figures:
        figures.save_bench_bp_figure(rows, out / "bench_bp.png")
    return rows


@dataclass
class AvgPowerResult:
    kind: str
    N: int
    trials: int
    seed: int
    mean: float
    stderr: float


def run_avg_power(
    kind: str, N: int, trials: int, seed: int, config: RunConfig, block_size: int = 4
) -> AvgPowerResult:
    """Monte-Carlo average power of one operator kind; emits (N, mean, stderr)."""
    out = config.ensure_output_dir()
    estimates = average_power_trials(kind, N, trials, seed, block_size)
    mean = float(np.mean(estimates))
    stderr = float(np.std(estimates, ddof=1) / np.sqrt(trials))
    _write_csv(
        out / f"avg_power_{kind}.csv",
        ["N", "mean", "stderr"],
        [[N, _fmt(mean), _fmt(stderr)]],
    )
    if config.figures:
        figures.save_avg_power_figure(
            estimates, mean, stderr, kind, out / f"avg_power_{kind}.png"
        )
    return AvgPowerResult(kind, N, trials, seed, mean, stderr)


def run_lie_closure(
    set_name: str,
    d: int,
    d_int_list: list[int],
    tol: float,
    max_dim: int,
    config: RunConfig,
) -> list[dict]:
    """Lie-closure dimension for a named generator set over interior sizes."""
    out = config.ensure_output_dir()
    try:
        gen_builder = GENERATOR_SETS[set_name]
    except KeyError:
        raise ValueError(
            f"unknown generator set {set_name!r}; known: {sorted(GENERATOR_SETS)}"
        ) from None
    generators = gen_builder(d)

    def one(d_int: int) -> dict:
        return {
            "d_int": d_int,
            "closure_dim": lie_closure_dim(generators, d_int, tol=tol, max_dim=max_dim),
        }

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(one, d_int_list))
    else:
        rows = [one(di) for di in d_int_list]

    _write_csv(
        out / f"lie_closure_{set_name}.csv",
        ["d_int", "closure_dim"],
        [[r["d_int"], r["closure_dim"]] for r in rows],
    )
    if config.figures:
        figures.save_lie_closure_figure(rows, out / f"lie_closure_{set_name}.png")
    return rows


@dataclass
class PlanResult:
    plan: Plan
    exact_residual: float
    plan_path: Path


def run_plan(
    s0_file: str | Path, target_file: str | Path, tail_tol: float, config: RunConfig
) -> PlanResult:
    """Synthesize a steering plan and verify it by exact application."""
    out = config.ensure_output_dir()
    s0 = normalize(load_state_csv(s0_file))
    target = normalize(load_state_csv(target_file))
    plan = synthesize_plan(s0, target, tail_tol)

    w = plan_application_window(plan, s0)
    final = apply_plan_exact(embed(s0, w), plan)
    residual = distance(final, target)

    plan_path = out / "plan.jsonl"
    save_plan_jsonl(plan_path, plan)
    summary = [
        "steering plan summary",
        "=====================",
        f"s0_file:        {s0_file}",
        f"target_file:    {target_file}",
        f"tail_tol:       {_fmt(tail_tol)}",
        f"ops:            {len(plan.ops)}",
        f"L (shifts):     {plan.L}",
        f"N (rotations):  {plan.N}",
        f"excursion:      [{plan.excursion[0]}, {plan.excursion[1]}]",
        f"exact_residual: {_fmt(residual)}",
    ]
    (out / "plan_summary.txt").write_text("\n".join(summary) + "\n")
    return PlanResult(plan, residual, plan_path)


@dataclass
class CompileResult:
    schedule: ControlSchedule
    budget: ErrorBudget
    schedule_path: Path


def run_compile(
    plan_file: str | Path,
    delta: float,
    h0_name: str,
    config: RunConfig,
    s0_file: str | Path | None = None,
    delta_tail: float = 0.0,
) -> CompileResult:
    """Budget a stored plan and compile it into a pulse schedule.

    Pulse errors are state dependent, so the budget is measured on a trial
    state: the state in s0_file when given, else the basis state e_0.
    """
    out = config.ensure_output_dir()
    plan = load_plan_jsonl(plan_file)
    h0 = drift_by_name(h0_name)
    if s0_file is not None:
        trial = normalize(load_state_csv(s0_file))
    else:
        trial = basis_state(0, IndexWindow(0, 1))
    budget = allocate_budget(
        plan, delta, delta_tail, h0, trial,
        p_max=config.p_max, dt_min=config.dt_min, dt_start=config.dt_start,
        max_window=config.max_window,
    )
    window = simulation_window(plan, trial, budget.p or 0)
    schedule = compile_plan(plan, budget, h0, window)
    schedule_path = out / "schedule.jsonl"
    save_schedule_jsonl(schedule_path, schedule)
    write_ledger_csv(out / "ledger.csv", [budget])
    if config.figures:
        figures.save_budget_figure(
            [
                {
                    "L": budget.L, "N": budget.N, "eps_shift": budget.eps_shift,
                    "eps_trotter": budget.eps_trotter, "eps_u2": budget.eps_u2,
                    "delta_tail": budget.delta_tail, "delta": budget.delta,
                    "p": budget.p, "dt": budget.dt,
                }
            ],
            out / "budget.png",
        )
    return CompileResult(schedule, budget, schedule_path)


@dataclass
class SimulateResult:
    final: StateVector
    trajectory_path: Path
    final_path: Path


def run_simulate(
    schedule_file: str | Path, state_file: str | Path, config: RunConfig
) -> SimulateResult:
    """Propagate a stored schedule from a stored state; export the trajectory."""
    out = config.ensure_output_dir()
    schedule = load_schedule_jsonl(schedule_file)
    s0 = embed(normalize(load_state_csv(state_file)), schedule.window)
    traj = simulate_schedule(s0, schedule)

    rows = []
    for step, state in enumerate(traj):
        for k, c in zip(state.window.indices(), state.coeffs):
            rows.append([step, int(k), _fmt(c.real), _fmt(c.imag)])
    traj_path = out / "trajectory.csv"
    _write_csv(traj_path, ["step", "k", "re", "im"], rows)
    final_path = out / "final_state.csv"
    save_state_csv(final_path, traj[-1])
    if config.figures:
        mags = np.abs(np.stack([st.coeffs for st in traj]))
        figures.save_trajectory_figure(
            mags, schedule.window.lo, schedule.window.hi, out / "trajectory.png"
        )
    return SimulateResult(traj[-1], traj_path, final_path)
