"""Command-line interface.

Subcommands: plan, compile, simulate, end-to-end, bench-bp, avg-power,
lie-closure. Shared options (config file, output directory, seed, jobs,
figures) are accepted by every subcommand; the HS_OUTPUT_DIR environment
variable overrides the output directory regardless of flags.
"""

from __future__ import annotations

import argparse
import sys

from ..errors import SteeringError
from .config import build_config
from . import runs


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _n_quad(text: str):
    if text.lower() == "auto":
        return None
    return int(text)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--output-dir", dest="output_dir", help="report directory")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--jobs", type=int, help="parallel workers for sweep points")
    parser.add_argument(
        "--no-figures", dest="figures", action="store_false", default=None,
        help="emit CSV/text only, skip PNG rendering",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsteer",
        description="Steering-plan synthesis, pulse compilation, and shift diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="synthesize a shift/U(2) steering plan")
    p.add_argument("--s0", required=True, help="initial state CSV (k,re,im)")
    p.add_argument("--target", required=True, help="target state CSV (k,re,im)")
    p.add_argument("--tail-tol", type=float, default=1e-12)
    _common(p)

    p = sub.add_parser("compile", help="budget a plan and compile it to pulses")
    p.add_argument("--plan", required=True, help="plan JSONL file")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--h0", default="rotator", choices=["rotator", "zero"])
    p.add_argument("--s0", help="trial state CSV for state-dependent pulse errors")
    p.add_argument("--delta-tail", type=float, default=0.0)
    _common(p)

    p = sub.add_parser("simulate", help="propagate a schedule from a state")
    p.add_argument("--schedule", required=True, help="schedule JSONL file")
    p.add_argument("--state", required=True, help="initial state CSV")
    _common(p)

    p = sub.add_parser("end-to-end", help="plan, budget, compile, simulate, report")
    p.add_argument("--s0", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--h0", default="rotator", choices=["rotator", "zero"])
    _common(p)

    p = sub.add_parser("bench-bp", help="bound vs measured shift approximation error")
    p.add_argument("--p-list", type=_int_list, default=[2, 8, 32, 64])
    p.add_argument("--n-quad", type=_n_quad, default=None,
                   help="quadrature nodes, or 'auto' for gated doubling")
    p.add_argument("--window-radius", type=int, default=128)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--support-width", type=int, default=1,
                   help="sample support width; >1 explores superposition excess")
    _common(p)

    p = sub.add_parser("avg-power", help="Monte-Carlo average power of an operator")
    p.add_argument("--kind", required=True, choices=["z_shift", "osc_shift", "finite_block"])
    p.add_argument("--N", type=int, default=100_000)
    p.add_argument("--trials", type=int, default=32)
    p.add_argument("--block-size", type=int, default=4)
    _common(p)

    p = sub.add_parser("lie-closure", help="Lie closure dimension of a generator set")
    p.add_argument("--set", dest="set_name", required=True,
                   choices=["driven-oscillator", "shift-su2"])
    p.add_argument("--d", type=int, default=48)
    p.add_argument("--d-int", type=_int_list, default=[8, 16, 24])
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-dim", type=int, default=64)
    _common(p)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "output_dir": getattr(args, "output_dir", None),
        "seed": getattr(args, "seed", None),
        "jobs": getattr(args, "jobs", None),
        "figures": getattr(args, "figures", None),
    }
    config = build_config(getattr(args, "config", None), overrides)

    try:
        if args.command == "plan":
            res = runs.run_plan(args.s0, args.target, args.tail_tol, config)
            print(f"plan: {len(res.plan.ops)} ops (L={res.plan.L}, N={res.plan.N}), "
                  f"exact residual {res.exact_residual:.3e} -> {res.plan_path}")
        elif args.command == "compile":
            res = runs.run_compile(
                args.plan, args.delta, args.h0, config,
                s0_file=args.s0, delta_tail=args.delta_tail,
            )
            b = res.budget
            print(f"compiled {len(res.schedule.segments)} segments "
                  f"(p={b.p}, dt={b.dt:g}, ledger lhs={b.lhs():.6g} <= delta={b.delta:g}) "
                  f"-> {res.schedule_path}")
        elif args.command == "simulate":
            res = runs.run_simulate(args.schedule, args.state, config)
            print(f"simulated: final norm {res.final.norm():.12f} -> {res.trajectory_path}")
        elif args.command == "end-to-end":
            from ..evolution import drift_by_name

            report = runs.run_end_to_end(
                args.s0, args.target, args.delta, config, h0=drift_by_name(args.h0)
            )
            if report.report_path is not None:
                print(f"report: {report.report_path}")
            print("PASS" if report.passed else f"FAILED: {report.failure}")
            return 0 if report.passed else 1
        elif args.command == "bench-bp":
            rows = runs.run_bench_bp(
                args.p_list, args.n_quad, config,
                window_radius=args.window_radius, samples=args.samples,
                support_width=args.support_width,
            )
            for r in rows:
                print(f"p={r['p']:6d}  bound={r['epsilon_bound']:.6f}  "
                      f"measured={r['epsilon_measured']:.6f}")
        elif args.command == "avg-power":
            res = runs.run_avg_power(
                args.kind, args.N, args.trials, config.seed, config,
                block_size=args.block_size,
            )
            print(f"{res.kind}: mean={res.mean:.6f} stderr={res.stderr:.6f} "
                  f"(N={res.N}, trials={res.trials})")
        elif args.command == "lie-closure":
            rows = runs.run_lie_closure(
                args.set_name, args.d, args.d_int, args.tol, args.max_dim, config
            )
            for r in rows:
                print(f"d_int={r['d_int']:4d}  closure_dim={r['closure_dim']}")
    except (SteeringError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
