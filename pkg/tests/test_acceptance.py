"""Acceptance criteria, one test per criterion.

Each test prints a single `[criterion N] PASS/FAIL` line (run pytest with -s
to see them) and then asserts. Criterion 6 demands an end-to-end compiled
run at a tolerance/window combination that the shift approximant's
square-root error decay cannot reach; it is asserted as written, fails, and
its message explains the obstruction (see also the feasibility section of
the README).
"""

import time

import numpy as np

import hsteer as hs
from hsteer.harness import RunConfig, run_end_to_end
from hsteer.oscillator import (
    average_power_mc,
    build_ushift,
    driven_oscillator_generators,
    lie_closure_dim,
    renumbering_matrix,
    shift_su2_generators,
    zshift_matrix,
)

SEED = 20250810


def _report(num: int, ok: bool, detail: str = "") -> None:
    print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'} {detail}")


def test_criterion_1_bp_fidelity():
    t0 = time.monotonic()
    worst = 0.0
    w = hs.IndexWindow(-10, 10)
    for p in (1, 2, 5, 10):
        b = hs.build_bp(p, w)
        for j in range(-10, 11):
            for k in range(-10, 11):
                worst = max(worst, abs(b.entry(j, k) - hs.bp_entry_oracle(p, j, k)))
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-10 and elapsed < 5.0
    _report(1, ok, f"(max entry deviation {worst:.2e}, {elapsed:.2f}s)")
    assert worst <= 1e-10
    assert elapsed < 5.0


def test_criterion_2_shift_norm_estimate():
    t0 = time.monotonic()
    w = hs.IndexWindow(-128, 128)  # d = 257
    rng = np.random.default_rng(SEED)
    p_list = [2, 8, 32, 64]
    margin = max(p_list) + 2
    states = []
    for _ in range(20):
        j = int(rng.integers(w.lo + margin, w.hi - margin + 1))
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
        states.append(hs.StateVector(w, phase * hs.basis_state(j, w).coeffs))

    bounds = []
    ok = True
    details = []
    for p in p_list:
        bound = hs.remainder_bound(p)
        measured = hs.shift_approx_error(p, w, states)
        # slack: quadrature gate plus the d=257 window-truncation allowance
        # (the windowed propagator deviates from the ideal by ~0.4% of the
        # bound once the band reaches a quarter of the window)
        slack = max(1e-8, 5e-3 * bound)
        ok &= measured <= bound + slack
        ok &= bound**2 <= 2 / p
        bounds.append(bound)
        details.append(f"p={p}: {measured:.6f} vs {bound:.6f}")
    ok &= all(a >= b for a, b in zip(bounds, bounds[1:]))
    elapsed = time.monotonic() - t0
    ok &= elapsed < 120.0
    _report(2, ok, f"({'; '.join(details)}, {elapsed:.1f}s)")
    for p, bound in zip(p_list, bounds):
        measured = hs.shift_approx_error(p, w, states)
        assert measured <= bound + max(1e-8, 5e-3 * bound), f"p={p}"
        assert bound**2 <= 2 / p
    assert all(a >= b for a, b in zip(bounds, bounds[1:]))
    assert elapsed < 120.0


def test_criterion_3_trotter_trend():
    w = hs.IndexWindow(-16, 16)
    b = hs.build_bp(8, w)
    psi = hs.basis_state(0, w)
    h0 = hs.free_rotator()
    ratios = []
    for dt in (1e-2, 1e-3, 1e-4):
        ratios.append(
            hs.trotter_step_error(b, h0, dt / 2, psi) / hs.trotter_step_error(b, h0, dt, psi)
        )
    ok = all(0.3 <= r <= 0.7 for r in ratios)
    _report(3, ok, f"(ratios {[f'{r:.4f}' for r in ratios]})")
    for r in ratios:
        assert 0.3 <= r <= 0.7


def test_criterion_4_exact_plan_controllability():
    t0 = time.monotonic()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        def rand_state():
            start = int(rng.integers(-10, 4))
            c = rng.standard_normal(8) + 1j * rng.standard_normal(8)
            return hs.normalize(hs.StateVector(hs.IndexWindow(start, start + 7), c))

        s0, target = rand_state(), rand_state()
        plan = hs.synthesize_plan(s0, target, 1e-12)
        w = hs.plan_application_window(plan, s0)
        final = hs.apply_plan_exact(hs.embed(s0, w), plan)
        worst = max(worst, hs.distance(final, target))
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-9 and elapsed < 30.0
    _report(4, ok, f"(worst distance {worst:.2e}, {elapsed:.1f}s)")
    assert worst <= 1e-9
    assert elapsed < 30.0


def _primitive_matrix(op, w):
    m = np.zeros((w.dim, w.dim), dtype=complex)
    if op.is_shift:
        if op.direction > 0:
            m[np.arange(1, w.dim), np.arange(0, w.dim - 1)] = 1.0
        else:
            m[np.arange(0, w.dim - 1), np.arange(1, w.dim)] = 1.0
        return m
    m = np.eye(w.dim, dtype=complex)
    p0, p1 = w.position(0), w.position(1)
    m[np.ix_([p0, p1], [p0, p1])] = op.u
    return m


def test_criterion_5_error_accumulation():
    rng = np.random.default_rng(SEED)
    w = hs.IndexWindow(-20, 20)
    worst_slack = np.inf
    for _ in range(50):
        ops = []
        for _ in range(10):
            r = rng.random()
            if r < 0.3:
                ops.append(hs.shift_up())
            elif r < 0.6:
                ops.append(hs.shift_down())
            else:
                q, rr = np.linalg.qr(
                    rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
                )
                ops.append(hs.two_level(q * np.sign(np.diag(rr).real)))
        s0 = hs.embed(
            hs.normalize(
                hs.StateVector(
                    hs.IndexWindow(-2, 2),
                    rng.standard_normal(5) + 1j * rng.standard_normal(5),
                )
            ),
            w,
        )
        exact = [lambda st, op=op: hs.apply_primitive(st, op) for op in ops]
        approx = []
        for op in ops:
            g = rng.standard_normal((w.dim, w.dim)) + 1j * rng.standard_normal(
                (w.dim, w.dim)
            )
            g = 0.05 * (g + g.conj().T) / 2
            pert = hs.exp_hermitian(g).matrix @ _primitive_matrix(op, w)
            approx.append(lambda st, m=pert: hs.StateVector(w, m @ st.coeffs))
        rows = hs.accumulation_table(s0, exact, approx)
        final = rows[-1]
        worst_slack = min(worst_slack, final["cum_bound"] - final["actual_dev"])
    ok = worst_slack >= -1e-9
    _report(5, ok, f"(worst slack {worst_slack:.3e})")
    assert worst_slack >= -1e-9


def test_criterion_6_end_to_end_compiled_control(tmp_path):
    t0 = time.monotonic()
    s0 = hs.basis_state(0, hs.IndexWindow(0, 1))
    k = np.arange(5)
    prof = np.exp(-((k - 2.0) ** 2) / (2 * 1.2**2))
    target = hs.normalize(hs.StateVector(hs.IndexWindow(0, 4), prof.astype(complex)))
    s0_path, t_path = tmp_path / "e0.csv", tmp_path / "target5.csv"
    hs.save_state_csv(s0_path, s0)
    hs.save_state_csv(t_path, target)

    config = RunConfig(output_dir=tmp_path / "out", max_window=257, figures=False)
    report = run_end_to_end(s0_path, t_path, 0.1, config)
    elapsed = time.monotonic() - t0

    ok = (
        report.passed
        and report.budget is not None
        and report.budget.satisfied()
        and report.window is not None
        and report.window.dim <= 257
        and elapsed < 600.0
    )
    _report(6, ok, f"(outcome: {'PASS' if report.passed else report.failure}, {elapsed:.1f}s)")
    assert report.passed, (
        "end-to-end pipeline did not reach delta=0.1 within the stated desk-scale "
        f"limits: {report.failure}. The bounded shift approximant's norm error "
        "decays only like ~1.16/sqrt(p), so the 6-shift plan's per-shift cap of "
        "(0.1/18) needs p ~ 4e4, a band beyond p_max=2^14 whose padded window "
        "lies far beyond d=257. See README, section 'Feasibility'."
    )
    assert report.budget.satisfied()
    assert report.window.dim <= 257
    assert elapsed < 600.0


def test_criterion_7_average_power():
    mean_z, _ = average_power_mc("z_shift", 100_000, 32, SEED)
    mean_osc, _ = average_power_mc("osc_shift", 100_000, 32, SEED)
    mean_blk, _ = average_power_mc("finite_block", 100_000, 32, SEED, block_size=4)
    ok = 1.9 <= mean_z <= 2.1 and 1.9 <= mean_osc <= 2.1 and mean_blk <= 0.01
    _report(7, ok, f"(z={mean_z:.4f}, osc={mean_osc:.4f}, block={mean_blk:.2e})")
    assert 1.9 <= mean_z <= 2.1
    assert 1.9 <= mean_osc <= 2.1
    assert mean_blk <= 0.01


def test_criterion_8_oscillator_equivalence():
    d = 64
    z = renumbering_matrix(d)
    conj = z.conj().T @ build_ushift(d).matrix @ z
    s = zshift_matrix(d)
    interior = [k + d // 2 for k in range(-(d // 2) + 1, d // 2 - 1)]
    block = np.ix_(interior, interior)
    dev = float(np.max(np.abs(conj[block] - s[block])))
    ok = dev <= 1e-14
    _report(8, ok, f"(entrywise deviation {dev:.2e})")
    assert dev <= 1e-14


def test_criterion_9_lie_closure():
    t0 = time.monotonic()
    driven = driven_oscillator_generators(32)
    dims4 = {d_int: lie_closure_dim(driven, d_int, tol=1e-8, max_dim=64)
             for d_int in (8, 16, 24)}
    shift_set = shift_su2_generators(48)
    grow = {d_int: lie_closure_dim(shift_set, d_int, tol=1e-8, max_dim=d_int + 1)
            for d_int in (8, 16)}
    elapsed = time.monotonic() - t0
    ok = (
        all(v == 4 for v in dims4.values())
        and all(grow[d_int] > d_int for d_int in (8, 16))
        and elapsed < 120.0
    )
    _report(9, ok, f"(driven {dims4}, shift-su2 {grow}, {elapsed:.1f}s)")
    assert all(v == 4 for v in dims4.values())
    for d_int in (8, 16):
        assert grow[d_int] > d_int
    assert elapsed < 120.0
