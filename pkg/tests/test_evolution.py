import numpy as np
import pytest

import hsteer as hs
from hsteer.errors import WindowMismatch
from hsteer.evolution import load_schedule_jsonl, save_schedule_jsonl

SWAP = np.array([[0, 1], [1, 0]], dtype=complex)


def swap_segment(w, duration=0.5):
    g2 = hs.principal_generator(SWAP)
    return hs.ControlSegment(
        duration=duration,
        amplitude=1.0 / duration,
        operator=hs.embed_two_level_generator(g2, w),
        h0=hs.zero_drift(),
        operator_id="u2",
        generator2=g2,
    )


class TestStepPropagator:
    def test_zero_drift_pulse_is_exact(self):
        w = hs.IndexWindow(-8, 8)
        dt = 0.037
        seg = hs.ControlSegment(
            duration=dt, amplitude=1.0 / dt, operator=hs.build_bp(3, w),
            h0=hs.zero_drift(), operator_id="bp", p=3,
        )
        u = hs.step_propagator(seg, w)
        target = hs.exp_hermitian(hs.build_bp(3, w))
        assert np.max(np.abs(u.matrix - target.matrix)) <= 1e-12

    def test_unitary_with_rotator_drift(self):
        w = hs.IndexWindow(-32, 32)
        dt = 0.01
        seg = hs.ControlSegment(
            duration=dt, amplitude=1.0 / dt, operator=hs.build_bp(8, w),
            h0=hs.free_rotator(), operator_id="bp", p=8,
        )
        assert hs.step_propagator(seg, w).unitarity_defect() <= 1e-9

    def test_pure_drift_is_diagonal_phase(self):
        w = hs.IndexWindow(-3, 3)
        seg = hs.ControlSegment(
            duration=1.0, amplitude=0.0,
            operator=np.zeros((w.dim, w.dim), dtype=complex),
            h0=hs.free_rotator(), operator_id="u2",
            generator2=np.zeros((2, 2), dtype=complex),
        )
        u = hs.step_propagator(seg, w)
        expected = np.diag(np.exp(1j * w.indices().astype(float) ** 2))
        assert np.max(np.abs(u.matrix - expected)) <= 1e-12

    def test_window_mismatch(self):
        w = hs.IndexWindow(-4, 4)
        seg = swap_segment(w)
        with pytest.raises(WindowMismatch):
            hs.step_propagator(seg, hs.IndexWindow(-5, 5))


class TestSimulateSchedule:
    def test_empty_schedule(self):
        w = hs.IndexWindow(-2, 2)
        s0 = hs.basis_state(0, w)
        traj = hs.simulate_schedule(s0, hs.ControlSchedule(w, ()))
        assert len(traj) == 1
        assert hs.distance(traj[0], s0) == 0.0

    def test_swap_pulse_moves_e0_to_e1(self):
        w = hs.IndexWindow(-4, 4)
        sched = hs.ControlSchedule(w, (swap_segment(w),))
        traj = hs.simulate_schedule(hs.basis_state(0, w), sched)
        assert hs.distance(traj[-1], hs.basis_state(1, w)) <= 1e-12

    def test_inverse_pair_returns_to_start(self):
        # with zero drift the amplitude-negated segment is the exact inverse
        w = hs.IndexWindow(-6, 6)
        dt = 0.02
        fwd = hs.ControlSegment(
            duration=dt, amplitude=1.0 / dt, operator=hs.build_bp(2, w),
            h0=hs.zero_drift(), operator_id="bp", p=2,
        )
        bwd = hs.ControlSegment(
            duration=dt, amplitude=-1.0 / dt, operator=hs.build_bp(2, w),
            h0=hs.zero_drift(), operator_id="bp", p=2,
        )
        s0 = hs.normalize(hs.embed(hs.from_triples([(0, 1, 0), (1, 0, 1)]), w))
        traj = hs.simulate_schedule(s0, hs.ControlSchedule(w, (fwd, bwd)))
        assert hs.distance(traj[-1], s0) <= 1e-9

    def test_inverse_with_drift_via_adjoint(self):
        w = hs.IndexWindow(-6, 6)
        dt = 0.02
        fwd = hs.ControlSegment(
            duration=dt, amplitude=1.0 / dt, operator=hs.build_bp(2, w),
            h0=hs.free_rotator(), operator_id="bp", p=2,
        )
        u = hs.step_propagator(fwd, w)
        s0 = hs.normalize(hs.embed(hs.from_triples([(0, 1, 0), (1, 0, 1)]), w))
        out = hs.StateVector(w, u.matrix.conj().T @ (u.matrix @ s0.coeffs))
        assert hs.distance(out, s0) <= 1e-9

    def test_norm_conservation_along_trajectory(self):
        # 200 segments on a d = 257 window; the shared propagator is cached
        w = hs.IndexWindow(-128, 128)
        dt = 0.005
        seg = hs.ControlSegment(
            duration=dt, amplitude=1.0 / dt, operator=hs.build_bp(4, w),
            h0=hs.free_rotator(), operator_id="bp", p=4,
        )
        sched = hs.ControlSchedule(w, (seg,) * 200)
        traj = hs.simulate_schedule(hs.basis_state(0, w), sched)
        assert max(abs(s.norm() - 1.0) for s in traj) <= 1e-9

    def test_window_mismatch(self):
        w = hs.IndexWindow(-4, 4)
        sched = hs.ControlSchedule(w, (swap_segment(w),))
        with pytest.raises(WindowMismatch):
            hs.simulate_schedule(hs.basis_state(0, hs.IndexWindow(-3, 3)), sched)


class TestTrotterStepError:
    def test_zero_drift_vanishes(self):
        w = hs.IndexWindow(-8, 8)
        err = hs.trotter_step_error(
            hs.build_bp(4, w), hs.zero_drift(), 0.05, hs.basis_state(0, w)
        )
        assert err <= 1e-10

    def test_first_order_halving(self):
        w = hs.IndexWindow(-16, 16)
        b = hs.build_bp(8, w)
        psi = hs.basis_state(0, w)
        h0 = hs.free_rotator()
        e1 = hs.trotter_step_error(b, h0, 1e-2, psi)
        e2 = hs.trotter_step_error(b, h0, 5e-3, psi)
        assert 0.3 <= e2 / e1 <= 0.7

    def test_regression_baseline_dt_1em4(self):
        w = hs.IndexWindow(-16, 16)
        err = hs.trotter_step_error(
            hs.build_bp(8, w), hs.free_rotator(), 1e-4, hs.basis_state(0, w)
        )
        assert err <= 0.1
        assert err == pytest.approx(0.0018097234802872874, rel=1e-6)


def _shift_matrix(w, direction):
    m = np.zeros((w.dim, w.dim), dtype=complex)
    if direction > 0:
        m[np.arange(1, w.dim), np.arange(0, w.dim - 1)] = 1.0
    else:
        m[np.arange(0, w.dim - 1), np.arange(1, w.dim)] = 1.0
    return m


def _primitive_matrix(op, w):
    if op.is_shift:
        return _shift_matrix(w, op.direction)
    m = np.eye(w.dim, dtype=complex)
    p0, p1 = w.position(0), w.position(1)
    m[np.ix_([p0, p1], [p0, p1])] = op.u
    return m


def test_accumulation_bound_random_sequences():
    rng = np.random.default_rng(11)
    w = hs.IndexWindow(-20, 20)
    for _ in range(10):
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
            g = rng.standard_normal((w.dim, w.dim)) + 1j * rng.standard_normal((w.dim, w.dim))
            g = 0.05 * (g + g.conj().T) / 2
            pert = hs.exp_hermitian(g).matrix @ _primitive_matrix(op, w)
            approx.append(lambda st, m=pert: hs.StateVector(w, m @ st.coeffs))
        rows = hs.accumulation_table(s0, exact, approx)
        for row in rows:
            assert row["actual_dev"] <= row["cum_bound"] + 1e-9


def test_schedule_jsonl_round_trip(tmp_path):
    w = hs.IndexWindow(-6, 6)
    dt = 0.01
    segs = (
        hs.ControlSegment(
            duration=dt, amplitude=1.0 / dt, operator=hs.build_bp(2, w),
            h0=hs.free_rotator(), operator_id="bp", p=2,
        ),
        swap_segment(w, duration=dt),
    )
    sched = hs.ControlSchedule(w, segs)
    path = tmp_path / "sched.jsonl"
    save_schedule_jsonl(path, sched)
    loaded = load_schedule_jsonl(path)
    assert loaded.window == w
    assert loaded.total_duration == pytest.approx(sched.total_duration)
    s0 = hs.normalize(hs.embed(hs.from_triples([(0, 1, 0), (2, 0.5, 0)]), w))
    a = hs.simulate_schedule(s0, sched)[-1]
    b = hs.simulate_schedule(s0, loaded)[-1]
    assert hs.distance(a, b) <= 1e-12


def test_drift_by_name_errors():
    with pytest.raises(ValueError):
        hs.drift_by_name("nope")
