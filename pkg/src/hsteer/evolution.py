"""Piecewise-constant bilinear propagation and single-pulse errors.

A control segment evolves the state by exp(+i * dt * (H0 + g * B)) where H0
is a diagonal drift (free rotator k^2 by default) and B a Hermitian control
operator. With the pulse choice g = 1/dt the segment reproduces
exp(i * (dt*H0 + B)), which tends to the target exp(i*B) as dt -> 0; the
deviation is first order in dt and is always evaluated on a concrete state,
not in operator norm (the truncated drift norm grows like the squared
window radius, which would force absurdly small steps).

Sign convention: the propagator carries e^{+i dt H}. The physical
Schrodinger convention e^{-i dt H} is obtained by negating H0 and B (or by
conjugating schedules); all internal consistency checks are convention
independent. See PROPAGATOR_PHASE_SIGN.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import WindowMismatch
from .operators import BandedHermitian, UnitaryMatrix, build_bp, exp_hermitian
from .statespace import IndexWindow, StateVector

# +1: segments apply e^{+i dt (H0 + g B)} so a g = 1/dt pulse hits e^{iB}
# exactly in the H0 = 0 limit. Negate generators for the e^{-iHt} convention.
PROPAGATOR_PHASE_SIGN = +1


@dataclass(frozen=True)
class HamiltonianSpec:
    """Diagonal drift Hamiltonian: a real value per absolute index k."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def values_on(self, w: IndexWindow) -> np.ndarray:
        vals = np.asarray(self.fn(w.indices()), dtype=float)
        if vals.shape != (w.dim,):
            raise ValueError("drift values must match the window dimension")
        if not np.all(np.isfinite(vals)):
            raise ValueError("drift values must be finite")
        return vals


def free_rotator() -> HamiltonianSpec:
    """h(k) = k^2."""
    return HamiltonianSpec("rotator", lambda k: k.astype(float) ** 2)


def zero_drift() -> HamiltonianSpec:
    return HamiltonianSpec("zero", lambda k: np.zeros_like(k, dtype=float))


_NAMED_DRIFTS = {"rotator": free_rotator, "zero": zero_drift}


def drift_by_name(name: str) -> HamiltonianSpec:
    try:
        return _NAMED_DRIFTS[name]()
    except KeyError:
        raise ValueError(f"unknown drift {name!r}; known: {sorted(_NAMED_DRIFTS)}") from None


@dataclass(frozen=True)
class ControlSegment:
    """One piecewise-constant pulse: duration, amplitude, operator, drift.

    `operator` is the Hermitian control matrix (dense or banded) on the
    schedule window; `operator_id` identifies it for serialization and for
    propagator caching ("bp" with band p, or "u2" with the 2x2 generator).
    """

    duration: float
    amplitude: float
    operator: BandedHermitian | np.ndarray = field(repr=False)
    h0: HamiltonianSpec
    operator_id: str = "custom"
    p: int | None = None
    generator2: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not self.duration > 0:
            raise ValueError(f"segment duration must be > 0, got {self.duration}")

    def operator_dense(self) -> np.ndarray:
        if isinstance(self.operator, BandedHermitian):
            return self.operator.to_dense()
        return np.asarray(self.operator, dtype=complex)

    def cache_key(self) -> tuple | None:
        """Key for propagator reuse; None disables caching for this segment."""
        if self.operator_id == "bp" and self.p is not None:
            return ("bp", self.p, self.duration, self.amplitude, self.h0.name)
        if self.operator_id == "u2" and self.generator2 is not None:
            g = np.asarray(self.generator2, dtype=complex)
            return ("u2", g.tobytes(), self.duration, self.amplitude, self.h0.name)
        return None


@dataclass(frozen=True)
class ControlSchedule:
    """Ordered pulse segments on a common window, with an optional ledger."""

    window: IndexWindow
    segments: tuple[ControlSegment, ...]
    ledger: object | None = None    # ErrorBudget, kept loose to avoid a cycle

    @property
    def total_duration(self) -> float:
        return float(sum(seg.duration for seg in self.segments))


def step_propagator(seg: ControlSegment, w: IndexWindow) -> UnitaryMatrix:
    """exp(i * dt * (H0 + g * B)) on window w."""
    if isinstance(seg.operator, BandedHermitian) and seg.operator.window != w:
        raise WindowMismatch("segment operator window differs from requested window")
    b = seg.operator_dense()
    if b.shape != (w.dim, w.dim):
        raise WindowMismatch(
            f"operator shape {b.shape} does not match window dimension {w.dim}"
        )
    h = np.diag(seg.h0.values_on(w)).astype(complex)
    gen = seg.duration * (h + seg.amplitude * b)
    return exp_hermitian(gen, window=w)


def simulate_schedule(s0: StateVector, sched: ControlSchedule) -> list[StateVector]:
    """Apply each segment's propagator in order; returns the trajectory.

    The trajectory includes the initial state, so it has len(segments) + 1
    entries. Unitarity of each propagator keeps every intermediate norm at
    1 within ~1e-9 for the window sizes this library targets.
    """
    if s0.window != sched.window:
        raise WindowMismatch("initial state window differs from schedule window")
    cache: dict[tuple, UnitaryMatrix] = {}
    traj = [s0]
    cur = s0
    for seg in sched.segments:
        key = seg.cache_key()
        u = cache.get(key) if key is not None else None
        if u is None:
            u = step_propagator(seg, sched.window)
            if key is not None:
                cache[key] = u
        cur = u.apply(cur)
        traj.append(cur)
    return traj


def trotter_step_error(
    target_B: BandedHermitian | np.ndarray,
    h0: HamiltonianSpec,
    dt: float,
    psi: StateVector,
) -> float:
    """|| (e^{iB} - e^{i dt (H0 + B/dt)}) psi || on psi's window.

    First order in dt for fixed window: halving dt roughly halves the value.
    Exactly zero (up to eigendecomposition noise) when H0 = 0.
    """
    w = psi.window
    if isinstance(target_B, BandedHermitian):
        if target_B.window != w:
            raise WindowMismatch("operator window differs from state window")
        b = target_B.to_dense()
    else:
        b = np.asarray(target_B, dtype=complex)
        if b.shape != (w.dim, w.dim):
            raise WindowMismatch("operator shape does not match state window")
    target = exp_hermitian(b, window=w)
    h = np.diag(h0.values_on(w)).astype(complex)
    pulse = exp_hermitian(dt * h + b, window=w)
    return float(np.linalg.norm(target.apply(psi).coeffs - pulse.apply(psi).coeffs))


def accumulation_table(
    s0: StateVector,
    exact_steps: Sequence[Callable[[StateVector], StateVector]],
    approx_steps: Sequence[Callable[[StateVector], StateVector]],
) -> list[dict]:
    """Per-step error accumulation for two parallel evolutions.

    Row k reports the single-step deviation ||(U'_k - U_k) psi_{k-1}||
    (evaluated on the exact intermediate state), its running sum, and the
    actual deviation ||psi'_k - psi_k||. For unitary (or contractive)
    steps the actual deviation never exceeds the running sum.
    """
    if len(exact_steps) != len(approx_steps):
        raise ValueError("step sequences must have equal length")
    rows = []
    exact = s0
    approx = s0
    bound = 0.0
    for k, (ue, ua) in enumerate(zip(exact_steps, approx_steps), start=1):
        nxt_exact = ue(exact)
        step_err = float(
            np.linalg.norm(ua(exact).coeffs - nxt_exact.coeffs)
        )
        approx = ua(approx)
        bound += step_err
        actual = float(np.linalg.norm(approx.coeffs - nxt_exact.coeffs))
        rows.append(
            {"step": k, "step_error": step_err, "cum_bound": bound, "actual_dev": actual}
        )
        exact = nxt_exact
    return rows


def save_schedule_jsonl(path: str | Path, sched: ControlSchedule) -> None:
    """Serialize a schedule, one JSON record per line.

    Only named drifts and operators built from ("bp", p) or a stored 2x2
    generator can be serialized; ad-hoc dense operators cannot.
    """
    with open(path, "w") as fh:
        header = {
            "record": "header",
            "window": {"lo": sched.window.lo, "hi": sched.window.hi},
            "segments": len(sched.segments),
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for i, seg in enumerate(sched.segments):
            rec = {
                "record": "segment",
                "index": i,
                "duration": seg.duration,
                "amplitude": seg.amplitude,
                "operator_id": seg.operator_id,
                "h0_kind": seg.h0.name,
            }
            if seg.operator_id == "bp":
                if seg.p is None:
                    raise ValueError("bp segment requires a band p")
                rec["p"] = seg.p
            elif seg.operator_id == "u2":
                if seg.generator2 is None:
                    raise ValueError("u2 segment requires its 2x2 generator")
                g = np.asarray(seg.generator2)
                rec["generator"] = [[float(v.real), float(v.imag)] for v in g.ravel()]
            else:
                raise ValueError(f"cannot serialize operator_id {seg.operator_id!r}")
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def embed_two_level_generator(g2: np.ndarray, w: IndexWindow) -> np.ndarray:
    """Place a 2x2 Hermitian generator on indices {0, 1} of window w."""
    if not (w.lo <= 0 and 1 <= w.hi):
        raise WindowMismatch(f"window [{w.lo}, {w.hi}] does not contain {{0, 1}}")
    mat = np.zeros((w.dim, w.dim), dtype=complex)
    p0, p1 = w.position(0), w.position(1)
    g2 = np.asarray(g2, dtype=complex)
    mat[np.ix_([p0, p1], [p0, p1])] = g2
    return mat


def load_schedule_jsonl(path: str | Path) -> ControlSchedule:
    """Inverse of save_schedule_jsonl."""
    with open(path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("record") != "header":
        raise ValueError(f"{path}: missing schedule header record")
    w = IndexWindow(int(lines[0]["window"]["lo"]), int(lines[0]["window"]["hi"]))
    segments = []
    for rec in lines[1:]:
        if rec.get("record") != "segment":
            raise ValueError(f"{path}: unexpected record {rec.get('record')!r}")
        h0 = drift_by_name(rec["h0_kind"])
        op_id = rec["operator_id"]
        if op_id == "bp":
            p = int(rec["p"])
            segments.append(
                ControlSegment(
                    duration=float(rec["duration"]),
                    amplitude=float(rec["amplitude"]),
                    operator=build_bp(p, w),
                    h0=h0,
                    operator_id="bp",
                    p=p,
                )
            )
        elif op_id == "u2":
            flat = [complex(re, im) for re, im in rec["generator"]]
            g2 = np.array(flat, dtype=complex).reshape(2, 2)
            segments.append(
                ControlSegment(
                    duration=float(rec["duration"]),
                    amplitude=float(rec["amplitude"]),
                    operator=embed_two_level_generator(g2, w),
                    h0=h0,
                    operator_id="u2",
                    generator2=g2,
                )
            )
        else:
            raise ValueError(f"{path}: unknown operator_id {op_id!r}")
    return ControlSchedule(w, tuple(segments))
