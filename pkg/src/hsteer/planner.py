"""Constructive steering plans and rigorous error budgets.

Any finite-support state can be walked to the basis state e_0 using only
global shifts and U(2) blocks on indices {0, 1}: repeatedly shift the
highest occupied index to position 1 and merge it downward with the
Givens-with-phase block

    [[conj(a0), conj(a1)], [-a1, a0]] / r,     r = sqrt(|a0|^2 + |a1|^2),

which sends (a0, a1) to (r, 0). When index 0 is empty the merge simply
transports the top coefficient down one slot; either way the occupied
interval shrinks by one per merge, so plans have linear length. A plan
from s0 to an arbitrary target is the reduction of s0 followed by the
reversed, element-wise inverted reduction of the target.

The budget allocator splits the admissible error delta - delta_tail
equally across the three error species (shift approximation, pulse
Trotterization, U(2) Trotterization), picks the smallest power-of-two band
p whose shift bound fits its cap, and halves dt until the measured pulse
errors on the plan's actual intermediate states fit theirs. The resulting
ledger certifies L*(eps_shift + eps_trotter) + N*eps_u2 + delta_tail <= delta.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadParams, BudgetInfeasible, EmptySupport
from .evolution import HamiltonianSpec, embed_two_level_generator
from .operators import (
    PrimitiveOp,
    apply_primitive,
    apply_shift,
    apply_two_level,
    build_bp,
    exp_hermitian,
    remainder_bound,
    shift_down,
    shift_up,
    two_level,
)
from .statespace import IndexWindow, StateVector, embed, truncate_tail

DEFAULT_P_MAX = 2 ** 14
DEFAULT_DT_MIN = 1e-8
DEFAULT_DT_START = 0.1


@dataclass(frozen=True)
class Plan:
    """Ordered primitive steering steps plus the index range they touch."""

    ops: tuple[PrimitiveOp, ...]
    excursion: tuple[int, int]

    @property
    def L(self) -> int:
        return sum(1 for op in self.ops if op.is_shift)

    @property
    def N(self) -> int:
        return len(self.ops) - self.L

    def inverse(self) -> "Plan":
        return Plan(tuple(op.inverse() for op in reversed(self.ops)), self.excursion)


@dataclass(frozen=True)
class ErrorBudget:
    """Ledger proving L*(eps_shift + eps_trotter) + N*eps_u2 + tail <= delta."""

    delta: float
    delta_tail: float
    eps_shift: float
    eps_trotter: float
    eps_u2: float
    L: int
    N: int
    p: int | None
    dt: float

    def lhs(self) -> float:
        return (
            self.L * (self.eps_shift + self.eps_trotter)
            + self.N * self.eps_u2
            + self.delta_tail
        )

    def satisfied(self) -> bool:
        return self.lhs() <= self.delta


def _merge_block(a0: complex, a1: complex) -> np.ndarray:
    r = math.hypot(abs(a0), abs(a1))
    return np.array(
        [[np.conj(a0) / r, np.conj(a1) / r], [-a1 / r, a0 / r]], dtype=complex
    )


def reduce_to_e0(s: StateVector, tail_tol: float) -> Plan:
    """Plan taking s (after tail truncation) to e_0 with positive phase.

    Exact application of the returned plan maps s to within
    2 * tail_tol * sqrt(dim) of e_0; on the truncated state it is exact up
    to rounding. The final two-level op pins the global phase so the
    remaining coefficient is real positive.
    """
    trunc, _ = truncate_tail(s, tail_tol)
    sup = trunc.support(0.0)
    if sup is None:
        raise EmptySupport("state has no support after truncation")

    lo, hi = sup.lo, sup.hi
    wlo = min(lo, lo - hi, -1) - 2
    whi = max(hi, 1) + 2
    work = embed(trunc, IndexWindow(wlo, whi))
    occupied = {
        int(k) for k in work.window.indices() if abs(work.coeff(int(k))) > 0.0
    }

    ops: list[PrimitiveOp] = []
    exc_lo = min(min(occupied), 0)
    exc_hi = max(max(occupied), 1)

    def do_shifts(count: int) -> None:
        nonlocal work, occupied, exc_lo, exc_hi
        step = 1 if count > 0 else -1
        for _ in range(abs(count)):
            ops.append(shift_up() if step > 0 else shift_down())
            work = apply_shift(work, step)
        occupied = {k + count for k in occupied}
        exc_lo = min(exc_lo, min(occupied))
        exc_hi = max(exc_hi, max(occupied))

    while max(occupied) > min(occupied):
        do_shifts(1 - max(occupied))
        a0, a1 = work.coeff(0), work.coeff(1)
        u = _merge_block(a0, a1)
        ops.append(two_level(u))
        work = apply_two_level(work, u)
        # the merge annihilates index 1 analytically; drop the float dust so
        # the occupied-set bookkeeping stays exact
        coeffs = np.array(work.coeffs)
        coeffs[work.window.position(1)] = 0.0
        work = StateVector(work.window, coeffs)
        occupied.discard(1)
        occupied.add(0)

    (j,) = occupied
    if j != 0:
        do_shifts(-j)

    c = work.coeff(0)
    phase = np.conj(c) / abs(c)
    ops.append(two_level(np.array([[phase, 0.0], [0.0, 1.0]], dtype=complex)))
    return Plan(tuple(ops), (exc_lo, exc_hi))


def synthesize_plan(s0: StateVector, target: StateVector, tail_tol: float) -> Plan:
    """Plan from s0 to target: reduce s0 to e_0, then un-reduce the target.

    Exact application achieves distance <= 4 * tail_tol * sqrt(dim) from the
    target (the two truncation tails are the only loss).
    """
    fwd = reduce_to_e0(s0, tail_tol)
    back = reduce_to_e0(target, tail_tol).inverse()
    exc = (
        min(fwd.excursion[0], back.excursion[0]),
        max(fwd.excursion[1], back.excursion[1]),
    )
    return Plan(fwd.ops + back.ops, exc)


def plan_application_window(plan: Plan, s: StateVector, margin: int = 2) -> IndexWindow:
    """Window large enough to run the plan on s without edge spill."""
    sup = s.support(0.0)
    base = IndexWindow(plan.excursion[0], plan.excursion[1])
    if sup is not None:
        base = base.hull(sup)
    return base.padded(margin)


def apply_plan_exact(s0: StateVector, plan: Plan) -> StateVector:
    """Apply every primitive in order with exact shift/U(2) semantics.

    The caller's window must cover the plan's excursion with margin;
    otherwise apply_shift raises EdgeSpill and the state should first be
    embedded into plan_application_window(plan, s0).
    """
    cur = s0
    for op in plan.ops:
        cur = apply_primitive(cur, op)
    return cur


def intermediate_states(s0: StateVector, plan: Plan) -> tuple[list[StateVector], StateVector]:
    """States before each primitive (exact evolution), plus the final state."""
    befores = []
    cur = s0
    for op in plan.ops:
        befores.append(cur)
        cur = apply_primitive(cur, op)
    return befores, cur


def simulation_window(plan: Plan, s: StateVector, p: int) -> IndexWindow:
    """Support and excursion hull padded by the control bandwidth plus two."""
    return plan_application_window(plan, s, margin=p + 2)


def principal_generator(u: np.ndarray) -> np.ndarray:
    """Hermitian H with exp(iH) = u, eigenphases in (-pi, pi].

    A unitary is normal, so it is diagonalized by the (exactly orthonormal)
    eigenbasis of the Hermitian combination cos(H) + w*sin(H); the weight w
    is varied until that combination separates the eigenphases. The branch
    point is handled deterministically: an eigenphase at -pi is nudged to
    -pi + 1e-12.
    """
    u = np.asarray(u, dtype=complex)
    herm = 0.5 * (u + u.conj().T)
    skew = (u - u.conj().T) / 2j
    q = None
    for w in (0.0, 0.5, -0.7, 1.3, -2.1, 3.7):
        _, q_try = np.linalg.eigh(herm + w * skew)
        d = q_try.conj().T @ u @ q_try
        if np.max(np.abs(d - np.diag(np.diag(d)))) < 1e-11:
            q = q_try
            break
    if q is None:
        raise BadParams("matrix is not unitary enough to take a principal logarithm")
    phases = np.angle(np.diag(q.conj().T @ u @ q))
    phases = np.where(phases <= -np.pi + 1e-12, -np.pi + 1e-12, phases)
    h = (q * phases) @ q.conj().T
    return 0.5 * (h + h.conj().T)


def allocate_budget(
    plan: Plan,
    delta: float,
    delta_tail: float,
    h0: HamiltonianSpec,
    trial_state: StateVector,
    *,
    p_max: int = DEFAULT_P_MAX,
    dt_min: float = DEFAULT_DT_MIN,
    dt_start: float = DEFAULT_DT_START,
    max_window: int = 1024,
) -> ErrorBudget:
    """Equal-split budget: caps of (delta - delta_tail)/3 per error species.

    Chooses the smallest power-of-two band p with remainder_bound(p) under
    the per-shift cap, then halves dt from dt_start until the measured
    pulse errors over the plan's intermediate states fit their caps.
    Raises BudgetInfeasible when p > p_max or dt < dt_min would be needed,
    or when the p-padded simulation window would exceed max_window (dense
    propagators put a hard desk-scale limit on the window dimension).
    """
    if not plan.ops:
        raise BadParams("cannot budget an empty plan")
    if not 0.0 <= delta_tail < delta:
        raise BadParams(f"need 0 <= delta_tail < delta, got {delta_tail} vs {delta}")

    L, N = plan.L, plan.N
    room = delta - delta_tail
    cap_shift = room / (3 * L) if L else math.inf
    cap_trotter = room / (3 * L) if L else math.inf
    cap_u2 = room / (3 * N) if N else math.inf

    p: int | None = None
    eps_shift = 0.0
    if L:
        q = 1
        while q <= p_max:
            eps = remainder_bound(q)
            if eps <= cap_shift:
                p = q
                eps_shift = eps
                break
            q *= 2
        if p is None:
            raise BudgetInfeasible(
                f"shift budget line violated: cap {cap_shift:.6g} < "
                f"remainder_bound({p_max}) = {remainder_bound(p_max):.6g}; "
                f"no band p <= p_max fits"
            )

    w = simulation_window(plan, trial_state, p or 0)
    if w.dim > max_window:
        raise BudgetInfeasible(
            f"window line violated: band p={p} needs window d={w.dim} > "
            f"max_window={max_window}"
        )
    befores, _ = intermediate_states(embed(trial_state, w), plan)

    shift_cases = [
        (st, plan.ops[i].direction)
        for i, st in enumerate(befores)
        if plan.ops[i].is_shift
    ]
    u2_cases = [
        (st, plan.ops[i].u) for i, st in enumerate(befores) if not plan.ops[i].is_shift
    ]

    h_diag = np.diag(h0.values_on(w)).astype(complex)
    if L:
        bp_dense = build_bp(p, w).to_dense()
        u_up = exp_hermitian(bp_dense, window=w).matrix
        u_down = u_up.conj().T
    u2_generators = [embed_two_level_generator(principal_generator(u), w) for _, u in u2_cases]

    dt = dt_start
    while True:
        eps_trotter = 0.0
        if L:
            pulse_up = exp_hermitian(dt * h_diag + bp_dense, window=w).matrix
            pulse_down = exp_hermitian(dt * h_diag - bp_dense, window=w).matrix
            for st, sign in shift_cases:
                tgt = (u_up if sign > 0 else u_down) @ st.coeffs
                pls = (pulse_up if sign > 0 else pulse_down) @ st.coeffs
                eps_trotter = max(eps_trotter, float(np.linalg.norm(tgt - pls)))
        eps_u2 = 0.0
        for (st, u), gen in zip(u2_cases, u2_generators):
            pulse = exp_hermitian(dt * h_diag + gen, window=w).matrix
            tgt = apply_two_level(st, u)
            eps_u2 = max(eps_u2, float(np.linalg.norm(tgt.coeffs - pulse @ st.coeffs)))
        if (not L or eps_trotter <= cap_trotter) and (not N or eps_u2 <= cap_u2):
            break
        dt /= 2
        if dt < dt_min:
            which = "trotter" if (L and eps_trotter > cap_trotter) else "u2"
            cap = cap_trotter if which == "trotter" else cap_u2
            raise BudgetInfeasible(
                f"{which} budget line violated: cap {cap:.6g} not reachable "
                f"with dt >= dt_min={dt_min}"
            )

    budget = ErrorBudget(delta, delta_tail, eps_shift, eps_trotter, eps_u2, L, N, p, dt)
    assert budget.satisfied(), "equal-split construction must satisfy the ledger"
    return budget


def save_plan_jsonl(path: str | Path, plan: Plan) -> None:
    """One op per line: {"op":"shift","dir":+-1} or {"op":"u2","matrix":[[re,im]x4]}."""
    with open(path, "w") as fh:
        header = {
            "record": "header",
            "excursion": [plan.excursion[0], plan.excursion[1]],
            "ops": len(plan.ops),
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for op in plan.ops:
            if op.is_shift:
                rec = {"op": "shift", "dir": op.direction}
            else:
                rec = {
                    "op": "u2",
                    "matrix": [[float(v.real), float(v.imag)] for v in op.u.ravel()],
                }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_plan_jsonl(path: str | Path) -> Plan:
    """Inverse of save_plan_jsonl."""
    with open(path) as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or lines[0].get("record") != "header":
        raise ValueError(f"{path}: missing plan header record")
    exc = lines[0]["excursion"]
    ops = []
    for rec in lines[1:]:
        if rec["op"] == "shift":
            ops.append(shift_up() if int(rec["dir"]) > 0 else shift_down())
        elif rec["op"] == "u2":
            flat = [complex(re, im) for re, im in rec["matrix"]]
            ops.append(two_level(np.array(flat, dtype=complex).reshape(2, 2)))
        else:
            raise ValueError(f"{path}: unknown op {rec['op']!r}")
    return Plan(tuple(ops), (int(exc[0]), int(exc[1])))
