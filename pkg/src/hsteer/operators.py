"""Shift and two-level unitaries, the banded control operator, and bounds.

The exact steering primitives are the shift (every coefficient moves one
index up or down) and an arbitrary U(2) block acting on indices {0, 1}.
The shift is not generated by any bounded multiplication operator, but it
is approximated in norm by exp(i*B_p) where

    B_p(theta) = pi - 2 * sum_{k=1..p} sin(k*theta) / k

is the truncated Fourier series of the sawtooth theta on (0, 2*pi). In the
Fourier basis e_k = exp(i*k*theta)/sqrt(2*pi), B_p is the Hermitian banded
Toeplitz matrix with diagonal pi and off-diagonal entries i/(j-k) for
0 < |j-k| <= p.

`remainder_bound` computes the error scale of that approximation,

    eps(p)^2 = (1/pi) * integral_0^{2pi} (1 - cos(theta - B_p(theta))) dtheta,

which satisfies eps(p)^2 <= 2/p and decays like ~0.67 * (2/p) in practice
(eps(p) ~ 1.16/sqrt(p)); the slow square-root decay is intrinsic to the
sawtooth jump and drives every downstream budget decision. eps(p) is the
exact per-step error on basis states and the root-mean-square error over
isotropically random states; see `remainder_bound` for the fine print.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import (
    BadBand,
    EdgeSpill,
    NotHermitian,
    NotUnitary,
    QuadratureUnconverged,
    WindowMismatch,
    WindowMissesBlock,
)
from .statespace import IndexWindow, StateVector

EDGE_TOL = 1e-12          # max amplitude allowed to fall off the window edge
UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-10
QUAD_GATE = 1e-8          # node-doubling convergence gate for theta-integrals
_P_UNITARY_CONSTRUCT_TOL = 1e-12


def _check_unitary_2x2(u: np.ndarray, tol: float) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise NotUnitary(f"expected a 2x2 matrix, got shape {u.shape}")
    dev = np.max(np.abs(u.conj().T @ u - np.eye(2)))
    if dev > tol:
        raise NotUnitary(f"u^H u deviates from I by {dev:.3e} > {tol}")
    return u


@dataclass(frozen=True)
class PrimitiveOp:
    """One steering step: ShiftUp, ShiftDown, or a U(2) block on {0, 1}."""

    kind: str                       # "shift_up" | "shift_down" | "two_level"
    u: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in ("shift_up", "shift_down", "two_level"):
            raise ValueError(f"unknown primitive kind {self.kind!r}")
        if self.kind == "two_level":
            if self.u is None:
                raise ValueError("two_level primitive requires a matrix")
            u = _check_unitary_2x2(self.u, _P_UNITARY_CONSTRUCT_TOL)
            u = u.copy()
            u.setflags(write=False)
            object.__setattr__(self, "u", u)
        elif self.u is not None:
            raise ValueError("shift primitives carry no matrix")

    @property
    def is_shift(self) -> bool:
        return self.kind != "two_level"

    @property
    def direction(self) -> int:
        if self.kind == "shift_up":
            return 1
        if self.kind == "shift_down":
            return -1
        raise ValueError("two_level primitive has no direction")

    def inverse(self) -> "PrimitiveOp":
        if self.kind == "shift_up":
            return PrimitiveOp("shift_down")
        if self.kind == "shift_down":
            return PrimitiveOp("shift_up")
        return PrimitiveOp("two_level", self.u.conj().T)


def shift_up() -> PrimitiveOp:
    return PrimitiveOp("shift_up")


def shift_down() -> PrimitiveOp:
    return PrimitiveOp("shift_down")


def two_level(u: np.ndarray) -> PrimitiveOp:
    return PrimitiveOp("two_level", u)


def apply_shift(s: StateVector, direction: int, edge_tol: float = EDGE_TOL) -> StateVector:
    """Move every coefficient by `direction` (+1 up / -1 down) in place index.

    The window is kept fixed, so the coefficient at the outgoing edge must
    already be negligible (|a| <= edge_tol); otherwise EdgeSpill signals
    that the caller should embed into a larger window first.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    out_edge = s.coeffs[-1] if direction == 1 else s.coeffs[0]
    if abs(out_edge) > edge_tol:
        k = s.window.hi if direction == 1 else s.window.lo
        raise EdgeSpill(
            f"amplitude {abs(out_edge):.3e} at index {k} would leave window "
            f"[{s.window.lo}, {s.window.hi}]"
        )
    coeffs = np.zeros_like(s.coeffs)
    if direction == 1:
        coeffs[1:] = s.coeffs[:-1]
    else:
        coeffs[:-1] = s.coeffs[1:]
    return StateVector(s.window, coeffs)


def apply_two_level(s: StateVector, u: np.ndarray) -> StateVector:
    """Apply a 2x2 unitary to the coefficients at indices 0 and 1."""
    u = _check_unitary_2x2(u, UNITARY_TOL)
    w = s.window
    if not (w.lo <= 0 and 1 <= w.hi):
        raise WindowMissesBlock(f"window [{w.lo}, {w.hi}] does not contain {{0, 1}}")
    coeffs = np.array(s.coeffs)
    p0, p1 = w.position(0), w.position(1)
    a0, a1 = coeffs[p0], coeffs[p1]
    coeffs[p0] = u[0, 0] * a0 + u[0, 1] * a1
    coeffs[p1] = u[1, 0] * a0 + u[1, 1] * a1
    return StateVector(w, coeffs)


def apply_primitive(s: StateVector, op: PrimitiveOp) -> StateVector:
    if op.is_shift:
        return apply_shift(s, op.direction)
    return apply_two_level(s, op.u)


@dataclass(frozen=True)
class BandedHermitian:
    """Hermitian matrix on a window with entries vanishing for |j-k| > band."""

    window: IndexWindow
    band: int
    entry_fn: Callable[[int, int], complex] = field(repr=False)
    toeplitz: bool = False

    def entry(self, j: int, k: int) -> complex:
        """Matrix element for absolute indices j, k of the window."""
        if abs(j - k) > self.band:
            return 0j
        return complex(self.entry_fn(j, k))

    def to_dense(self) -> np.ndarray:
        idx = self.window.indices()
        d = self.window.dim
        mat = np.zeros((d, d), dtype=complex)
        if self.toeplitz:
            diff = np.subtract.outer(idx, idx)
            for m in range(-min(self.band, d - 1), min(self.band, d - 1) + 1):
                k0 = int(idx[0])
                mat[diff == m] = self.entry_fn(k0 + m, k0)
        else:
            for a in range(d):
                for b in range(max(0, a - self.band), min(d - 1, a + self.band) + 1):
                    mat[a, b] = self.entry_fn(int(idx[a]), int(idx[b]))
        return mat


@dataclass(frozen=True)
class UnitaryMatrix:
    """Dense unitary on a window."""

    window: IndexWindow
    matrix: np.ndarray = field(repr=False)

    def apply(self, s: StateVector) -> StateVector:
        if s.window != self.window:
            raise WindowMismatch("state and operator windows differ")
        return StateVector(self.window, self.matrix @ s.coeffs)

    def unitarity_defect(self) -> float:
        m = self.matrix
        return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))


def build_bp(p: int, w: IndexWindow) -> BandedHermitian:
    """Banded Toeplitz matrix of the bounded shift approximant.

    Diagonal entries are pi; entry(j, k) = i/(j-k) for 0 < |j-k| <= p.
    """
    if p < 1:
        raise BadBand(f"band must be >= 1, got {p}")

    def entry(j: int, k: int) -> complex:
        m = j - k
        if m == 0:
            return complex(np.pi)
        if abs(m) <= p:
            return 1j / m
        return 0j

    return BandedHermitian(w, p, entry, toeplitz=True)


def bp_entry_oracle(p: int, j: int, k: int, n_quad: int | None = None) -> complex:
    """Matrix element of B_p by direct quadrature, independent of build_bp.

    Integrates (1/2pi) * int_0^{2pi} exp(-i j theta) B_p(theta) exp(i k theta)
    with the periodic trapezoid rule, evaluating B_p by explicit summation of
    its sine series. Exact (to rounding) once n_quad exceeds the integrand's
    trigonometric degree.
    """
    if p < 1:
        raise BadBand(f"band must be >= 1, got {p}")
    if n_quad is None:
        n_quad = 4 * (p + abs(j - k) + 1)
    if n_quad < 4 * (p + abs(j - k) + 1):
        raise ValueError(f"n_quad={n_quad} too small for p={p}, |j-k|={abs(j - k)}")
    theta = 2 * np.pi * np.arange(n_quad) / n_quad
    bp = np.full(n_quad, np.pi)
    for m in range(1, p + 1):
        bp -= 2.0 * np.sin(m * theta) / m
    vals = np.exp(-1j * (j - k) * theta) * bp
    return complex(vals.mean())


def exp_hermitian(B: BandedHermitian | np.ndarray, window: IndexWindow | None = None) -> UnitaryMatrix:
    """exp(i*B) for Hermitian B via eigendecomposition.

    The eigendecomposition route guarantees the result is unitary up to the
    orthogonality of the eigenbasis. Raises NotHermitian when B deviates
    from its adjoint beyond tolerance.
    """
    if isinstance(B, BandedHermitian):
        window = B.window
        mat = B.to_dense()
    else:
        mat = np.asarray(B, dtype=complex)
        if window is None:
            n = mat.shape[0]
            window = IndexWindow(0, n - 1)
    dev = np.max(np.abs(mat - mat.conj().T))
    scale = max(1.0, float(np.max(np.abs(mat))))
    if dev > HERMITIAN_TOL * scale:
        raise NotHermitian(f"matrix deviates from Hermitian by {dev:.3e}")
    evals, vecs = np.linalg.eigh(mat)
    u = (vecs * np.exp(1j * evals)) @ vecs.conj().T
    return UnitaryMatrix(window, u)


def _bp_on_open_nodes(p: int, n: int) -> np.ndarray:
    """B_p(theta_j) at open nodes theta_j = 2pi(j+1/2)/n, by FFT synthesis.

    Requires n > 2p so no Fourier coefficient aliases.
    """
    if n <= 2 * p:
        raise ValueError(f"need n > 2p nodes, got n={n}, p={p}")
    m = np.arange(1, p + 1)
    coef = np.zeros(n, dtype=complex)
    coef[0] = np.pi
    twist = np.exp(1j * m * np.pi / n)
    coef[m] = (1j / m) * twist
    coef[n - m] = (-1j / m) * np.conj(twist)
    return (np.fft.ifft(coef) * n).real


def _remainder_integral(p: int, n: int) -> float:
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    integrand = 1.0 - np.cos(theta - _bp_on_open_nodes(p, n))
    return float(integrand.mean() * 2.0)   # (1/pi) * integral over (0, 2pi)


def remainder_bound(p: int, n_quad: int | None = None) -> float:
    """Shift-approximation error scale eps(p).

    eps(p) = sqrt((1/pi) int (1 - cos(theta - B_p(theta))) dtheta), computed
    with the periodic trapezoid rule on open nodes (the integrand, unlike
    the sawtooth remainder itself, is continuous across theta = 0). Node
    doubling must move the result by no more than 1e-8 or
    QuadratureUnconverged is raised; with n_quad=None nodes are doubled
    automatically until the gate is met.

    eps(p) equals ||(shift - exp(i B_p)) e_k|| exactly for every basis
    state e_k and is the root-mean-square error over isotropically random
    states. It is not a uniform bound over the whole sphere: a
    superposition whose spectral density peaks at the sawtooth jump can
    exceed it (the sphere-wide worst case stays near 2 for every p).
    """
    if p < 1:
        raise BadBand(f"band must be >= 1, got {p}")
    if n_quad is not None:
        e1 = np.sqrt(_remainder_integral(p, n_quad))
        e2 = np.sqrt(_remainder_integral(p, 2 * n_quad))
        if abs(e2 - e1) > QUAD_GATE:
            raise QuadratureUnconverged(
                f"doubling n_quad={n_quad} moved eps({p}) by {abs(e2 - e1):.3e}"
            )
        return float(e2)
    n = max(4096, 1 << int(np.ceil(np.log2(8 * p))))
    prev = np.sqrt(_remainder_integral(p, n))
    while n <= 1 << 22:
        n *= 2
        cur = np.sqrt(_remainder_integral(p, n))
        if abs(cur - prev) <= QUAD_GATE:
            return float(cur)
        prev = cur
    raise QuadratureUnconverged(f"eps({p}) did not converge by n={n}")


def shift_approx_error(p: int, w: IndexWindow, samples: list[StateVector]) -> float:
    """Max over samples of ||shift(phi) - exp(i*B_p) phi|| on the window.

    Samples should be supported at least p indices away from the window
    edges so the banded operator does not feel the truncation.
    """
    u = exp_hermitian(build_bp(p, w))
    worst = 0.0
    for phi in samples:
        if phi.window != w:
            raise ValueError("sample window differs from operator window")
        exact = apply_shift(phi, +1)
        approx = u.apply(phi)
        worst = max(worst, float(np.linalg.norm(exact.coeffs - approx.coeffs)))
    return worst


def export_matrix_csv(path: str | Path, matrix: np.ndarray, window: IndexWindow) -> None:
    """Write a dense operator as CSV rows (j, k, re, im)."""
    idx = window.indices()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "k", "re", "im"])
        for a, j in enumerate(idx):
            for b, k in enumerate(idx):
                v = matrix[a, b]
                writer.writerow([j, k, repr(float(v.real)), repr(float(v.imag))])


def export_bound_table_csv(path: str | Path, rows: list[tuple[int, float]]) -> None:
    """Write (p, epsilon) rows as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p", "epsilon"])
        for p, eps in rows:
            writer.writerow([p, repr(float(eps))])
