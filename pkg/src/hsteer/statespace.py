"""Windowed representation of square-integrable double-infinite sequences.

A state is a finite complex coefficient vector attached to an integer index
window [lo, hi]; indices outside the window are implicitly zero. All
operations align operands by absolute integer index, never by array
position, so windows of different extents combine correctly.

Values are immutable after construction and all operations are pure
functions, so states can be shared freely across threads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import WindowTooSmall, ZeroState

NORM_TOL = 1e-12        # |norm - 1| tolerance for a normalized state
SUPPORT_TOL = 1e-14     # default support detection threshold
_ZERO_FLOOR = 1e-300    # below this the direction of a state is meaningless


@dataclass(frozen=True, order=True)
class IndexWindow:
    """Inclusive integer index range [lo, hi]."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"window requires lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def dim(self) -> int:
        return self.hi - self.lo + 1

    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def contains(self, other: "IndexWindow") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def position(self, k: int) -> int:
        """Array position of absolute index k."""
        if not self.lo <= k <= self.hi:
            raise ValueError(f"index {k} outside window [{self.lo}, {self.hi}]")
        return k - self.lo

    def hull(self, other: "IndexWindow") -> "IndexWindow":
        return IndexWindow(min(self.lo, other.lo), max(self.hi, other.hi))

    def padded(self, margin: int) -> "IndexWindow":
        return IndexWindow(self.lo - margin, self.hi + margin)


@dataclass(frozen=True)
class StateVector:
    """Complex coefficients over an index window; coeff for k at k - lo."""

    window: IndexWindow
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.coeffs, dtype=complex)
        if arr.ndim != 1 or arr.size != self.window.dim:
            raise ValueError(
                f"coefficient array of length {arr.size} does not match "
                f"window dimension {self.window.dim}"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def dim(self) -> int:
        return self.window.dim

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def coeff(self, k: int) -> complex:
        """Coefficient at absolute index k (0 outside the window)."""
        if self.window.lo <= k <= self.window.hi:
            return complex(self.coeffs[k - self.window.lo])
        return 0j

    def support(self, tol: float = SUPPORT_TOL) -> IndexWindow | None:
        """Smallest sub-window containing all |a_k| > tol, or None."""
        mask = np.abs(self.coeffs) > tol
        if not mask.any():
            return None
        pos = np.nonzero(mask)[0]
        return IndexWindow(self.window.lo + int(pos[0]), self.window.lo + int(pos[-1]))


def basis_state(k: int, window: IndexWindow) -> StateVector:
    """The basis element e_k represented on the given window."""
    coeffs = np.zeros(window.dim, dtype=complex)
    coeffs[window.position(k)] = 1.0
    return StateVector(window, coeffs)


def normalize(s: StateVector) -> StateVector:
    """Scale to unit norm; direction unchanged.

    Raises ZeroState when the norm is too small for the direction to be
    meaningful in double precision.
    """
    n = s.norm()
    if n <= _ZERO_FLOOR:
        raise ZeroState(f"cannot normalize state with norm {n}")
    return StateVector(s.window, s.coeffs / n)


def inner(s: StateVector, t: StateVector) -> complex:
    """Inner product, conjugate-linear in the first argument.

    Windows may differ; coefficients are aligned by absolute index and
    treated as zero outside each window.
    """
    lo = max(s.window.lo, t.window.lo)
    hi = min(s.window.hi, t.window.hi)
    if lo > hi:
        return 0j
    a = s.coeffs[lo - s.window.lo : hi - s.window.lo + 1]
    b = t.coeffs[lo - t.window.lo : hi - t.window.lo + 1]
    return complex(np.vdot(a, b))


def distance(s: StateVector, t: StateVector) -> float:
    """Euclidean distance with index-aligned subtraction."""
    w = s.window.hull(t.window)
    a = np.zeros(w.dim, dtype=complex)
    a[s.window.lo - w.lo : s.window.hi - w.lo + 1] = s.coeffs
    a[t.window.lo - w.lo : t.window.hi - w.lo + 1] -= t.coeffs
    return float(np.linalg.norm(a))


def embed(s: StateVector, w: IndexWindow) -> StateVector:
    """Re-represent s on window w, zero-filling new positions.

    w may also be smaller than the current window as long as it contains
    every strictly nonzero coefficient; otherwise WindowTooSmall is raised.
    """
    sup = s.support(0.0)
    if sup is not None and not w.contains(sup):
        raise WindowTooSmall(
            f"support [{sup.lo}, {sup.hi}] does not fit in window [{w.lo}, {w.hi}]"
        )
    coeffs = np.zeros(w.dim, dtype=complex)
    lo = max(s.window.lo, w.lo)
    hi = min(s.window.hi, w.hi)
    if lo <= hi:
        coeffs[lo - w.lo : hi - w.lo + 1] = s.coeffs[lo - s.window.lo : hi - s.window.lo + 1]
    return StateVector(w, coeffs)


def truncate_tail(s: StateVector, tol: float) -> tuple[StateVector, float]:
    """Restrict to support(tol), renormalize, and report the cut norm.

    Returns (truncated state, tail) where tail = ||cut part||. The tail is
    bounded by tol * sqrt(dim). Raises ZeroState if nothing survives.
    """
    sup = s.support(tol)
    if sup is None:
        raise ZeroState(f"no coefficient above tol={tol}")
    lo = sup.lo - s.window.lo
    hi = sup.hi - s.window.lo
    kept = StateVector(sup, s.coeffs[lo : hi + 1])
    # the cut norm is computed directly from the cut coefficients; a
    # norm-difference would cancel catastrophically for tiny tails
    cut = np.concatenate([s.coeffs[:lo], s.coeffs[hi + 1 :]])
    tail = float(np.linalg.norm(cut))
    return normalize(kept), tail


def to_triples(s: StateVector) -> list[tuple[int, float, float]]:
    """State as (index, re, im) triples over its window."""
    return [
        (int(k), float(c.real), float(c.imag))
        for k, c in zip(s.window.indices(), s.coeffs)
    ]


def from_triples(triples: list[tuple[int, float, float]]) -> StateVector:
    """Build a state from (index, re, im) triples; window spans the indices."""
    if not triples:
        raise ValueError("empty state literal")
    ks = [int(t[0]) for t in triples]
    if len(set(ks)) != len(ks):
        raise ValueError("duplicate indices in state literal")
    w = IndexWindow(min(ks), max(ks))
    coeffs = np.zeros(w.dim, dtype=complex)
    for k, re, im in triples:
        coeffs[int(k) - w.lo] = complex(float(re), float(im))
    return StateVector(w, coeffs)


def save_state_csv(path: str | Path, s: StateVector) -> None:
    """Write a state as CSV with columns k,re,im."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "re", "im"])
        for k, re, im in to_triples(s):
            writer.writerow([k, repr(re), repr(im)])


def load_state_csv(path: str | Path) -> StateVector:
    """Read a state from CSV with columns k,re,im."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["k", "re", "im"]:
            raise ValueError(f"{path}: expected header k,re,im")
        triples = [(int(row[0]), float(row[1]), float(row[2])) for row in reader if row]
    return from_triples(triples)
