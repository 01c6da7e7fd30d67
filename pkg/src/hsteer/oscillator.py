"""Shift dynamics in a half-infinite (oscillator-like) basis.

On a basis {xi_0, xi_1, ...} the normalized ladder operators

    Aplus xi_i = xi_{i+1},      A xi_i = xi_{i-1} (A xi_0 = 0)

(the usual raising/lowering operators stripped of their sqrt factors)
together with the parity projections P+/P- and the elementary P_{jk} =
|xi_j><xi_k| assemble the composite

    Ushift = Aplus^2 P+  +  A^2 P-  +  P_01,

which acts as the two-sided shift after renumbering the half-infinite basis
against the integers: zeta(k) = 2k for k >= 0 and zeta(k) = -2k - 1 for
k < 0. Even indices climb by two, odd indices descend by two, and xi_1 ->
xi_0 stitches the two rails together.

The module also carries two diagnostics that separate operators like this
composite shift from anything reachable by finite blocks:

* `average_power_mc` estimates ap(U)(x) = lim (1/N) sum <x, U xi_n - xi_n>^2
  with the coordinates of x drawn as independent standard Gaussians. A
  permutation-like operator that displaces every basis vector scores 2; an
  operator supported on finitely many coordinates scores O(1/N).
* `lie_closure_dim` closes a set of Hermitian generators under i[X, Y] and
  reports the real dimension, deciding independence on an interior block so
  truncation-corner artifacts do not leak in. The resonantly driven
  oscillator set {a+a, x, 1} closes at dimension 4; the composite shift
  with an su(2) block on {xi_0, xi_2} keeps growing with the interior size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadDim, BadParams, NotHermitian


@dataclass(frozen=True)
class FockWindow:
    """Truncation to the basis states xi_0 ... xi_{dim-1}; dim even, >= 4."""

    dim: int

    def __post_init__(self) -> None:
        if self.dim < 4 or self.dim % 2:
            raise BadDim(f"truncation dimension must be even and >= 4, got {self.dim}")


@dataclass(frozen=True)
class OscOperator:
    """Dense operator on the truncated half-infinite basis."""

    label: str
    matrix: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _aplus(d: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    for i in range(d - 1):
        m[i + 1, i] = 1.0
    return m


def _alower(d: int) -> np.ndarray:
    return _aplus(d).conj().T


def build_osc(label: str, d: int, n: int | None = None, j: int | None = None, k: int | None = None) -> OscOperator:
    """Construct one of the named operators on a d-dimensional truncation.

    Labels: "aplus", "a", "p0", "pn" (needs n), "pjk" (needs j, k),
    "pplus", "pminus", "ushift".
    """
    if d < 4:
        raise BadDim(f"need d >= 4, got {d}")
    if label == "aplus":
        return OscOperator(label, _aplus(d))
    if label == "a":
        return OscOperator(label, _alower(d))
    if label == "p0":
        m = np.zeros((d, d), dtype=complex)
        m[0, 0] = 1.0
        return OscOperator(label, m)
    if label == "pn":
        if n is None or not 0 <= n < d:
            raise BadParams(f"pn requires 0 <= n < d, got n={n}")
        m = np.zeros((d, d), dtype=complex)
        m[n, n] = 1.0
        return OscOperator(f"pn({n})", m)
    if label == "pjk":
        if j is None or k is None or not (0 <= j < d and 0 <= k < d):
            raise BadParams(f"pjk requires 0 <= j, k < d, got j={j}, k={k}")
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = 1.0
        return OscOperator(f"pjk({j},{k})", m)
    if label in ("pplus", "pminus"):
        sign = 1.0 if label == "pplus" else -1.0
        diag = (1.0 + sign * (-1.0) ** np.arange(d)) / 2.0
        return OscOperator(label, np.diag(diag).astype(complex))
    if label == "ushift":
        return build_ushift(d)
    raise BadParams(f"unknown operator label {label!r}")


def build_ushift(d: int) -> OscOperator:
    """Composite shift Aplus^2 P+ + A^2 P- + P_01 on an even truncation.

    Unitary on span(xi_0 ... xi_{d-3}); the top two basis vectors feel the
    truncation edge (xi_{d-2} has nowhere to climb) and are excluded from
    isometry claims.
    """
    FockWindow(d)
    ap = _aplus(d)
    al = _alower(d)
    pplus = build_osc("pplus", d).matrix
    pminus = build_osc("pminus", d).matrix
    p01 = build_osc("pjk", d, j=0, k=1).matrix
    return OscOperator("ushift", ap @ ap @ pplus + al @ al @ pminus + p01)


def renumbering(k: int) -> int:
    """Bijection from the two-sided integers onto the half-infinite basis.

    zeta(k) = 2k for k >= 0 and -2k - 1 for k < 0, chosen so the composite
    shift advances zeta(k) to zeta(k + 1).
    """
    return 2 * k if k >= 0 else -2 * k - 1


def renumbering_matrix(d: int) -> np.ndarray:
    """Permutation Z with Z e_pos(k) = xi_zeta(k) for k in [-d/2, d/2 - 1].

    Columns are ordered by k (array position k + d/2), so Z conjugates
    two-sided-window matrices into the half-infinite basis.
    """
    FockWindow(d)
    z = np.zeros((d, d), dtype=complex)
    for pos, k in enumerate(range(-d // 2, d // 2)):
        z[renumbering(k), pos] = 1.0
    return z


def zshift_matrix(d: int) -> np.ndarray:
    """Two-sided shift on a d-point index window: e_k -> e_{k+1}."""
    m = np.zeros((d, d), dtype=complex)
    for pos in range(d - 1):
        m[pos + 1, pos] = 1.0
    return m


def _displacement_map(kind: str, n_terms: int) -> np.ndarray:
    """sigma(n) for the permutation-like operators, n = 1 .. n_terms."""
    n = np.arange(1, n_terms + 1)
    if kind == "z_shift":
        return n + 1
    if kind == "osc_shift":
        sigma = np.where(n % 2 == 0, n + 2, n - 2)
        sigma[0] = 0  # xi_1 -> xi_0
        return sigma
    raise BadParams(f"no displacement map for kind {kind!r}")


def average_power_trials(
    kind: str,
    N: int,
    trials: int,
    seed: int,
    block_size: int = 4,
) -> np.ndarray:
    """Per-trial estimates of (1/N) * sum_{n=1..N} <x, U xi_n - xi_n>^2.

    The coordinates <x, xi_n> are independent standard Gaussians; trial t
    uses a generator seeded with seed + t, so trials are reproducible and
    embarrassingly parallel.
    """
    if N < 1000:
        raise BadParams(f"need N >= 1000 for a stable estimate, got {N}")
    if trials < 2:
        raise BadParams(f"need trials >= 2 to report a standard error, got {trials}")

    estimates = np.empty(trials)
    if kind in ("z_shift", "osc_shift"):
        sigma = _displacement_map(kind, N)
        top = int(max(sigma.max(), N)) + 1
        for t in range(trials):
            rng = np.random.default_rng(seed + t)
            x = rng.standard_normal(top)
            diffs = x[sigma] - x[np.arange(1, N + 1)]
            estimates[t] = float(np.mean(diffs**2))
    elif kind == "finite_block":
        if block_size < 2:
            raise BadParams(f"block must have size >= 2, got {block_size}")
        rng0 = np.random.default_rng(seed)
        q, r = np.linalg.qr(rng0.standard_normal((block_size, block_size)))
        q = q * np.sign(np.diag(r))  # deterministic sign convention
        cols = np.arange(1, min(block_size, N + 1))  # the sum starts at n = 1
        delta = q[:, cols] - np.eye(block_size)[:, cols]
        for t in range(trials):
            rng = np.random.default_rng(seed + t)
            x = rng.standard_normal(block_size)
            terms = x @ delta
            estimates[t] = float(np.sum(terms**2) / N)
    else:
        raise BadParams(f"unknown kind {kind!r}")
    return estimates


def average_power_mc(
    kind: str,
    N: int,
    trials: int,
    seed: int,
    block_size: int = 4,
) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of the average power.

    Kinds: "z_shift" and "osc_shift" displace every basis vector and
    converge to 2; "finite_block" applies a fixed orthogonal rotation on
    xi_0 .. xi_{block_size-1} (drawn once from `seed`) and scores O(1/N).
    """
    estimates = average_power_trials(kind, N, trials, seed, block_size)
    mean = float(np.mean(estimates))
    stderr = float(np.std(estimates, ddof=1) / np.sqrt(trials))
    return mean, stderr


def _interior_vec(mat: np.ndarray, d_int: int) -> np.ndarray:
    block = mat[:d_int, :d_int]
    return np.concatenate([block.real.ravel(), block.imag.ravel()])


def lie_closure_dim(
    generators: list[np.ndarray],
    d_int: int,
    tol: float = 1e-8,
    max_dim: int = 64,
) -> int:
    """Real dimension of the Lie closure of Hermitian generators.

    Repeatedly forms i[X, Y] (Hermitian again) over the accepted basis and
    keeps candidates whose interior d_int x d_int block increases the
    singular-value rank of the accumulated stack (relative threshold tol).
    Returns the closure dimension, or max_dim as soon as it is reached
    (meaning: at least max_dim).

    d_int should stay several indices below the truncation so commutator
    artifacts at the truncation corner cannot register as new directions.
    """
    if not generators:
        raise BadParams("need at least one generator")
    d = generators[0].shape[0]
    if d_int > d - 4:
        raise BadParams(f"interior {d_int} too close to truncation {d}; need d_int <= d - 4")
    mats: list[np.ndarray] = []
    for g in generators:
        g = np.asarray(g, dtype=complex)
        if g.shape != (d, d):
            raise BadParams("generators must share one square shape")
        if np.max(np.abs(g - g.conj().T)) > 1e-10 * max(1.0, float(np.max(np.abs(g)))):
            raise NotHermitian("generators must be Hermitian")
        mats.append(g)

    stack: list[np.ndarray] = []      # unit-norm interior vectors of the basis
    basis: list[np.ndarray] = []      # accepted full matrices

    def try_accept(mat: np.ndarray) -> bool:
        vec = _interior_vec(mat, d_int)
        nrm = float(np.linalg.norm(vec))
        if nrm <= 0.0:
            return False
        cand = np.vstack(stack + [vec / nrm]) if stack else (vec / nrm)[None, :]
        sv = np.linalg.svd(cand, compute_uv=False)
        rank = int(np.sum(sv > tol * sv[0]))
        if rank <= len(stack):
            return False
        stack.append(vec / nrm)
        basis.append(mat)
        return True

    for g in mats:
        if try_accept(g) and len(basis) >= max_dim:
            return max_dim

    # breadth-first closure: commute every new element against the basis
    frontier = 0
    while frontier < len(basis):
        x = basis[frontier]
        frontier += 1
        for y in list(basis):
            comm = 1j * (x @ y - y @ x)
            if try_accept(comm) and len(basis) >= max_dim:
                return max_dim
    return len(basis)


def driven_oscillator_generators(d: int) -> list[np.ndarray]:
    """Number operator, position quadrature, and the identity.

    The true (sqrt-weighted) ladder operators enter here: x = (a + a+)/sqrt(2).
    Closing under commutators adds the momentum quadrature and stops: a
    four-dimensional algebra, independent of the truncation interior.
    """
    i = np.arange(d, dtype=float)
    number = np.diag(i).astype(complex)
    a = np.zeros((d, d), dtype=complex)
    for m in range(d - 1):
        a[m, m + 1] = np.sqrt(m + 1.0)
    x = (a + a.conj().T) / np.sqrt(2.0)
    ident = np.eye(d, dtype=complex)
    return [number, x, ident]


def shift_su2_generators(d: int) -> list[np.ndarray]:
    """Quadratures of the composite shift plus an su(2) block on {xi_0, xi_2}.

    This set keeps producing new directions as the interior grows; its
    closure dimension exceeds any fixed interior size.
    """
    u = build_ushift(d).matrix
    h_re = 0.5 * (u + u.conj().T)
    h_im = (u - u.conj().T) / 2j
    sx = np.zeros((d, d), dtype=complex)
    sx[0, 2] = sx[2, 0] = 1.0
    sy = np.zeros((d, d), dtype=complex)
    sy[0, 2] = -1j
    sy[2, 0] = 1j
    sz = np.zeros((d, d), dtype=complex)
    sz[0, 0] = 1.0
    sz[2, 2] = -1.0
    return [h_re, h_im, sx, sy, sz]


GENERATOR_SETS = {
    "driven-oscillator": driven_oscillator_generators,
    "shift-su2": shift_su2_generators,
}
