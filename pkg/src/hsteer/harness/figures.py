"""Figure rendering for report outputs.

Every report path that tabulates numbers also renders a PNG next to the
CSV (disable with figures=False in the run configuration). Rendering uses
the Agg backend so runs never require a display.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "figure.figsize": (6.0, 3.8),
    "figure.dpi": 110,
    "savefig.dpi": 160,
    "savefig.bbox": "tight",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.8,
    "font.size": 10,
}


def _new_axes():
    plt.rcParams.update(_STYLE)
    fig, ax = plt.subplots()
    return fig, ax


def _save(fig, path: str | Path) -> None:
    fig.savefig(path, metadata={"Software": "hsteer"})
    plt.close(fig)


def save_bench_bp_figure(rows: list[dict], path: str | Path) -> None:
    """Shift-approximation bound and measured error versus band p, log-log."""
    fig, ax = _new_axes()
    p = np.array([r["p"] for r in rows], dtype=float)
    ax.loglog(p, [r["epsilon_bound"] for r in rows], "o-", label="norm bound")
    ax.loglog(p, [r["epsilon_measured"] for r in rows], "s-", label="measured (worst sample)")
    ax.loglog(p, np.sqrt(2.0 / p), "--", color="gray", label=r"$\sqrt{2/p}$ envelope")
    ax.set_xlabel("band p")
    ax.set_ylabel("shift approximation error")
    ax.legend()
    _save(fig, path)


def save_avg_power_figure(estimates: np.ndarray, mean: float, stderr: float,
                          kind: str, path: str | Path) -> None:
    """Per-trial estimates with the aggregate mean and its standard error."""
    fig, ax = _new_axes()
    t = np.arange(1, len(estimates) + 1)
    ax.plot(t, estimates, "o", ms=4, alpha=0.7, label="trial estimate")
    ax.axhline(mean, color="C1", label=f"mean = {mean:.4f}")
    ax.axhspan(mean - stderr, mean + stderr, color="C1", alpha=0.2, label="± stderr")
    ax.set_xlabel("trial")
    ax.set_ylabel("average-power estimate")
    ax.set_title(kind)
    ax.legend()
    _save(fig, path)


def save_lie_closure_figure(rows: list[dict], path: str | Path) -> None:
    """Closure dimension versus interior size, against the y = x witness line."""
    fig, ax = _new_axes()
    d_int = np.array([r["d_int"] for r in rows], dtype=float)
    dim = np.array([r["closure_dim"] for r in rows], dtype=float)
    ax.plot(d_int, dim, "o-", label="closure dimension")
    ax.plot(d_int, d_int, "--", color="gray", label="d_int")
    ax.set_xlabel("interior size d_int")
    ax.set_ylabel("Lie closure dimension (capped)")
    ax.legend()
    _save(fig, path)


def save_accumulation_figure(rows: list[dict], achieved: float, delta: float,
                             path: str | Path) -> None:
    """Per-step compiled-vs-exact deviation and its running triangle bound."""
    fig, ax = _new_axes()
    steps = [r["step"] for r in rows]
    ax.plot(steps, [r["cum_bound"] for r in rows], "o-", label="cumulative step-error bound")
    ax.plot(steps, [r["actual_dev"] for r in rows], "s-", label="actual deviation")
    ax.axhline(delta, color="red", ls=":", label=f"delta = {delta:g}")
    ax.axhline(achieved, color="C2", ls="--", label=f"achieved = {achieved:.3e}")
    ax.set_xlabel("step")
    ax.set_ylabel("deviation from exact evolution")
    ax.legend(fontsize=8)
    _save(fig, path)


def save_trajectory_figure(coeff_magnitudes: np.ndarray, lo: int, hi: int,
                           path: str | Path) -> None:
    """Heatmap of |a_k| along the trajectory (rows: steps, columns: indices)."""
    fig, ax = _new_axes()
    im = ax.imshow(
        coeff_magnitudes,
        aspect="auto",
        origin="lower",
        extent=(lo - 0.5, hi + 0.5, -0.5, coeff_magnitudes.shape[0] - 0.5),
        cmap="viridis",
    )
    fig.colorbar(im, ax=ax, label="|a_k|")
    ax.set_xlabel("index k")
    ax.set_ylabel("step")
    _save(fig, path)


def save_budget_figure(budget_rows: list[dict], path: str | Path) -> None:
    """Stacked view of the ledger terms against the admissible delta."""
    fig, ax = _new_axes()
    for i, row in enumerate(budget_rows):
        parts = {
            "L*eps_shift": row["L"] * row["eps_shift"],
            "L*eps_trotter": row["L"] * row["eps_trotter"],
            "N*eps_u2": row["N"] * row["eps_u2"],
            "delta_tail": row["delta_tail"],
        }
        bottom = 0.0
        for j, (name, val) in enumerate(parts.items()):
            ax.bar(i, val, bottom=bottom, color=f"C{j}", label=name if i == 0 else None)
            bottom += val
        ax.plot([i - 0.4, i + 0.4], [row["delta"]] * 2, color="red", lw=2)
    ax.set_xticks(range(len(budget_rows)))
    ax.set_xticklabels([f"p={r['p']}, dt={r['dt']:g}" for r in budget_rows], fontsize=8)
    ax.set_ylabel("ledger contribution")
    ax.legend(fontsize=8)
    _save(fig, path)
