"""Figure rendering for benchmark results.

Each bench command writes a PNG next to its CSV. The CSV stays the
canonical artifact; figures are a convenience view of the same rows.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .bench import SweepResult  # noqa: E402

_STYLE = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.labelsize": 11,
    "legend.fontsize": 9,
    "lines.markersize": 4.5,
}


def _grouped(result: SweepResult, key_idx, x_idx, y_idx):
    groups = {}
    for row in result.sorted_rows():
        key = tuple(row[i] for i in key_idx)
        groups.setdefault(key, ([], []))
        groups[key][0].append(row[x_idx])
        groups[key][1].append(row[y_idx])
    return groups


def save_sweep_lambda_plot(result: SweepResult, path) -> None:
    """lambda vs lambda * ||A_G - A_WLR||_F, log-scale Y."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for (solver,), (xs, ys) in _grouped(result, (1,), 0, 2).items():
            ax.plot(xs, ys, marker="o", label=solver)
        ax.set_xlabel(r"$\lambda$")
        ax.set_ylabel(r"$\lambda\,\|A_G - \hat{A}\|_F$")
        ax.set_yscale("log")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def save_compare_plot(result: SweepResult, path) -> None:
    """Target rank vs RMSE per solver and metric, log-scale Y."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        for (solver, metric), (xs, ys) in _grouped(result, (1, 2), 0, 3).items():
            style = "-" if metric == "rmse_vs_a" else "--"
            ax.plot(xs, ys, style, marker="o", label=f"{solver} ({metric})")
        ax.set_xlabel("target rank r")
        ax.set_ylabel("RMSE")
        ax.set_yscale("log")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def save_trace_plot(result: SweepResult, path) -> None:
    """Iterations vs relative error (and distance to the closed form
    when present), log-scale Y."""
    has_dist = "rel_dist_to_closed_form" in result.columns
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        rows = result.sorted_rows()
        xs = [row[0] for row in rows]
        ax.plot(xs, [row[2] for row in rows], label="relative error")
        if has_dist:
            ax.plot(xs, [row[3] for row in rows], "--",
                    label="relative distance to closed form")
        ax.set_xlabel("iteration")
        ax.set_ylabel("relative error")
        ax.set_yscale("log")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
