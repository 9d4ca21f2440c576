"""Benchmark experiments: weight sweeps toward the constrained
closed form, solver comparisons across condition-number regimes, and
per-iteration convergence traces.

Every experiment returns a SweepResult table keyed by its parameters;
rows are sorted before CSV emission so identical seeds give identical
CSV bytes. Wall-clock timings are collected per row but excluded from
the CSV by default (they are the one non-deterministic column); pass
include_timings=True to keep them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import EmConfig, als_solve, em_solve, rmse
from .errors import ValidationError
from .ghs import solve_ghs, solve_uniform_penalized
from .linalg import as_matrix
from .matio import csv_text
from .synth import rng_for, weight_block
from .wlr import StoppingCriteria, WlrProblem, assemble, default_init, solve

# Fixed offsets deriving per-component sub-seeds from the one user seed.
SEED_WEIGHTS = 1_000_003
SEED_INIT = 2_000_003


@dataclass
class SweepResult:
    """One experiment's table. columns excludes the timing column;
    timings[i] is the wall-clock seconds spent producing rows[i]."""

    columns: tuple
    rows: list = field(default_factory=list)
    timings: list = field(default_factory=list)

    def add(self, row: tuple, seconds: float = 0.0) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row width {len(row)} != {len(self.columns)}")
        self.rows.append(tuple(row))
        self.timings.append(float(seconds))

    def sorted_rows(self, include_timings: bool = False) -> list:
        paired = sorted(zip(self.rows, self.timings), key=lambda rt: rt[0])
        if include_timings:
            return [r + (t,) for r, t in paired]
        return [r for r, _ in paired]

    def to_csv_text(self, include_timings: bool = False) -> str:
        cols = self.columns + ("wall_time_seconds",) if include_timings else self.columns
        return csv_text(cols, self.sorted_rows(include_timings))

    def total_seconds(self) -> float:
        return float(sum(self.timings))


def _run_wlr(a1, a2, w1, r, epsilon, max_iter, init_seed):
    prob = WlrProblem(a1=a1, a2=a2, w1=w1, r=r)
    init = default_init(prob, seed=init_seed)
    report = solve(prob, init, StoppingCriteria(epsilon=epsilon, max_iter=max_iter))
    return report


def sweep_lambda(a1, a2, r: int, k: int, lambdas, trials: int = 10,
                 mode: str = "uniform", seed: int = 0,
                 epsilon: float = 1e-7, max_iter: int = 2500,
                 interval_width: float = 20.0) -> SweepResult:
    """For each weight level lambda, run the alternating solver against
    the constrained closed form and record lambda * ||A_G - A_WLR||_F
    averaged over trials.

    mode="uniform" uses W1 = lambda * ones; mode="interval" draws W1
    entries uniformly in [lambda, lambda + interval_width]. Trials vary
    the init sub-seed (and the weight draw in interval mode).

    CSV schema: sweep_parameter (lambda), solver_id, metric
    (lambda * ||A_G - A_WLR||_F), iterations_used (mean over trials).
    """
    a1 = as_matrix(a1, "a1")
    a2 = as_matrix(a2, "a2")
    if k != a1.shape[1]:
        raise ValidationError(f"k={k} does not match a1's column count {a1.shape[1]}")
    lam_list = [float(x) for x in lambdas]
    if not lam_list:
        raise ValidationError("lambda list must be non-empty")
    if any(x <= 0 for x in lam_list) or any(b <= a for a, b in zip(lam_list, lam_list[1:])):
        raise ValidationError("lambdas must be positive and increasing")
    if mode not in ("uniform", "interval"):
        raise ValidationError(f"mode must be 'uniform' or 'interval', got {mode!r}")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")

    m = a1.shape[0]
    a_g = solve_ghs(a1, a2, r).assemble()
    result = SweepResult(columns=("sweep_parameter", "solver_id", "metric", "iterations_used"))
    for j, lam in enumerate(lam_list):
        t0 = time.monotonic()
        metrics = []
        iters = []
        for t in range(trials):
            # Init varies per trial but is shared across lambdas, so the
            # sweep isolates the weight effect; interval-mode weight
            # draws vary per (lambda, trial).
            if mode == "uniform":
                w1 = np.full((m, k), lam)
            else:
                w1 = weight_block(m, k, lam, lam + interval_width,
                                  rng_for(seed + SEED_WEIGHTS * (j + 1) + t))
            report = _run_wlr(a1, a2, w1, r, epsilon, max_iter,
                              init_seed=seed + SEED_INIT + t)
            a_wlr = assemble(report.final_state)
            metrics.append(lam * float(np.linalg.norm(a_g - a_wlr, "fro")))
            iters.append(report.iterations)
        result.add(
            (lam, "wlr", float(np.mean(metrics)), float(np.mean(iters))),
            seconds=time.monotonic() - t0,
        )
    return result


def compare_solvers(a, k: int, r_list, w_interval, seed: int = 0,
                    epsilon: float = 1e-16, max_iter: int = 2500,
                    em_cfg: EmConfig | None = None) -> SweepResult:
    """Run the alternating solver and the EM baseline (plus plain ALS
    when k == 0) across target ranks, reporting RMSE against the data
    matrix and against the constrained closed form A_G. With k > 0 a
    "ghs" reference row records the closed form's own RMSE against the
    data.

    CSV schema (long format): sweep_parameter (r), solver_id,
    metric_name (rmse_vs_a | rmse_vs_ag), metric, iterations_used.
    """
    a = as_matrix(a, "a")
    m, n = a.shape
    lo, hi = float(w_interval[0]), float(w_interval[1])
    r_values = [int(r) for r in r_list]
    if not r_values:
        raise ValidationError("r list must be non-empty")
    for r in r_values:
        if not k <= r <= min(m, n):
            raise ValidationError(f"r={r} outside [k={k}, min(m, n)={min(m, n)}]")
    a1, a2 = a[:, :k], a[:, k:]
    em_cfg = em_cfg or EmConfig()
    rng = rng_for(seed + SEED_WEIGHTS)
    w1 = weight_block(m, k, lo, hi, rng) if k > 0 else np.ones((m, 0))

    result = SweepResult(
        columns=("sweep_parameter", "solver_id", "metric_name", "metric", "iterations_used")
    )
    for r in r_values:
        a_g = None
        if k > 0:
            t0 = time.monotonic()
            a_g = solve_ghs(a1, a2, r).assemble()
            _add_solver_rows(result, r, "ghs", a_g, a, a_g, 0,
                             time.monotonic() - t0)

        t0 = time.monotonic()
        report = _run_wlr(a1, a2, w1, r, epsilon, max_iter, init_seed=seed + SEED_INIT)
        wlr_hat = assemble(report.final_state)
        dt = time.monotonic() - t0
        _add_solver_rows(result, r, "wlr", wlr_hat, a, a_g, report.iterations, dt)

        t0 = time.monotonic()
        em_hat, em_trace = em_solve(a, w1, r, em_cfg, return_trace=True)
        dt = time.monotonic() - t0
        _add_solver_rows(result, r, "em", em_hat, a, a_g, len(em_trace) - 1, dt)

        if k == 0:
            t0 = time.monotonic()
            als_hat, als_trace = als_solve(a, r, max_iter=max_iter, tol=epsilon,
                                           seed=seed + SEED_INIT, return_trace=True)
            dt = time.monotonic() - t0
            _add_solver_rows(result, r, "als", als_hat, a, None, len(als_trace) - 1, dt)
    return result


def _add_solver_rows(result, r, solver_id, estimate, a, a_g, iterations, seconds):
    result.add((r, solver_id, "rmse_vs_a", rmse(a, estimate), iterations), seconds)
    if a_g is not None:
        result.add((r, solver_id, "rmse_vs_ag", rmse(a_g, estimate), iterations), 0.0)


def convergence_trace(prob: WlrProblem, init, stop: StoppingCriteria) -> SweepResult:
    """Per-iteration error trace of one alternating run. When the weight
    block is uniform, also the relative distance to the closed-form
    solution of the uniformly weighted problem.

    CSV schema: iteration, error, rel_error [, rel_dist_to_closed_form].
    """
    uniform = bool(prob.k > 0 and prob.w1.size and float(np.ptp(prob.w1)) == 0.0)
    closed = None
    closed_norm = 0.0
    if uniform:
        lam = float(prob.w1.flat[0])
        x1_hat, x2_hat = solve_uniform_penalized(prob.a1, prob.a2, lam, prob.r)
        closed = np.hstack([x1_hat, x2_hat])
        closed_norm = float(np.linalg.norm(closed, "fro"))

    cols = ("iteration", "error", "rel_error")
    if uniform:
        cols = cols + ("rel_dist_to_closed_form",)
    result = SweepResult(columns=cols)

    tracker = {"prev": assemble(init)}

    def on_iteration(p, state):
        cur = assemble(state)
        prev = tracker["prev"]
        err = float(np.linalg.norm(cur - prev, "fro"))
        prev_norm = float(np.linalg.norm(prev, "fro"))
        rel = err / prev_norm if prev_norm > 0 else float("inf")
        row = (p, err, rel)
        if uniform:
            dist = float(np.linalg.norm(cur - closed, "fro"))
            row = row + (dist / closed_norm if closed_norm > 0 else dist,)
        result.add(row)
        tracker["prev"] = cur

    t0 = time.monotonic()
    solve(prob, init, stop, callback=on_iteration)
    if result.timings:
        result.timings[0] = time.monotonic() - t0
    return result
