"""Reference competitors for the benchmark harness: an EM-style
imputation iteration for weighted low-rank approximation, plain
alternating least squares, and the shared RMSE metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg import as_matrix, hard_threshold


@dataclass(frozen=True)
class EmConfig:
    """EM iteration controls. weight_floor_eps is the rescaled-weight
    bound below which X starts from zero instead of from A."""

    max_iter: int = 5000
    tol: float = 1e-10
    weight_floor_eps: float = 1e-3

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValidationError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.weight_floor_eps < 0.0:
            raise ValidationError("weight_floor_eps must be non-negative")


def em_weight(a, w1) -> np.ndarray:
    """Assemble and rescale the full weight: (W1  1) divided by max(W1).

    With k == 0 the weight is all ones.
    """
    a = as_matrix(a, "a")
    w1 = as_matrix(w1, "w1")
    m, n = a.shape
    k = w1.shape[1]
    if w1.shape[0] != m or k > n:
        raise ValidationError(f"w1 shape {w1.shape} incompatible with a shape {a.shape}")
    if w1.size and not np.all(w1 > 0.0):
        raise ValidationError("w1 entries must be strictly positive")
    full = np.hstack([w1, np.ones((m, n - k))])
    # Dividing by the max of the assembled weight keeps every rescaled
    # entry in (0, 1], which the imputation step's convex combination
    # needs; it coincides with dividing by max(W1) whenever max(W1) >= 1.
    if full.size:
        full = full / np.max(full)
    return full


def em_solve(a, w1, r: int, cfg: EmConfig | None = None, return_trace: bool = False):
    """EM-style imputation: X <- H_r(W.*W.*A + (1 - W.*W).*X) with the
    rescaled weight W, iterated until ||X_{t+1} - X_t||_F < tol or
    max_iter. The squared weight makes each step a majorize-minimize
    move for ||(A - X) .* W||_F^2, so that objective is non-increasing
    over the produced iterates (the initial X = A is not rank-feasible,
    so the very first step may sit above it).

    Returns the rank-<= r iterate; with return_trace=True also the list
    of weighted objective values (index 0 = initial X, then one per
    iteration).
    """
    cfg = cfg or EmConfig()
    a = as_matrix(a, "a")
    m, n = a.shape
    if not 0 <= r <= min(m, n):
        raise ValidationError(f"rank out of range: r={r} not in [0, {min(m, n)}]")
    w = em_weight(a, w1)
    w2 = w * w
    x = np.zeros_like(a) if (w.size and np.min(w) <= cfg.weight_floor_eps) else a.copy()

    def weighted_obj(x_):
        return float(np.sum(((a - x_) * w) ** 2))

    trace = [weighted_obj(x)]
    for _ in range(cfg.max_iter):
        x_next = hard_threshold(w2 * a + (1.0 - w2) * x, r)
        trace.append(weighted_obj(x_next))
        delta = float(np.linalg.norm(x_next - x, "fro"))
        x = x_next
        if delta < cfg.tol:
            break
    return (x, trace) if return_trace else x


def als_solve(a, r: int, max_iter: int = 1000, tol: float = 1e-10,
              seed: int = 0, return_trace: bool = False):
    """Plain rank-r alternating least squares on the full matrix:
    alternate exact B and D updates for ||A - B D||_F^2 from a seeded
    random-normal D. Stopping mirrors the weighted solver: iterate
    change below tol (absolute or relative) or max_iter.

    Returns B D; with return_trace=True also the squared-residual trace.
    """
    a = as_matrix(a, "a")
    m, n = a.shape
    if not 0 <= r <= min(m, n):
        raise ValidationError(f"rank out of range: r={r} not in [0, {min(m, n)}]")
    if not tol > 0.0:
        raise ValidationError(f"tol must be positive, got {tol}")
    if r == 0:
        return (np.zeros_like(a), [float(np.sum(a * a))]) if return_trace else np.zeros_like(a)
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((r, n))
    b = np.zeros((m, r))
    x = b @ d
    trace = [float(np.sum((a - x) ** 2))]
    for _ in range(max_iter):
        bt, *_ = np.linalg.lstsq(d.T, a.T, rcond=None)
        b = bt.T
        d, *_ = np.linalg.lstsq(b, a, rcond=None)
        x_next = b @ d
        trace.append(float(np.sum((a - x_next) ** 2)))
        delta = float(np.linalg.norm(x_next - x, "fro"))
        norm_prev = float(np.linalg.norm(x, "fro"))
        x = x_next
        if delta < tol or (norm_prev > 0.0 and delta / norm_prev < tol):
            break
    return (x, trace) if return_trace else x


def rmse(a, a_hat) -> float:
    """||A - A_hat||_F / sqrt(m n)."""
    a = as_matrix(a, "a")
    a_hat = as_matrix(a_hat, "a_hat")
    if a.shape != a_hat.shape:
        raise ValidationError(f"rmse: shape mismatch {a.shape} vs {a_hat.shape}")
    m, n = a.shape
    return float(np.linalg.norm(a - a_hat, "fro") / np.sqrt(m * n))
