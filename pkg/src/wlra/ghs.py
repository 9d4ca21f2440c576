"""Closed-form solvers for column-constrained low-rank approximation.

Three problems, all solved exactly through one SVD:

* the constrained problem: approximate (A1 A2) at rank <= r while
  keeping the block A1 untouched (Golub-Hoffman-Stewart);
* the uniform-weight penalized problem
  min lambda^2 ||A1 - X1||_F^2 + ||A2 - X2||_F^2 over rank <= r;
* the rank-penalized limit: rank chosen by a threshold rule on the
  squared singular values of the projected second block.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg import (
    RANK_RTOL,
    as_matrix,
    hard_threshold,
    project_onto_colspace,
    singular_values,
)


class BoundaryTieWarning(UserWarning):
    """tau coincides with a squared singular value; the closed interval
    rule still applies (equality attaches tau to the smaller rank)."""


@dataclass(frozen=True)
class GhsSolution:
    """Constrained approximation (x1 x2) with x1 = A1 exactly.

    spectral_gap is sigma_{r-k} - sigma_{r-k+1} of the projected block
    P_perp(A2); +inf when nothing is truncated (r-k == 0 or r-k >= its
    numerical rank), in which case the solution is trivially unique.
    unique <=> spectral_gap > 1e-10 * sigma_1.
    """

    x1: np.ndarray
    x2: np.ndarray
    spectral_gap: float
    unique: bool

    def assemble(self) -> np.ndarray:
        return np.hstack([self.x1, self.x2])

    def objective(self, a2) -> float:
        return float(np.linalg.norm(as_matrix(a2) - self.x2, "fro") ** 2)


@dataclass(frozen=True)
class PenalizedSolution:
    """Rank-penalized limit solution: selected rank r_star and the
    constrained solution at total rank k + r_star."""

    r_star: int
    solution: GhsSolution
    tau: float


def _validate_blocks(a1: np.ndarray, a2: np.ndarray) -> None:
    if a1.shape[0] != a2.shape[0]:
        raise ValidationError(
            f"a1 and a2 must have equal row counts, got {a1.shape[0]} vs {a2.shape[0]}"
        )


def _gap_and_uniqueness(sigma: np.ndarray, q: int) -> tuple[float, bool]:
    """Spectral gap sigma_q - sigma_{q+1} of the projected block and the
    uniqueness flag for truncation at rank q."""
    s1 = float(sigma[0]) if sigma.size else 0.0
    rank = int(np.count_nonzero(sigma > RANK_RTOL * s1)) if s1 > 0.0 else 0
    if q == 0 or q >= rank:
        return float("inf"), True
    s_q = float(sigma[q - 1])
    s_q1 = float(sigma[q]) if q < sigma.size else 0.0
    gap = s_q - s_q1
    return gap, gap > 1e-10 * s1


def solve_ghs(a1, a2, r: int) -> GhsSolution:
    """Minimize ||A2 - X2||_F^2 over rank(A1 X2) <= r with the first
    block fixed: X2 = P(A2) + H_{r-k}(P_perp(A2)).

    a1 must have full column rank k, and k <= r <= min(m, n).
    """
    a1 = as_matrix(a1, "a1")
    a2 = as_matrix(a2, "a2")
    _validate_blocks(a1, a2)
    m = a1.shape[0]
    k = a1.shape[1]
    n = k + a2.shape[1]
    if r < k:
        raise ValidationError(f"r >= k required, got r={r} < k={k}")
    if r > min(m, n):
        raise ValidationError(f"r <= min(m, n) required, got r={r} > {min(m, n)}")
    proj = project_onto_colspace(a1, a2)  # raises on rank-deficient a1
    perp = a2 - proj
    sigma = singular_values(perp)
    q = r - k
    gap, unique = _gap_and_uniqueness(sigma, q)
    x2 = proj + hard_threshold(perp, min(q, min(perp.shape)))
    return GhsSolution(x1=a1.copy(), x2=x2, spectral_gap=gap, unique=unique)


def solve_uniform_penalized(a1, a2, lam: float, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form minimizer of lambda^2 ||A1-X1||_F^2 + ||A2-X2||_F^2
    over rank(X1 X2) <= r: threshold the SVD of (lambda*A1  A2) and
    scale the first block back by 1/lambda.
    """
    a1 = as_matrix(a1, "a1")
    a2 = as_matrix(a2, "a2")
    _validate_blocks(a1, a2)
    if not lam > 0.0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    m = a1.shape[0]
    n = a1.shape[1] + a2.shape[1]
    if not 0 <= r <= min(m, n):
        raise ValidationError(f"rank out of range: r={r} not in [0, {min(m, n)}]")
    k = a1.shape[1]
    scaled = np.hstack([lam * a1, a2])
    trunc = hard_threshold(scaled, r)
    return trunc[:, :k] / lam, trunc[:, k:]


def select_rank_from_tau(sigmas, tau: float) -> int:
    """The unique r* with sigma_{r*+1}^2 <= tau < sigma_{r*}^2, using the
    conventions sigma_0 = +inf and sigma_{s+1} = 0.

    Equivalently the argmin over r of sum_{i>r} sigma_i^2 + tau*r.
    Equality tau == sigma_i^2 attaches to the smaller rank (r* = i-1);
    a BoundaryTieWarning advisory is issued when tau sits within 1e-12
    relative of some sigma_i^2.
    """
    s = np.asarray(sigmas, dtype=float)
    if s.ndim != 1:
        raise ValidationError("sigmas must be a 1-D list of singular values")
    if s.size and (np.any(s < 0) or np.any(np.diff(s) > 0)):
        raise ValidationError("sigmas must be non-negative and non-increasing")
    if not tau > 0.0:
        raise ValidationError(f"tau must be positive, got {tau}")
    sq = s * s
    near = np.abs(sq - tau) <= 1e-12 * np.maximum(sq, tau)
    if near.any():
        i = int(np.argmax(near)) + 1
        warnings.warn(
            f"tau is numerically on the boundary tau == sigma_{i}^2; "
            f"selecting r* = {i - 1}",
            BoundaryTieWarning,
            stacklevel=2,
        )
    return int(np.count_nonzero(sq > tau))


def solve_rank_penalized_limit(a1, a2, tau: float) -> PenalizedSolution:
    """Limit solution of the rank-penalized problem: pick r* from the
    squared singular values of P_perp(A2) by the threshold rule, then
    solve the constrained problem at total rank k + r*.
    """
    a1 = as_matrix(a1, "a1")
    a2 = as_matrix(a2, "a2")
    _validate_blocks(a1, a2)
    if not tau > 0.0:
        raise ValidationError(f"tau must be positive, got {tau}")
    perp = a2 - project_onto_colspace(a1, a2)
    sigma = singular_values(perp)
    s1 = float(sigma[0]) if sigma.size else 0.0
    nonzero = sigma[sigma > RANK_RTOL * s1] if s1 > 0.0 else sigma[:0]
    r_star = select_rank_from_tau(nonzero, tau)
    sol = solve_ghs(a1, a2, a1.shape[1] + r_star)
    return PenalizedSolution(r_star=r_star, solution=sol, tau=float(tau))
