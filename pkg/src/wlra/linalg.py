"""Dense matrix primitives: SVD with a fixed sign convention, hard
thresholding, orthogonal projections, canonical angles, QR.

Everything here is a pure function over float64 arrays; results are
deterministic for identical inputs. All matrices are dense 2-D arrays
with finite entries (constructors reject NaN/Inf).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

# Numerical rank: count singular values above RANK_RTOL * sigma_max.
RANK_RTOL = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a float64 2-D array with finite entries."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.size and not np.isfinite(arr).all():
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def _require_same_shape(a: np.ndarray, b: np.ndarray, op: str) -> None:
    if a.shape != b.shape:
        raise ValidationError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def hadamard(a, b) -> np.ndarray:
    """Entrywise product of two same-shape matrices."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    _require_same_shape(a, b, "hadamard")
    return a * b


def frobenius_norm(a) -> float:
    """sqrt of the sum of squared entries."""
    a = as_matrix(a)
    return float(np.linalg.norm(a, "fro"))


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD a = u @ diag(sigma) @ v.T with orthonormal columns.

    sigma is 1-D, non-negative, non-increasing. Column signs are fixed:
    the largest-magnitude entry of each column of u is non-negative,
    ties broken by lowest row index.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


def svd(a) -> SvdFactors:
    """Thin SVD with the deterministic sign convention.

    Raises NumericalError if the underlying iterative kernel fails to
    converge (rare; surfaced instead of an opaque LinAlgError).
    """
    a = as_matrix(a)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    v = vh.T
    # np.argmax returns the first maximal index, which breaks magnitude
    # ties by lowest row index.
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0.0:
            u[:, j] = -u[:, j]
            v[:, j] = -v[:, j]
    return SvdFactors(u=u, sigma=s, v=v)


def singular_values(a) -> np.ndarray:
    """Singular values only, non-increasing."""
    a = as_matrix(a)
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc


def numerical_rank(a) -> int:
    """Count of singular values above RANK_RTOL * sigma_max."""
    s = singular_values(a)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > RANK_RTOL * s[0]))


def hard_threshold(a, r: int) -> np.ndarray:
    """Best Frobenius rank-r approximation: keep the r largest singular
    values, zero the rest (Eckart-Young-Mirsky).

    When sigma_r == sigma_{r+1} the result is one minimizer, the first r
    in the deterministic SVD ordering.
    """
    a = as_matrix(a)
    m, n = a.shape
    if not 0 <= r <= min(m, n):
        raise ValidationError(f"rank out of range: r={r} not in [0, {min(m, n)}]")
    if r == min(m, n):
        return a.copy()
    f = svd(a)
    return (f.u[:, :r] * f.sigma[:r]) @ f.v[:, :r].T


def _orthonormal_basis(basis: np.ndarray) -> np.ndarray:
    """Reduced-QR orthonormal basis of the column space; the caller must
    have checked full column rank already."""
    q, _ = np.linalg.qr(basis)
    return q


def _check_full_column_rank(basis: np.ndarray, name: str) -> None:
    if basis.shape[1] == 0:
        raise ValidationError(f"{name} has no columns")
    s = singular_values(basis)
    if s[0] == 0.0 or s[-1] <= RANK_RTOL * s[0]:
        raise ValidationError(
            f"{name} is rank deficient (sigma_min <= {RANK_RTOL:g} * sigma_max)"
        )


def project_onto_colspace(basis, target) -> np.ndarray:
    """Orthogonal projection of target's columns onto span(basis)."""
    basis = as_matrix(basis, "basis")
    target = as_matrix(target, "target")
    if basis.shape[0] != target.shape[0]:
        raise ValidationError(
            f"projection: row mismatch {basis.shape[0]} vs {target.shape[0]}"
        )
    _check_full_column_rank(basis, "basis")
    q = _orthonormal_basis(basis)
    return q @ (q.T @ target)


def project_onto_complement(basis, target) -> np.ndarray:
    """Projection onto the orthogonal complement of span(basis),
    computed as target - P(target)."""
    target_arr = as_matrix(target, "target")
    return target_arr - project_onto_colspace(basis, target_arr)


def canonical_angle_sines(b, b_tilde) -> np.ndarray:
    """Sines of the canonical (principal) angles between two column
    spaces, non-increasing, each in [0, 1].

    Computed as the singular values of (I - P_B) Q_Btilde, which is
    accurate for small angles; satisfies
    ||P_B - P_Btilde||_F = sqrt(2) * ||sines||_2.
    """
    b = as_matrix(b, "b")
    bt = as_matrix(b_tilde, "b_tilde")
    if b.shape[1] != bt.shape[1]:
        raise ValidationError(
            f"canonical angles: column count mismatch {b.shape[1]} vs {bt.shape[1]}"
        )
    if b.shape[0] != bt.shape[0]:
        raise ValidationError(
            f"canonical angles: row mismatch {b.shape[0]} vs {bt.shape[0]}"
        )
    _check_full_column_rank(b, "b")
    _check_full_column_rank(bt, "b_tilde")
    qb = _orthonormal_basis(b)
    qt = _orthonormal_basis(bt)
    sines = singular_values(qt - qb @ (qb.T @ qt))
    return np.clip(sines, 0.0, 1.0)


@dataclass(frozen=True)
class QrFactors:
    """Reduced QR: q has orthonormal columns, r is upper triangular."""

    q: np.ndarray
    r: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.q @ self.r


def qr(a) -> QrFactors:
    a = as_matrix(a)
    q, r = np.linalg.qr(a)
    return QrFactors(q=q, r=r)
