"""Seeded synthetic test matrices.

All randomness flows through numpy's PCG64 generator, so identical
seeds give identical matrices within this implementation (no
cross-language bit-exactness is promised).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg import as_matrix


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class SynthSpec:
    """Low-rank-plus-noise matrix: A = L R^T + alpha * E with L, R, E
    standard normal and alpha = noise_factor * max entry of L R^T."""

    m: int
    n: int
    true_rank: int
    noise_factor: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValidationError(f"dimensions must be positive, got {self.m}x{self.n}")
        if not 0 <= self.true_rank <= min(self.m, self.n):
            raise ValidationError(
                f"true_rank out of range: {self.true_rank} not in [0, {min(self.m, self.n)}]"
            )
        if self.noise_factor < 0.0:
            raise ValidationError("noise_factor must be non-negative")


def gen_low_rank_plus_noise(spec: SynthSpec) -> np.ndarray:
    rng = rng_for(spec.seed)
    low = rng.standard_normal((spec.m, spec.true_rank))
    right = rng.standard_normal((spec.n, spec.true_rank))
    base = low @ right.T
    noise = rng.standard_normal((spec.m, spec.n))
    alpha = spec.noise_factor * (float(np.max(base)) if base.size else 0.0)
    return base + alpha * noise


@dataclass(frozen=True)
class SpectrumSpec:
    """Matrix with a prescribed non-increasing singular spectrum,
    A = U diag(singular_values) V^T with seeded random orthonormal U, V."""

    m: int
    n: int
    singular_values: tuple
    seed: int = 0

    def __post_init__(self):
        sv = tuple(float(s) for s in self.singular_values)
        object.__setattr__(self, "singular_values", sv)
        if self.m < 1 or self.n < 1:
            raise ValidationError(f"dimensions must be positive, got {self.m}x{self.n}")
        if len(sv) > min(self.m, self.n):
            raise ValidationError(
                f"{len(sv)} singular values exceed min(m, n) = {min(self.m, self.n)}"
            )
        arr = np.asarray(sv)
        if arr.size and (np.any(arr < 0.0) or np.any(np.diff(arr) > 0.0)):
            raise ValidationError("singular_values must be non-negative, non-increasing")

    @property
    def kappa(self) -> float:
        """Condition number over the nonzero spectrum."""
        nz = [s for s in self.singular_values if s > 0.0]
        if not nz:
            return float("nan")
        return max(nz) / min(nz)


def gen_conditioned(spec: SpectrumSpec) -> np.ndarray:
    rng = rng_for(spec.seed)
    t = len(spec.singular_values)
    u, _ = np.linalg.qr(rng.standard_normal((spec.m, t)))
    v, _ = np.linalg.qr(rng.standard_normal((spec.n, t)))
    return (u * np.asarray(spec.singular_values)) @ v.T


def conditioned_spectrum(kappa: float, total: int = 30, distinct: int = 20) -> tuple:
    """A spectrum in the benchmark's style: `distinct` strictly
    decreasing values from kappa down toward 1, then `total - distinct`
    repeated ones. Condition number over the nonzero part is kappa."""
    if kappa < 1.0:
        raise ValidationError(f"kappa must be >= 1, got {kappa}")
    if not 0 < distinct <= total:
        raise ValidationError("need 0 < distinct <= total")
    head = np.linspace(kappa, 1.0, distinct + 1)[:-1]
    tail = np.ones(total - distinct)
    return tuple(np.concatenate([head, tail]))


def split_blocks(a, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Split an m x n matrix into its first k columns and the rest."""
    a = as_matrix(a)
    if not 0 <= k <= a.shape[1]:
        raise ValidationError(f"k out of range: {k} not in [0, {a.shape[1]}]")
    return a[:, :k], a[:, k:]


def weight_block(m: int, k: int, lo: float, hi: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform random weights in [lo, hi] for the constrained block."""
    if not 0.0 < lo <= hi:
        raise ValidationError(f"need 0 < lo <= hi, got [{lo}, {hi}]")
    return lo + (hi - lo) * rng.random((m, k))
