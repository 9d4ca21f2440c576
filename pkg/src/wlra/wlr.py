"""Alternating minimization for column-block-weighted low-rank
approximation.

Objective, over X1 (m x k), C (k x (n-k)), B (m x (r-k)), D ((r-k) x (n-k)):

    F(X1, C, B, D) = ||(A1 - X1) .* W1||_F^2 + ||A2 - X1 C - B D||_F^2

so the assembled estimate (X1  X1 C + B D) has rank <= r by construction.
One sweep updates X1 -> C -> B -> D, each to its exact block minimizer;
the objective sequence is non-increasing and the per-sweep decrease
splits exactly into four non-negative terms (see descent_decomposition),
which the test suite uses as a runtime correctness oracle.

The X1 update solves one small SPD system per row:
(diag(W1(i,:)^2) + C C^T) x = E(i,:)^T with E = A1 .* W1 .* W1 + (A2 - B D) C^T.
Strictly positive weights make every system positive definite.

Weights above ~1e6 are unsupported: the row systems then carry
lambda^2 ~ 1e12 against machine epsilon and the updates lose accuracy.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .linalg import RANK_RTOL, as_matrix, singular_values


class RankDeficiencyWarning(UserWarning):
    """A Gram matrix in an update was numerically singular; the update
    fell back to the minimum-norm least-squares solution."""


class StopReason(enum.Enum):
    ABS_ERROR = "abs_error"
    REL_ERROR = "rel_error"
    MAX_ITER = "max_iter"


@dataclass(frozen=True)
class WlrProblem:
    """Problem instance: blocks a1 (m x k), a2 (m x (n-k)), strictly
    positive weights w1 (m x k), target rank r with k <= r <= min(m, n).

    k == 0 (no constrained columns, plain rank-r factorization of a2)
    and k == r (no free factor, B and D empty) are both valid.
    """

    a1: np.ndarray
    a2: np.ndarray
    w1: np.ndarray
    r: int

    def __post_init__(self):
        object.__setattr__(self, "a1", as_matrix(self.a1, "a1"))
        object.__setattr__(self, "a2", as_matrix(self.a2, "a2"))
        object.__setattr__(self, "w1", as_matrix(self.w1, "w1"))
        if self.a1.shape[0] != self.a2.shape[0]:
            raise ValidationError(
                f"a1 and a2 must have equal row counts, got "
                f"{self.a1.shape[0]} vs {self.a2.shape[0]}"
            )
        if self.w1.shape != self.a1.shape:
            raise ValidationError(
                f"w1 must match a1's shape, got {self.w1.shape} vs {self.a1.shape}"
            )
        if self.w1.size and not np.all(self.w1 > 0.0):
            raise ValidationError("w1 entries must be strictly positive")
        if not self.k <= self.r <= min(self.m, self.n):
            raise ValidationError(
                f"k <= r <= min(m, n) required, got k={self.k}, r={self.r}, "
                f"min(m, n)={min(self.m, self.n)}"
            )
        if self.k > 0:
            s = singular_values(self.a1)
            if s[0] == 0.0 or s[-1] <= RANK_RTOL * s[0]:
                raise ValidationError("a1 must have full column rank")

    @property
    def m(self) -> int:
        return self.a1.shape[0]

    @property
    def k(self) -> int:
        return self.a1.shape[1]

    @property
    def n(self) -> int:
        return self.k + self.a2.shape[1]


@dataclass
class WlrState:
    """One iterate: factors and the sweep counter p."""

    x1: np.ndarray
    c: np.ndarray
    b: np.ndarray
    d: np.ndarray
    p: int = 0


@dataclass(frozen=True)
class StoppingCriteria:
    """Stop when ||iterate_{p+1} - iterate_p||_F < epsilon, or that
    error divided by ||iterate_p||_F < epsilon, or at max_iter sweeps."""

    epsilon: float = 1e-10
    max_iter: int = 2500

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class DescentDecomposition:
    """Exact four-term split of one sweep's objective decrease:
    d1 + d2 + d3 + d4 == m_p - m_p1 (up to roundoff).

    d1 covers the X1 move (both its weighted and coupling terms),
    d2 the C move, d3 the B move, d4 the D move.
    """

    d1: float
    d2: float
    d3: float
    d4: float
    m_p: float
    m_p1: float

    @property
    def total(self) -> float:
        return self.d1 + self.d2 + self.d3 + self.d4


@dataclass
class WlrReport:
    """Everything a run produced.

    objective_trace[p] is the objective at sweep p (index 0 = initial
    state); error_trace[p] = ||iterate_{p+1} - iterate_p||_F. The
    descent and residual traces are populated only when diagnostics are
    enabled. fallback_events lists (iteration, block) pairs where a
    rank-deficient Gram matrix forced a minimum-norm fallback.
    """

    final_state: WlrState
    objective_trace: list[float]
    error_trace: list[float]
    descent_traces: list[DescentDecomposition]
    stop_reason: StopReason
    stationarity_residuals: tuple[float, float, float, float]
    residual_traces: list[tuple[float, float, float, float]] = field(default_factory=list)
    fallback_events: list[tuple[int, str]] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.error_trace)


def assemble(state: WlrState) -> np.ndarray:
    """The m x n estimate (X1  X1 C + B D) for this iterate."""
    return np.hstack([state.x1, state.x1 @ state.c + state.b @ state.d])


def objective(prob: WlrProblem, st: WlrState) -> float:
    _check_state_shapes(prob, st)
    weighted = (prob.a1 - st.x1) * prob.w1
    resid = prob.a2 - st.x1 @ st.c - st.b @ st.d
    return float(np.sum(weighted * weighted) + np.sum(resid * resid))


def _check_state_shapes(prob: WlrProblem, st: WlrState) -> None:
    m, k, n, r = prob.m, prob.k, prob.n, prob.r
    expected = {
        "x1": (m, k),
        "c": (k, n - k),
        "b": (m, r - k),
        "d": (r - k, n - k),
    }
    for name, shape in expected.items():
        got = getattr(st, name).shape
        if got != shape:
            raise ValidationError(f"state.{name} has shape {got}, expected {shape}")


def _full_rank(s: np.ndarray) -> bool:
    return s.size > 0 and s[0] > 0.0 and s[-1] > RANK_RTOL * s[0]


def update_x1(prob: WlrProblem, st: WlrState) -> np.ndarray:
    """Exact minimizer of F over X1 at fixed (C, B, D): one SPD solve
    per row, batched."""
    _check_state_shapes(prob, st)
    k = prob.k
    if k == 0:
        return st.x1.copy()
    w2 = prob.w1 * prob.w1
    e = prob.a1 * w2 + (prob.a2 - st.b @ st.d) @ st.c.T
    gram = st.c @ st.c.T
    systems = np.broadcast_to(gram, (prob.m, k, k)).copy()
    idx = np.arange(k)
    systems[:, idx, idx] += w2
    return np.linalg.solve(systems, e[:, :, None])[:, :, 0]


def _update_c(prob: WlrProblem, x1: np.ndarray, bd: np.ndarray) -> tuple[np.ndarray, bool]:
    if prob.k == 0:
        return np.zeros((0, prob.n - prob.k)), False
    rhs = x1.T @ (prob.a2 - bd)
    gram = x1.T @ x1
    if _full_rank(singular_values(x1)):
        return np.linalg.solve(gram, rhs), False
    c, *_ = np.linalg.lstsq(x1, prob.a2 - bd, rcond=None)
    return c, True


def update_c(prob: WlrProblem, st: WlrState) -> np.ndarray:
    """Exact minimizer over C at fixed (X1, B, D); expects st.x1 already
    updated this sweep. Falls back to the minimum-norm least-squares
    solution (with a RankDeficiencyWarning) if X1 is rank deficient."""
    _check_state_shapes(prob, st)
    c, fell_back = _update_c(prob, st.x1, st.b @ st.d)
    if fell_back:
        warnings.warn("X1 is rank deficient; using minimum-norm C",
                      RankDeficiencyWarning, stacklevel=2)
    return c


def _update_b(prob: WlrProblem, x1: np.ndarray, c: np.ndarray,
              d: np.ndarray) -> tuple[np.ndarray, bool]:
    width = prob.r - prob.k
    if width == 0:
        return np.zeros((prob.m, 0)), False
    resid = prob.a2 - x1 @ c
    gram = d @ d.T
    if _full_rank(singular_values(d)):
        return np.linalg.solve(gram, d @ resid.T).T, False
    b_t, *_ = np.linalg.lstsq(d.T, resid.T, rcond=None)
    return b_t.T, True


def update_b(prob: WlrProblem, st: WlrState) -> np.ndarray:
    """Exact minimizer over B at fixed (X1, C, D); fallback as update_c."""
    _check_state_shapes(prob, st)
    b, fell_back = _update_b(prob, st.x1, st.c, st.d)
    if fell_back:
        warnings.warn("D is rank deficient; using minimum-norm B",
                      RankDeficiencyWarning, stacklevel=2)
    return b


def _update_d(prob: WlrProblem, x1: np.ndarray, c: np.ndarray,
              b: np.ndarray) -> tuple[np.ndarray, bool]:
    width = prob.r - prob.k
    if width == 0:
        return np.zeros((0, prob.n - prob.k)), False
    resid = prob.a2 - x1 @ c
    gram = b.T @ b
    if _full_rank(singular_values(b)):
        return np.linalg.solve(gram, b.T @ resid), False
    d, *_ = np.linalg.lstsq(b, resid, rcond=None)
    return d, True


def update_d(prob: WlrProblem, st: WlrState) -> np.ndarray:
    """Exact minimizer over D at fixed (X1, C, B); fallback as update_c."""
    _check_state_shapes(prob, st)
    d, fell_back = _update_d(prob, st.x1, st.c, st.b)
    if fell_back:
        warnings.warn("B is rank deficient; using minimum-norm D",
                      RankDeficiencyWarning, stacklevel=2)
    return d


def gradients(prob: WlrProblem, st: WlrState):
    """Partial derivatives of F with respect to (X1, C, B, D)."""
    _check_state_shapes(prob, st)
    resid = st.x1 @ st.c + st.b @ st.d - prob.a2  # X2 residual, negated
    g_x1 = 2.0 * ((st.x1 - prob.a1) * prob.w1 * prob.w1 + resid @ st.c.T)
    g_c = 2.0 * (st.x1.T @ resid)
    g_b = 2.0 * (resid @ st.d.T)
    g_d = 2.0 * (st.b.T @ resid)
    return g_x1, g_c, g_b, g_d


def stationarity_residuals(prob: WlrProblem, st: WlrState) -> tuple[float, float, float, float]:
    """Frobenius norms of the four block gradients of F at st."""
    return tuple(float(np.linalg.norm(g, "fro")) for g in gradients(prob, st))


def descent_decomposition(prob: WlrProblem, st_p: WlrState,
                          st_p1: WlrState) -> DescentDecomposition:
    """Four-term split of m_p - m_{p+1} for one full sweep st_p -> st_p1."""
    dx = st_p.x1 - st_p1.x1
    d1 = float(np.sum((dx * prob.w1) ** 2) + np.sum((dx @ st_p.c) ** 2))
    d2 = float(np.sum((st_p1.x1 @ (st_p.c - st_p1.c)) ** 2))
    d3 = float(np.sum(((st_p.b - st_p1.b) @ st_p.d) ** 2))
    d4 = float(np.sum((st_p1.b @ (st_p.d - st_p1.d)) ** 2))
    return DescentDecomposition(
        d1=d1, d2=d2, d3=d3, d4=d4,
        m_p=objective(prob, st_p), m_p1=objective(prob, st_p1),
    )


def default_init(prob: WlrProblem, seed: int = 0) -> WlrState:
    """Default start: X1 and D standard normal (seeded), B and C zero.

    A numerically rank-deficient draw is redrawn with the seed
    incremented, at most 5 times.
    """
    m, k, n, r = prob.m, prob.k, prob.n, prob.r
    for attempt in range(6):
        rng = np.random.default_rng(seed + attempt)
        x1 = rng.standard_normal((m, k))
        d = rng.standard_normal((r - k, n - k))
        x1_ok = k == 0 or _full_rank(singular_values(x1))
        d_ok = r - k == 0 or _full_rank(singular_values(d))
        if x1_ok and d_ok:
            break
    else:
        raise ValidationError("could not draw full-rank initial factors")
    return WlrState(
        x1=x1,
        c=np.zeros((k, n - k)),
        b=np.zeros((m, r - k)),
        d=d,
        p=0,
    )


def _sweep(prob: WlrProblem, st: WlrState) -> tuple[WlrState, list[str]]:
    """One full update sweep X1 -> C -> B -> D; returns the new state and
    the blocks that needed a minimum-norm fallback."""
    fallbacks = []
    x1 = update_x1(prob, st)
    c, fb = _update_c(prob, x1, st.b @ st.d)
    if fb:
        fallbacks.append("c")
    b, fb = _update_b(prob, x1, c, st.d)
    if fb:
        fallbacks.append("b")
    d, fb = _update_d(prob, x1, c, b)
    if fb:
        fallbacks.append("d")
    return WlrState(x1=x1, c=c, b=b, d=d, p=st.p + 1), fallbacks


def solve(prob: WlrProblem, init: WlrState, stop: StoppingCriteria,
          diagnostics: bool = False, callback=None) -> WlrReport:
    """Run sweeps until the stopping rule fires.

    The error at sweep p is ||iterate_{p+1} - iterate_p||_F over the
    assembled m x n estimate; the run stops when it (or its value
    relative to ||iterate_p||_F) drops below stop.epsilon, or at
    stop.max_iter. With diagnostics on, each sweep also records its
    descent decomposition and the four gradient norms.

    callback, if given, is invoked as callback(p, state) after each
    sweep (p = state.p).
    """
    _check_state_shapes(prob, init)
    state = WlrState(x1=init.x1.copy(), c=init.c.copy(),
                     b=init.b.copy(), d=init.d.copy(), p=init.p)
    current = assemble(state)
    objective_trace = [objective(prob, state)]
    error_trace: list[float] = []
    descent_traces: list[DescentDecomposition] = []
    residual_traces: list[tuple[float, float, float, float]] = []
    fallback_events: list[tuple[int, str]] = []
    stop_reason = StopReason.MAX_ITER

    for _ in range(stop.max_iter):
        new_state, fallbacks = _sweep(prob, state)
        for block in fallbacks:
            fallback_events.append((new_state.p, block))
        if diagnostics:
            descent_traces.append(descent_decomposition(prob, state, new_state))
            residual_traces.append(stationarity_residuals(prob, new_state))
        new_iterate = assemble(new_state)
        err = float(np.linalg.norm(new_iterate - current, "fro"))
        error_trace.append(err)
        objective_trace.append(objective(prob, new_state))
        prev_norm = float(np.linalg.norm(current, "fro"))
        state, current = new_state, new_iterate
        if callback is not None:
            callback(state.p, state)
        if err < stop.epsilon:
            stop_reason = StopReason.ABS_ERROR
            break
        if prev_norm > 0.0 and err / prev_norm < stop.epsilon:
            stop_reason = StopReason.REL_ERROR
            break

    return WlrReport(
        final_state=state,
        objective_trace=objective_trace,
        error_trace=error_trace,
        descent_traces=descent_traces,
        stop_reason=stop_reason,
        stationarity_residuals=stationarity_residuals(prob, state),
        residual_traces=residual_traces,
        fallback_events=fallback_events,
    )
