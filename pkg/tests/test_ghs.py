import numpy as np
import pytest

from wlra.errors import ValidationError
from wlra.ghs import (
    BoundaryTieWarning,
    select_rank_from_tau,
    solve_ghs,
    solve_rank_penalized_limit,
    solve_uniform_penalized,
)
from wlra.linalg import frobenius_norm, hard_threshold, project_onto_complement, singular_values


def _random_instance(rng, m, n, k):
    a1 = rng.standard_normal((m, k))
    a2 = rng.standard_normal((m, n - k))
    return a1, a2


def _random_feasible_objective(rng, a1, a2, r, count):
    """Best objective among `count` random feasible candidates
    X2 = A1 C + B D (the oracle for constrained optimality)."""
    m, k = a1.shape
    n2 = a2.shape[1]
    q = r - k
    best = np.inf
    for _ in range(count):
        c = rng.standard_normal((k, n2))
        x2 = a1 @ c
        if q > 0:
            x2 = x2 + rng.standard_normal((m, q)) @ rng.standard_normal((q, n2))
        best = min(best, frobenius_norm(a2 - x2) ** 2)
    return best


# -------------------------------------------------------------- solve_ghs


def test_solve_ghs_known_answer():
    # A2 orthogonal to A1 with distinct singular values 3 > 2: keeping
    # one of them must keep the larger
    a1 = np.array([[1.0], [0.0], [0.0]])
    a2 = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 2.0]])
    sol = solve_ghs(a1, a2, 2)
    expected = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 0.0]])
    assert np.allclose(sol.x2, expected, atol=1e-12)
    assert sol.spectral_gap == pytest.approx(1.0)
    assert sol.unique


def test_solve_ghs_r_equals_n_keeps_a2():
    rng = np.random.default_rng(0)
    a1, a2 = _random_instance(rng, 8, 6, 2)
    sol = solve_ghs(a1, a2, 6)
    assert np.allclose(sol.x2, a2, atol=1e-10)
    assert sol.unique


def test_solve_ghs_preserves_first_block_exactly():
    rng = np.random.default_rng(1)
    a1, a2 = _random_instance(rng, 10, 8, 3)
    sol = solve_ghs(a1, a2, 5)
    assert np.array_equal(sol.x1, a1)


def test_solve_ghs_beats_random_feasible_candidates():
    rng = np.random.default_rng(2)
    a1, a2 = _random_instance(rng, 10, 8, 3)
    sol = solve_ghs(a1, a2, 5)
    obj = sol.objective(a2)
    assert obj <= _random_feasible_objective(rng, a1, a2, 5, 1000) + 1e-10


def test_solve_ghs_residual_matches_tail():
    rng = np.random.default_rng(3)
    a1, a2 = _random_instance(rng, 10, 8, 3)
    r = 5
    sol = solve_ghs(a1, a2, r)
    tail = float(np.sum(singular_values(project_onto_complement(a1, a2))[r - 3:] ** 2))
    assert abs(sol.objective(a2) - tail) <= 1e-8 * max(tail, 1.0)


def test_solve_ghs_rank_bound():
    rng = np.random.default_rng(4)
    a1, a2 = _random_instance(rng, 9, 7, 2)
    for r in (2, 4, 7):
        sol = solve_ghs(a1, a2, r)
        s = singular_values(sol.assemble())
        assert np.count_nonzero(s > 1e-10 * s[0]) <= r


def test_solve_ghs_non_unique_flagged():
    # projected block with a repeated singular value across the cut
    a1 = np.array([[1.0], [0.0], [0.0]])
    a2 = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
    sol = solve_ghs(a1, a2, 2)
    assert not sol.unique
    assert sol.spectral_gap == pytest.approx(0.0, abs=1e-12)


def test_solve_ghs_errors():
    rng = np.random.default_rng(5)
    a1, a2 = _random_instance(rng, 6, 5, 2)
    with pytest.raises(ValidationError, match="r >= k"):
        solve_ghs(a1, a2, 1)
    with pytest.raises(ValidationError, match="r <= min"):
        solve_ghs(a1, a2, 6)
    with pytest.raises(ValidationError, match="row counts"):
        solve_ghs(a1, rng.standard_normal((7, 3)), 3)
    with pytest.raises(ValidationError, match="rank deficient"):
        solve_ghs(np.ones((6, 2)), a2, 3)


# ------------------------------------------------- solve_uniform_penalized


def test_uniform_penalized_lambda_one_is_plain_truncation():
    rng = np.random.default_rng(6)
    a1, a2 = _random_instance(rng, 7, 6, 2)
    x1, x2 = solve_uniform_penalized(a1, a2, 1.0, 4)
    trunc = hard_threshold(np.hstack([a1, a2]), 4)
    assert np.allclose(np.hstack([x1, x2]), trunc, atol=1e-12)


def test_uniform_penalized_full_rank_is_identity():
    rng = np.random.default_rng(7)
    a1, a2 = _random_instance(rng, 6, 6, 2)
    for lam in (0.5, 1.0, 1e3):
        x1, x2 = solve_uniform_penalized(a1, a2, lam, 6)
        assert np.allclose(x1, a1, atol=1e-9)
        assert np.allclose(x2, a2, atol=1e-9)


def test_uniform_penalized_large_lambda_approaches_constrained():
    rng = np.random.default_rng(8)
    a1, a2 = _random_instance(rng, 12, 10, 3)
    x1, x2 = solve_uniform_penalized(a1, a2, 1e4, 5)
    sol = solve_ghs(a1, a2, 5)
    diff = np.hstack([x1 - sol.x1, x2 - sol.x2])
    assert frobenius_norm(diff) < 1e-2


def test_uniform_penalized_optimality_oracle():
    # objective lambda^2 ||A1-X1||^2 + ||A2-X2||^2 never beaten by random
    # rank-<=r candidates
    rng = np.random.default_rng(9)
    a1, a2 = _random_instance(rng, 8, 7, 2)
    lam, r = 3.0, 4
    x1, x2 = solve_uniform_penalized(a1, a2, lam, r)
    obj = lam**2 * frobenius_norm(a1 - x1) ** 2 + frobenius_norm(a2 - x2) ** 2
    m, n = 8, 7
    for _ in range(1000):
        cand = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
        c1, c2 = cand[:, :2], cand[:, 2:]
        cand_obj = lam**2 * frobenius_norm(a1 - c1) ** 2 + frobenius_norm(a2 - c2) ** 2
        assert cand_obj >= obj - 1e-9


def test_uniform_penalized_rate_is_bounded():
    # lambda * distance to the constrained solution stays bounded across
    # lambda in {1e2, 1e3, 1e4} when the projected block has a gap: it
    # never grows past its smallest-lambda value (in fact it decays,
    # the closed form converges at O(1/lambda^2))
    rng = np.random.default_rng(10)
    a1, a2 = _random_instance(rng, 12, 10, 3)
    sol = solve_ghs(a1, a2, 5)
    assert sol.unique
    a_g = sol.assemble()
    metrics = []
    for lam in (1e2, 1e3, 1e4):
        x1, x2 = solve_uniform_penalized(a1, a2, lam, 5)
        metrics.append(lam * frobenius_norm(np.hstack([x1, x2]) - a_g))
    assert max(metrics) < 10.0 * metrics[0]
    assert metrics[-1] <= metrics[0]  # superconvergent decay, not growth


def test_uniform_penalized_rejects_bad_lambda():
    rng = np.random.default_rng(11)
    a1, a2 = _random_instance(rng, 5, 4, 1)
    with pytest.raises(ValidationError, match="lambda"):
        solve_uniform_penalized(a1, a2, 0.0, 2)
    with pytest.raises(ValidationError, match="lambda"):
        solve_uniform_penalized(a1, a2, -1.0, 2)


# ---------------------------------------------------- select_rank_from_tau


def test_select_rank_examples():
    assert select_rank_from_tau([3.0, 2.0, 1.0], 5.0) == 1  # 4 <= 5 < 9
    assert select_rank_from_tau([3.0, 2.0, 1.0], 9.5) == 0  # tau >= sigma_1^2
    assert select_rank_from_tau([3.0, 2.0, 1.0], 0.5) == 3  # tau < sigma_s^2


def test_select_rank_boundary_tie_advisory():
    with pytest.warns(BoundaryTieWarning):
        r = select_rank_from_tau([3.0, 2.0, 1.0], 4.0)  # tau == sigma_2^2
    assert r == 1  # equality attaches to the smaller rank


def test_select_rank_is_brute_force_argmin():
    rng = np.random.default_rng(12)
    import warnings

    for _ in range(1000):
        s = np.sort(np.abs(rng.standard_normal(rng.integers(1, 10))))[::-1]
        tau = float(rng.uniform(0.0, 1.5) * (s[0] ** 2 + 0.1))
        if tau <= 0:
            continue
        sq = s * s
        if np.any(np.abs(sq - tau) <= 1e-9 * np.maximum(sq, tau)):
            continue  # skip boundary ties
        costs = [float(np.sum(sq[r:]) + tau * r) for r in range(len(s) + 1)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BoundaryTieWarning)
            got = select_rank_from_tau(s, tau)
        assert got == int(np.argmin(costs))


def test_select_rank_validation():
    with pytest.raises(ValidationError, match="non-increasing"):
        select_rank_from_tau([1.0, 2.0], 1.0)
    with pytest.raises(ValidationError, match="tau"):
        select_rank_from_tau([2.0, 1.0], 0.0)


# ---------------------------------------------- solve_rank_penalized_limit


def test_penalized_limit_huge_tau_is_pure_projection():
    rng = np.random.default_rng(13)
    a1, a2 = _random_instance(rng, 8, 6, 2)
    sigma = singular_values(project_onto_complement(a1, a2))
    pen = solve_rank_penalized_limit(a1, a2, (sigma[0] ** 2) * 2.0)
    assert pen.r_star == 0
    expected = a2 - project_onto_complement(a1, a2)
    assert np.allclose(pen.solution.x2, expected, atol=1e-10)


def test_penalized_limit_tiny_tau_keeps_everything():
    rng = np.random.default_rng(14)
    a1, a2 = _random_instance(rng, 8, 6, 2)
    sigma = singular_values(project_onto_complement(a1, a2))
    pen = solve_rank_penalized_limit(a1, a2, (sigma[-1] ** 2) * 0.5)
    assert np.allclose(pen.solution.x2, a2, atol=1e-10)


def test_penalized_limit_interval_sweep():
    # constant solution within each (sigma_{i+1}^2, sigma_i^2) interval,
    # and objective ||A2-X2||^2 + tau * r minimal over all ranks
    rng = np.random.default_rng(15)
    a1, a2 = _random_instance(rng, 9, 7, 2)
    perp = project_onto_complement(a1, a2)
    sigma = singular_values(perp)
    s = len(sigma)
    sq = np.concatenate([[sigma[0] ** 2 * 4.0], sigma**2, [0.0]])
    for i in range(len(sq) - 1):
        hi, lo = sq[i], sq[i + 1]
        if hi - lo <= 1e-12:
            continue
        taus = [lo + frac * (hi - lo) for frac in (0.25, 0.75)]
        sols = [solve_rank_penalized_limit(a1, a2, t) for t in taus]
        assert sols[0].r_star == sols[1].r_star
        assert np.allclose(sols[0].solution.x2, sols[1].solution.x2, atol=1e-10)
        for pen, tau in zip(sols, taus):
            got = pen.solution.objective(a2) + tau * pen.r_star
            best = min(
                float(np.sum(sigma[r:] ** 2)) + tau * r for r in range(s + 1)
            )
            assert got <= best + 1e-8 * max(best, 1.0)


def test_penalized_limit_invariant():
    rng = np.random.default_rng(16)
    a1, a2 = _random_instance(rng, 10, 8, 3)
    sigma = singular_values(project_onto_complement(a1, a2))
    tau = float(sigma[1] ** 2 * 1.01)
    pen = solve_rank_penalized_limit(a1, a2, tau)
    padded = np.concatenate([[np.inf], sigma, [0.0]])
    assert padded[pen.r_star + 1] ** 2 <= tau < padded[pen.r_star] ** 2
