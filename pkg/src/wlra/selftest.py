"""On-demand invariant suites for the `selftest` CLI command.

Each suite draws fresh random instances from the given seed and checks
an exact identity or optimality property of the solvers. The
environment variable WLRA_SELFTEST_FAULT=1 injects a deliberate error
into each suite's checked quantity; it exists only so the test suite
can verify that a broken build actually fails.
"""

from __future__ import annotations

import os

import numpy as np

from .linalg import (
    frobenius_norm,
    hard_threshold,
    project_onto_colspace,
    singular_values,
)
from .synth import rng_for
from .wlr import (
    StoppingCriteria,
    WlrProblem,
    WlrState,
    default_init,
    gradients,
    objective,
    solve,
)


def _fault() -> float:
    return 1e-3 if os.environ.get("WLRA_SELFTEST_FAULT") == "1" else 0.0


def _random_problem(rng, m=12, n=10, k=3, r=5, w_lo=1.0, w_hi=100.0) -> WlrProblem:
    a1 = rng.standard_normal((m, k))
    a2 = rng.standard_normal((m, n - k))
    w1 = w_lo + (w_hi - w_lo) * rng.random((m, k))
    return WlrProblem(a1=a1, a2=a2, w1=w1, r=r)


def descent_suite(trials: int, seed: int) -> tuple[bool, str]:
    """Per-sweep objective decrease equals the four-term split."""
    rng = rng_for(seed)
    worst = 0.0
    for t in range(trials):
        prob = _random_problem(rng)
        init = default_init(prob, seed=seed + t)
        report = solve(prob, init, StoppingCriteria(epsilon=1e-13, max_iter=40),
                       diagnostics=True)
        for dec in report.descent_traces:
            gap = abs(dec.total + _fault() - (dec.m_p - dec.m_p1))
            tol = 1e-8 * max(1.0, dec.m_p)
            worst = max(worst, gap / tol)
    return worst <= 1.0, f"worst identity residual {worst:.3g}x tolerance"


def eckart_young_suite(trials: int, seed: int) -> tuple[bool, str]:
    """Truncation is never beaten by random same-rank candidates and its
    residual matches the singular-value tail."""
    rng = rng_for(seed)
    worst = 0.0
    for _ in range(trials):
        m, n, r = 8, 6, 3
        a = rng.standard_normal((m, n))
        best = hard_threshold(a, r)
        resid = frobenius_norm(a - best) ** 2 + _fault()
        tail = float(np.sum(singular_values(a)[r:] ** 2))
        worst = max(worst, abs(resid - tail) / max(tail, 1e-30) / 1e-8)
        for _ in range(50):
            cand = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
            if frobenius_norm(a - cand) ** 2 < resid - 1e-12:
                return False, "a random rank-r candidate beat the truncation"
    return worst <= 1.0, f"worst tail-residual mismatch {worst:.3g}x tolerance"


def projection_suite(trials: int, seed: int) -> tuple[bool, str]:
    """Projection perturbation bound ||P_B - P_Bt||_F <= 2||B - Bt||_F / eta."""
    rng = rng_for(seed)
    for t in range(trials):
        m, k = 10, 3
        b = rng.standard_normal((m, k))
        scale = 10.0 ** rng.uniform(-6, -1)
        bt = b + scale * rng.standard_normal((m, k))
        eta = float(singular_values(bt)[-1])
        if eta <= 1e-10:
            continue
        eye = np.eye(m)
        lhs = frobenius_norm(project_onto_colspace(b, eye) -
                             project_onto_colspace(bt, eye)) + _fault()
        rhs = 2.0 * frobenius_norm(b - bt) / eta
        if lhs > rhs + 1e-12:
            return False, f"bound violated at trial {t}: {lhs:.3e} > {rhs:.3e}"
    return True, "bound held on all trials"


def gradient_suite(trials: int, seed: int) -> tuple[bool, str]:
    """Analytic block gradients match central finite differences."""
    rng = rng_for(seed)
    worst = 0.0
    for t in range(trials):
        prob = _random_problem(rng, m=5, n=5, k=2, r=3, w_lo=0.5, w_hi=3.0)
        st = WlrState(
            x1=rng.standard_normal((5, 2)),
            c=rng.standard_normal((2, 3)),
            b=rng.standard_normal((5, 1)),
            d=rng.standard_normal((1, 3)),
        )
        analytic = gradients(prob, st)
        blocks = ("x1", "c", "b", "d")
        h = 1e-6
        for name, grad in zip(blocks, analytic):
            arr = getattr(st, name)
            fd = np.zeros_like(arr)
            for idx in np.ndindex(arr.shape):
                orig = arr[idx]
                arr[idx] = orig + h
                f_plus = objective(prob, st)
                arr[idx] = orig - h
                f_minus = objective(prob, st)
                arr[idx] = orig
                fd[idx] = (f_plus - f_minus) / (2.0 * h)
            scale = max(float(np.linalg.norm(fd)), 1e-8)
            err = (float(np.linalg.norm(grad - fd)) + _fault()) / scale
            worst = max(worst, err / 1e-5)
    return worst <= 1.0, f"worst gradient mismatch {worst:.3g}x tolerance"


SUITES = {
    "descent": descent_suite,
    "eckart-young": eckart_young_suite,
    "projection": projection_suite,
    "gradient": gradient_suite,
}

DEFAULT_TRIALS = {
    "descent": 10,
    "eckart-young": 20,
    "projection": 200,
    "gradient": 5,
}


def run_selftest(suites, trials: int | None, seed: int, out=print) -> bool:
    """Run the named suites, print one pass/fail line each, return
    overall success."""
    ok = True
    for name in suites:
        fn = SUITES[name]
        n = trials if trials is not None else DEFAULT_TRIALS[name]
        passed, detail = fn(n, seed)
        out(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        ok = ok and passed
    return ok
