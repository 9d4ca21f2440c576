"""Command-line front door.

Subcommands: ghs, ghs-penalized, wlr, em, als, uniform-svd,
bench {sweep-lambda, compare, trace}, selftest, convert.

Exit codes: 0 success, 1 I/O failure, 2 validation failure,
3 numerical failure (SVD non-convergence). Output files are written to
a temporary name and renamed on success, so no command leaves partial
output behind.

Numeric sweeps use the inclusive range syntax ``a:step:b``
(e.g. ``--lambdas 1:50:1000``); a bare number is a one-element list.
All randomness derives from the single ``--seed`` flag.
"""

from __future__ import annotations

import argparse
import functools
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .baselines import EmConfig, als_solve, em_solve
from .errors import MatrixFormatError, NumericalError, ValidationError
from .ghs import solve_ghs, solve_rank_penalized_limit, solve_uniform_penalized
from .matio import (
    atomic_write_text,
    csv_text,
    csv_text_to_matrix,
    matrix_to_csv_text,
    matrix_to_text,
    read_matrix,
    text_to_matrix,
)
from .selftest import SUITES, run_selftest
from .synth import (
    SpectrumSpec,
    SynthSpec,
    conditioned_spectrum,
    gen_conditioned,
    gen_low_rank_plus_noise,
    rng_for,
    weight_block,
)
from .wlr import StoppingCriteria, WlrProblem, assemble, default_init, solve

class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """Show defaults for optional flags only; fixed width so help output
    is stable across terminals (it is golden-tested)."""

    def _get_help_string(self, action):
        if action.required or action.default in (None, argparse.SUPPRESS):
            return action.help
        return super()._get_help_string(action)


_FORMATTER = functools.partial(_HelpFormatter, width=100)


def parse_range(text: str, integer: bool = False):
    """Inclusive ``a:step:b`` range, or a single number."""
    conv = int if integer else float
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [conv(parts[0])]
        if len(parts) != 3:
            raise ValueError
        a, step, b = (conv(p) for p in parts)
    except ValueError:
        raise ValidationError(
            f"bad range {text!r}: expected a number or a:step:b"
        ) from None
    if step <= 0:
        raise ValidationError(f"range step must be positive in {text!r}")
    if b < a:
        raise ValidationError(f"range end below start in {text!r}")
    out = []
    v = a
    eps = 1e-9 * max(abs(float(b)), 1.0)
    while float(v) <= float(b) + eps:
        out.append(conv(v))
        v = v + step
    return out


def _print_kv(key: str, value) -> None:
    if isinstance(value, float):
        value = repr(value)  # shortest round-trip form, e.g. 1e-16
    print(f"{key} {value}")


# ---------------------------------------------------------------- commands


def cmd_ghs(args) -> int:
    a = read_matrix(args.input)
    if not 0 < args.k <= a.shape[1]:
        raise ValidationError(f"k must be in [1, {a.shape[1]}], got {args.k}")
    a1, a2 = a[:, : args.k], a[:, args.k:]
    sol = solve_ghs(a1, a2, args.r)
    atomic_write_text(args.output, matrix_to_text(sol.assemble()))
    _print_kv("command", "ghs")
    _print_kv("k", args.k)
    _print_kv("r", args.r)
    _print_kv("objective", sol.objective(a2))
    _print_kv("spectral_gap", sol.spectral_gap)
    _print_kv("unique", "true" if sol.unique else "false")
    _print_kv("output", args.output)
    return 0


def cmd_ghs_penalized(args) -> int:
    a = read_matrix(args.input)
    if not 0 < args.k <= a.shape[1]:
        raise ValidationError(f"k must be in [1, {a.shape[1]}], got {args.k}")
    a1, a2 = a[:, : args.k], a[:, args.k:]
    pen = solve_rank_penalized_limit(a1, a2, args.tau)
    atomic_write_text(args.output, matrix_to_text(pen.solution.assemble()))
    _print_kv("command", "ghs-penalized")
    _print_kv("k", args.k)
    _print_kv("tau", pen.tau)
    _print_kv("r_star", pen.r_star)
    _print_kv("objective", pen.solution.objective(a2))
    _print_kv("spectral_gap", pen.solution.spectral_gap)
    _print_kv("unique", "true" if pen.solution.unique else "false")
    _print_kv("output", args.output)
    return 0


def _wlr_trace_csv(report) -> str:
    cols = ("p", "m_p", "error_p", "d1", "d2", "d3", "d4",
            "res_x1", "res_c", "res_b", "res_d")
    rows = []
    for i, err in enumerate(report.error_trace):
        dec = report.descent_traces[i]
        res = report.residual_traces[i]
        rows.append((i + 1, report.objective_trace[i + 1], err,
                     dec.d1, dec.d2, dec.d3, dec.d4, *res))
    return csv_text(cols, rows)


def cmd_wlr(args) -> int:
    a = read_matrix(args.input)
    w1 = read_matrix(args.weights)
    if not 0 <= args.k <= a.shape[1]:
        raise ValidationError(f"k must be in [0, {a.shape[1]}], got {args.k}")
    if w1.shape != (a.shape[0], args.k):
        raise ValidationError(
            f"weights must be {a.shape[0]}x{args.k} to match --k, got {w1.shape}"
        )
    a1, a2 = a[:, : args.k], a[:, args.k:]
    prob = WlrProblem(a1=a1, a2=a2, w1=w1, r=args.r)
    init = default_init(prob, seed=args.seed)
    stop = StoppingCriteria(epsilon=args.epsilon, max_iter=args.max_iter)
    report = solve(prob, init, stop, diagnostics=args.diagnostics)
    atomic_write_text(args.output, matrix_to_text(assemble(report.final_state)))
    _print_kv("command", "wlr")
    _print_kv("epsilon", args.epsilon)
    _print_kv("max_iter", args.max_iter)
    _print_kv("seed", args.seed)
    _print_kv("k", args.k)
    _print_kv("r", args.r)
    _print_kv("iterations", report.iterations)
    _print_kv("stop_reason", report.stop_reason.value)
    _print_kv("objective", report.objective_trace[-1])
    _print_kv("output", args.output)
    if args.diagnostics:
        trace_path = args.trace_csv or str(Path(args.output).with_suffix(".trace.csv"))
        atomic_write_text(trace_path, _wlr_trace_csv(report))
        _print_kv("trace_csv", trace_path)
    return 0


def cmd_em(args) -> int:
    a = read_matrix(args.input)
    w1 = read_matrix(args.weights)
    cfg = EmConfig(max_iter=args.max_iter, tol=args.tol,
                   weight_floor_eps=args.weight_floor_eps)
    x, trace = em_solve(a, w1, args.r, cfg, return_trace=True)
    atomic_write_text(args.output, matrix_to_text(x))
    _print_kv("command", "em")
    _print_kv("r", args.r)
    _print_kv("iterations", len(trace) - 1)
    _print_kv("weighted_objective", trace[-1])
    _print_kv("output", args.output)
    return 0


def cmd_als(args) -> int:
    a = read_matrix(args.input)
    x, trace = als_solve(a, args.r, max_iter=args.max_iter, tol=args.tol,
                         seed=args.seed, return_trace=True)
    atomic_write_text(args.output, matrix_to_text(x))
    _print_kv("command", "als")
    _print_kv("r", args.r)
    _print_kv("seed", args.seed)
    _print_kv("iterations", len(trace) - 1)
    _print_kv("objective", trace[-1])
    _print_kv("output", args.output)
    return 0


def cmd_uniform_svd(args) -> int:
    a = read_matrix(args.input)
    if not 0 < args.k <= a.shape[1]:
        raise ValidationError(f"k must be in [1, {a.shape[1]}], got {args.k}")
    a1, a2 = a[:, : args.k], a[:, args.k:]
    x1, x2 = solve_uniform_penalized(a1, a2, args.lam, args.r)
    atomic_write_text(args.output, matrix_to_text(np.hstack([x1, x2])))
    obj = args.lam ** 2 * float(np.linalg.norm(a1 - x1, "fro") ** 2)
    obj += float(np.linalg.norm(a2 - x2, "fro") ** 2)
    _print_kv("command", "uniform-svd")
    _print_kv("lambda", args.lam)
    _print_kv("k", args.k)
    _print_kv("r", args.r)
    _print_kv("objective", obj)
    _print_kv("output", args.output)
    return 0


def _emit_bench(result, args, plot_name: str) -> None:
    atomic_write_text(args.output, result.to_csv_text(include_timings=args.timings))
    _print_kv("csv", args.output)
    _print_kv("total_seconds", round(result.total_seconds(), 3))
    if not args.no_plot:
        from . import plotting  # deferred: matplotlib import is slow

        png = str(Path(args.output).with_suffix(".png"))
        getattr(plotting, plot_name)(result, png)
        _print_kv("figure", png)


def cmd_bench_sweep_lambda(args) -> int:
    lambdas = parse_range(args.lambdas)
    spec = SynthSpec(m=args.m, n=args.n, true_rank=args.true_rank,
                     noise_factor=args.noise, seed=args.seed)
    a = gen_low_rank_plus_noise(spec)
    a1, a2 = a[:, : args.k], a[:, args.k:]
    result = bench_mod.sweep_lambda(
        a1, a2, args.r, args.k, lambdas, trials=args.trials, mode=args.mode,
        seed=args.seed, epsilon=args.epsilon, max_iter=args.max_iter,
    )
    _emit_bench(result, args, "save_sweep_lambda_plot")
    return 0


def cmd_bench_compare(args) -> int:
    r_values = parse_range(args.r, integer=True)
    spectrum = conditioned_spectrum(args.kappa, total=args.spectrum_rank,
                                    distinct=args.spectrum_distinct)
    spec = SpectrumSpec(m=args.m, n=args.n, singular_values=spectrum, seed=args.seed)
    a = gen_conditioned(spec)
    cfg = EmConfig(max_iter=args.em_max_iter, tol=args.em_tol)
    result = bench_mod.compare_solvers(
        a, args.k, r_values, (args.w_lo, args.w_hi), seed=args.seed,
        epsilon=args.epsilon, max_iter=args.max_iter, em_cfg=cfg,
    )
    _emit_bench(result, args, "save_compare_plot")
    return 0


def cmd_bench_trace(args) -> int:
    spec = SynthSpec(m=args.m, n=args.n, true_rank=args.true_rank,
                     noise_factor=args.noise, seed=args.seed)
    a = gen_low_rank_plus_noise(spec)
    a1, a2 = a[:, : args.k], a[:, args.k:]
    if args.w_hi < args.w_lo:
        raise ValidationError(f"--w-hi must be >= --w-lo, got {args.w_hi} < {args.w_lo}")
    if args.w_lo <= 0:
        raise ValidationError(f"--w-lo must be positive, got {args.w_lo}")
    if args.w_hi == args.w_lo:
        w1 = np.full((args.m, args.k), args.w_lo)
    else:
        w1 = weight_block(args.m, args.k, args.w_lo, args.w_hi,
                          rng_for(args.seed + bench_mod.SEED_WEIGHTS))
    prob = WlrProblem(a1=a1, a2=a2, w1=w1, r=args.r)
    init = default_init(prob, seed=args.seed + bench_mod.SEED_INIT)
    stop = StoppingCriteria(epsilon=args.epsilon, max_iter=args.max_iter)
    result = bench_mod.convergence_trace(prob, init, stop)
    _emit_bench(result, args, "save_trace_plot")
    return 0


def cmd_selftest(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = run_selftest(names, args.trials, args.seed)
    return 0 if ok else 3


def cmd_convert(args) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    if args.to == "csv":
        a = text_to_matrix(text, source=args.input)
        atomic_write_text(args.output, matrix_to_csv_text(a))
    else:
        a = csv_text_to_matrix(text, source=args.input)
        atomic_write_text(args.output, matrix_to_text(a))
    _print_kv("command", "convert")
    _print_kv("rows", a.shape[0])
    _print_kv("cols", a.shape[1])
    _print_kv("output", args.output)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wlra",
        description="Weighted and constrained low-rank matrix approximation toolkit.",
        formatter_class=_FORMATTER,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, formatter_class=_FORMATTER)
        p.set_defaults(func=func)
        return p

    p = add("ghs", cmd_ghs, "solve the column-preserving constrained problem in closed form")
    p.add_argument("--input", required=True, help="matrix file (text format)")
    p.add_argument("--k", type=int, required=True, help="number of preserved leading columns")
    p.add_argument("--r", type=int, required=True, help="target rank (r >= k)")
    p.add_argument("--output", required=True, help="solution matrix file")

    p = add("ghs-penalized", cmd_ghs_penalized,
            "rank-penalized limit solution with threshold tau")
    p.add_argument("--input", required=True, help="matrix file (text format)")
    p.add_argument("--k", type=int, required=True, help="number of preserved leading columns")
    p.add_argument("--tau", type=float, required=True, help="rank penalty threshold (> 0)")
    p.add_argument("--output", required=True, help="solution matrix file")

    p = add("wlr", cmd_wlr, "alternating solver for the block-weighted problem")
    p.add_argument("--input", required=True, help="matrix file (text format)")
    p.add_argument("--weights", required=True, help="weight matrix file for the first k columns")
    p.add_argument("--k", type=int, required=True, help="number of weighted leading columns")
    p.add_argument("--r", type=int, required=True, help="target rank (k <= r <= min(m, n))")
    p.add_argument("--epsilon", type=float, default=1e-10, help="stopping threshold")
    p.add_argument("--max-iter", type=int, default=2500, help="maximum sweeps")
    p.add_argument("--seed", type=int, default=0, help="seed for the random initialization")
    p.add_argument("--diagnostics", action="store_true",
                   help="record per-iteration descent split and gradient norms")
    p.add_argument("--trace-csv", default=None,
                   help="iteration-trace CSV path (default: OUTPUT with .trace.csv)")
    p.add_argument("--output", required=True, help="solution matrix file")

    p = add("em", cmd_em, "EM-style imputation baseline")
    p.add_argument("--input", required=True, help="matrix file (text format)")
    p.add_argument("--weights", required=True, help="weight matrix file for the leading columns")
    p.add_argument("--r", type=int, required=True, help="target rank")
    p.add_argument("--max-iter", type=int, default=5000, help="maximum iterations")
    p.add_argument("--tol", type=float, default=1e-10, help="stopping threshold")
    p.add_argument("--weight-floor-eps", type=float, default=1e-3,
                   help="rescaled-weight floor below which X starts at zero")
    p.add_argument("--output", required=True, help="solution matrix file")

    p = add("als", cmd_als, "plain alternating least squares baseline")
    p.add_argument("--input", required=True, help="matrix file (text format)")
    p.add_argument("--r", type=int, required=True, help="target rank")
    p.add_argument("--max-iter", type=int, default=1000, help="maximum iterations")
    p.add_argument("--tol", type=float, default=1e-10, help="stopping threshold")
    p.add_argument("--seed", type=int, default=0, help="seed for the random initialization")
    p.add_argument("--output", required=True, help="solution matrix file")

    p = add("uniform-svd", cmd_uniform_svd,
            "closed form for the uniformly weighted penalized problem")
    p.add_argument("--input", required=True, help="matrix file (text format)")
    p.add_argument("--k", type=int, required=True, help="number of weighted leading columns")
    p.add_argument("--lambda", dest="lam", type=float, required=True,
                   help="uniform weight on the first block (> 0)")
    p.add_argument("--r", type=int, required=True, help="target rank")
    p.add_argument("--output", required=True, help="solution matrix file")

    b = sub.add_parser("bench", help="benchmark experiments (CSV + figure)",
                       formatter_class=_FORMATTER)
    bsub = b.add_subparsers(dest="bench_command", required=True, metavar="EXPERIMENT")

    def add_bench(name, func, help_):
        p = bsub.add_parser(name, help=help_, formatter_class=_FORMATTER)
        p.set_defaults(func=func)
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--output", required=True, help="CSV output path")
        p.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
        p.add_argument("--timings", action="store_true",
                       help="include wall_time_seconds in the CSV (non-deterministic)")
        return p

    p = add_bench("sweep-lambda", cmd_bench_sweep_lambda,
                  "weight sweep toward the constrained closed form")
    p.add_argument("--m", type=int, default=50, help="rows of the synthetic matrix")
    p.add_argument("--n", type=int, default=50, help="columns of the synthetic matrix")
    p.add_argument("--true-rank", type=int, default=5, help="rank of the noiseless part")
    p.add_argument("--noise", type=float, default=0.2, help="noise factor")
    p.add_argument("--k", type=int, default=3, help="weighted leading columns")
    p.add_argument("--r", type=int, default=5, help="target rank")
    p.add_argument("--lambdas", default="1:50:1000",
                   help="weight levels, inclusive range a:step:b or one number")
    p.add_argument("--trials", type=int, default=10, help="trials averaged per level")
    p.add_argument("--mode", choices=("uniform", "interval"), default="uniform",
                   help="uniform weight or entries drawn in [lambda, lambda+20]")
    p.add_argument("--epsilon", type=float, default=1e-7, help="solver stopping threshold")
    p.add_argument("--max-iter", type=int, default=2500, help="solver iteration cap")

    p = add_bench("compare", cmd_bench_compare,
                  "solver comparison on a conditioned spectrum")
    p.add_argument("--m", type=int, default=50, help="rows of the synthetic matrix")
    p.add_argument("--n", type=int, default=50, help="columns of the synthetic matrix")
    p.add_argument("--kappa", type=float, default=1.3736,
                   help="condition number of the nonzero spectrum")
    p.add_argument("--spectrum-rank", type=int, default=30, help="nonzero singular values")
    p.add_argument("--spectrum-distinct", type=int, default=20,
                   help="strictly decreasing leading singular values")
    p.add_argument("--k", type=int, default=10, help="weighted leading columns")
    p.add_argument("--r", default="20:1:30", help="target ranks, inclusive range a:step:b")
    p.add_argument("--w-lo", type=float, default=50.0, help="weight interval lower bound")
    p.add_argument("--w-hi", type=float, default=1000.0, help="weight interval upper bound")
    p.add_argument("--epsilon", type=float, default=1e-16, help="solver stopping threshold")
    p.add_argument("--max-iter", type=int, default=2500, help="solver iteration cap")
    p.add_argument("--em-max-iter", type=int, default=5000, help="EM iteration cap")
    p.add_argument("--em-tol", type=float, default=1e-10, help="EM stopping threshold")

    p = add_bench("trace", cmd_bench_trace, "per-iteration convergence trace")
    p.add_argument("--m", type=int, default=50, help="rows of the synthetic matrix")
    p.add_argument("--n", type=int, default=50, help="columns of the synthetic matrix")
    p.add_argument("--true-rank", type=int, default=5, help="rank of the noiseless part")
    p.add_argument("--noise", type=float, default=0.2, help="noise factor")
    p.add_argument("--k", type=int, default=3, help="weighted leading columns")
    p.add_argument("--r", type=int, default=5, help="target rank")
    p.add_argument("--w-lo", type=float, default=50.0,
                   help="weight lower bound (equal bounds give a uniform weight)")
    p.add_argument("--w-hi", type=float, default=50.0, help="weight upper bound")
    p.add_argument("--epsilon", type=float, default=2.220446049250313e-16,
                   help="stopping threshold")
    p.add_argument("--max-iter", type=int, default=2500, help="iteration cap")

    p = add("selftest", cmd_selftest, "run the numerical invariant suites")
    p.add_argument("--suite", choices=("all",) + tuple(SUITES), default="all",
                   help="which suite to run")
    p.add_argument("--trials", type=int, default=None,
                   help="trials per suite (default: per-suite built-in)")
    p.add_argument("--seed", type=int, default=0, help="master seed")

    p = add("convert", cmd_convert, "convert between matrix text and comma-separated form")
    p.add_argument("--input", required=True, help="input file")
    p.add_argument("--to", choices=("csv", "matrix"), required=True,
                   help="target representation")
    p.add_argument("--output", required=True, help="output file")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, MatrixFormatError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
