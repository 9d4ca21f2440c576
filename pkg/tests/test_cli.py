import argparse
import os
from pathlib import Path

import numpy as np
import pytest

from wlra.cli import build_parser, main, parse_range
from wlra.errors import ValidationError
from wlra.ghs import solve_ghs
from wlra.linalg import project_onto_complement, singular_values
from wlra.matio import csv_text_to_matrix, read_matrix, write_matrix
from wlra.synth import SpectrumSpec, conditioned_spectrum, gen_conditioned

GOLDEN = Path(__file__).parent / "golden" / "help.txt"


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


# ------------------------------------------------------------ parse_range


def test_parse_range_forms():
    assert parse_range("5") == [5.0]
    assert parse_range("1:50:1000") == [1.0 + 50.0 * i for i in range(20)]
    assert parse_range("20:1:30", integer=True) == list(range(20, 31))
    assert parse_range("20:5:30", integer=True) == [20, 25, 30]


def test_parse_range_errors():
    for bad in ("", "a:b:c", "1:0:5", "5:1:4", "1:2"):
        with pytest.raises(ValidationError):
            parse_range(bad)


# ------------------------------------------------------------ golden help


def test_help_matches_golden():
    """--help output is the documented interface; regenerate with
    the collect loop below after an intentional flag change."""

    def collect_help(parser, prefix):
        chunks = [f"===== {prefix} =====", parser.format_help()]
        for action in parser._actions:
            if isinstance(action, argparse._SubParsersAction):
                for name, sub in action.choices.items():
                    chunks.extend(collect_help(sub, f"{prefix} {name}"))
        return chunks

    text = "\n".join(collect_help(build_parser(), "wlra")) + "\n"
    assert text == GOLDEN.read_text()


# -------------------------------------------------------------------- ghs


def test_ghs_identity_roundtrip(tmp_path, capsys):
    inp = tmp_path / "a.txt"
    out = tmp_path / "out.txt"
    write_matrix(inp, np.eye(3))
    code, stdout, _ = run(["ghs", "--input", str(inp), "--k", "1", "--r", "3",
                           "--output", str(out)], capsys)
    assert code == 0
    assert np.allclose(read_matrix(out), np.eye(3), atol=1e-12)
    assert "unique" in stdout


def test_ghs_r_below_k_exits_2_and_names_precondition(tmp_path, capsys):
    inp = tmp_path / "a.txt"
    out = tmp_path / "out.txt"
    write_matrix(inp, np.eye(3))
    code, _, stderr = run(["ghs", "--input", str(inp), "--k", "2", "--r", "1",
                           "--output", str(out)], capsys)
    assert code == 2
    assert "r >= k" in stderr
    assert stderr.count("\n") == 1  # single-line diagnostic
    assert not out.exists()  # no partial output


def test_ghs_summary_objective_matches_tail(tmp_path, capsys):
    sv = conditioned_spectrum(1.3736, total=30, distinct=20)
    a = gen_conditioned(SpectrumSpec(m=50, n=50, singular_values=sv, seed=0))
    k, r = 10, 20
    inp = tmp_path / "a.txt"
    out = tmp_path / "out.txt"
    write_matrix(inp, a)
    code, stdout, _ = run(["ghs", "--input", str(inp), "--k", str(k), "--r", str(r),
                           "--output", str(out)], capsys)
    assert code == 0
    reported = float(next(ln.split()[1] for ln in stdout.splitlines()
                          if ln.startswith("objective ")))
    perp = project_onto_complement(a[:, :k], a[:, k:])
    tail = float(np.sum(singular_values(perp)[r - k:] ** 2))
    assert abs(reported - tail) <= 1e-8 * max(1.0, tail)


def test_ghs_missing_input_exits_1(tmp_path, capsys):
    code, _, stderr = run(["ghs", "--input", str(tmp_path / "nope.txt"), "--k", "1",
                           "--r", "2", "--output", str(tmp_path / "o.txt")], capsys)
    assert code == 1


def test_ghs_numerical_failure_exits_3(tmp_path, capsys, monkeypatch):
    import wlra.cli as cli_mod
    from wlra.errors import NumericalError

    def boom(*a, **k):
        raise NumericalError("SVD did not converge")

    monkeypatch.setattr(cli_mod, "solve_ghs", boom)
    inp = tmp_path / "a.txt"
    write_matrix(inp, np.eye(3))
    code, _, stderr = run(["ghs", "--input", str(inp), "--k", "1", "--r", "2",
                           "--output", str(tmp_path / "o.txt")], capsys)
    assert code == 3


# ---------------------------------------------------------- ghs-penalized


def test_ghs_penalized(tmp_path, capsys):
    rng = np.random.default_rng(1)
    a = rng.standard_normal((10, 8))
    inp = tmp_path / "a.txt"
    out = tmp_path / "out.txt"
    write_matrix(inp, a)
    code, stdout, _ = run(["ghs-penalized", "--input", str(inp), "--k", "2",
                           "--tau", "0.5", "--output", str(out)], capsys)
    assert code == 0
    assert any(ln.startswith("r_star ") for ln in stdout.splitlines())
    assert read_matrix(out).shape == (10, 8)


# -------------------------------------------------------------------- wlr


def _write_wlr_inputs(tmp_path, m=14, n=12, k=3, seed=2):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n))
    w1 = 1.0 + 9.0 * rng.random((m, k))
    inp, wf = tmp_path / "a.txt", tmp_path / "w.txt"
    write_matrix(inp, a)
    write_matrix(wf, w1)
    return inp, wf


def test_wlr_echoes_parameters(tmp_path, capsys):
    inp, wf = _write_wlr_inputs(tmp_path)
    out = tmp_path / "x.txt"
    code, stdout, _ = run(["wlr", "--input", str(inp), "--weights", str(wf),
                           "--k", "3", "--r", "5", "--epsilon", "1e-16",
                           "--max-iter", "2500", "--output", str(out)], capsys)
    assert code == 0
    assert "epsilon 1e-16" in stdout
    assert "max_iter 2500" in stdout
    assert read_matrix(out).shape == (14, 12)


def test_wlr_missing_weight_file_exits_1(tmp_path, capsys):
    inp, _ = _write_wlr_inputs(tmp_path)
    code, _, _ = run(["wlr", "--input", str(inp), "--weights",
                      str(tmp_path / "missing.txt"), "--k", "3", "--r", "5",
                      "--output", str(tmp_path / "x.txt")], capsys)
    assert code == 1


def test_wlr_same_seed_byte_identical(tmp_path, capsys):
    inp, wf = _write_wlr_inputs(tmp_path)
    outs = []
    logs = []
    for name in ("x1.txt", "x2.txt"):
        out = tmp_path / name
        code, stdout, _ = run(["wlr", "--input", str(inp), "--weights", str(wf),
                               "--k", "3", "--r", "5", "--seed", "9",
                               "--max-iter", "200", "--output", str(out)], capsys)
        assert code == 0
        outs.append(out.read_bytes())
        logs.append(stdout.replace(name, "OUT"))
    assert outs[0] == outs[1]
    assert logs[0] == logs[1]


def test_wlr_diagnostics_trace_csv(tmp_path, capsys):
    inp, wf = _write_wlr_inputs(tmp_path)
    out = tmp_path / "x.txt"
    trace = tmp_path / "trace.csv"
    code, stdout, _ = run(["wlr", "--input", str(inp), "--weights", str(wf),
                           "--k", "3", "--r", "5", "--max-iter", "40",
                           "--diagnostics", "--trace-csv", str(trace),
                           "--output", str(out)], capsys)
    assert code == 0
    lines = trace.read_text().splitlines()
    assert lines[0] == "p,m_p,error_p,d1,d2,d3,d4,res_x1,res_c,res_b,res_d"
    assert len(lines) >= 2
    # m_p column is non-increasing
    objs = [float(ln.split(",")[1]) for ln in lines[1:]]
    assert all(b <= a + 1e-10 for a, b in zip(objs, objs[1:]))


def test_wlr_weight_shape_mismatch_exits_2(tmp_path, capsys):
    inp, wf = _write_wlr_inputs(tmp_path)
    code, _, stderr = run(["wlr", "--input", str(inp), "--weights", str(wf),
                           "--k", "2", "--r", "5",
                           "--output", str(tmp_path / "x.txt")], capsys)
    assert code == 2
    assert "weights" in stderr


# ---------------------------------------------------------------- em / als


def test_em_command(tmp_path, capsys):
    inp, wf = _write_wlr_inputs(tmp_path)
    out = tmp_path / "x.txt"
    code, stdout, _ = run(["em", "--input", str(inp), "--weights", str(wf),
                           "--r", "4", "--max-iter", "300", "--output", str(out)], capsys)
    assert code == 0
    x = read_matrix(out)
    s = singular_values(x)
    assert np.count_nonzero(s > 1e-10 * s[0]) <= 4


def test_als_command(tmp_path, capsys):
    inp, _ = _write_wlr_inputs(tmp_path)
    out = tmp_path / "x.txt"
    code, _, _ = run(["als", "--input", str(inp), "--r", "4",
                      "--output", str(out)], capsys)
    assert code == 0
    assert read_matrix(out).shape == (14, 12)


def test_uniform_svd_command(tmp_path, capsys):
    rng = np.random.default_rng(3)
    a = rng.standard_normal((10, 9))
    inp = tmp_path / "a.txt"
    out = tmp_path / "x.txt"
    write_matrix(inp, a)
    code, stdout, _ = run(["uniform-svd", "--input", str(inp), "--k", "2",
                           "--lambda", "1", "--r", "4", "--output", str(out)], capsys)
    assert code == 0
    from wlra.linalg import hard_threshold

    assert np.allclose(read_matrix(out), hard_threshold(a, 4), atol=1e-10)


# ------------------------------------------------------------------ bench


def test_bench_sweep_lambda_range_and_determinism(tmp_path, capsys):
    csvs = []
    for name in ("s1.csv", "s2.csv"):
        out = tmp_path / name
        code, stdout, _ = run(["bench", "sweep-lambda", "--m", "16", "--n", "14",
                               "--true-rank", "4", "--k", "2", "--r", "4",
                               "--lambdas", "100:400:900", "--trials", "1",
                               "--epsilon", "1e-7", "--max-iter", "300",
                               "--seed", "5", "--no-plot", "--output", str(out)], capsys)
        assert code == 0
        csvs.append(out.read_bytes())
    assert csvs[0] == csvs[1]
    lines = csvs[0].decode().splitlines()
    assert lines[0] == "sweep_parameter,solver_id,metric,iterations_used"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["100", "500", "900"]


def test_bench_sweep_lambda_bad_range_exits_2(tmp_path, capsys):
    code, _, stderr = run(["bench", "sweep-lambda", "--lambdas", "5:1:4",
                           "--output", str(tmp_path / "s.csv")], capsys)
    assert code == 2


def test_bench_compare_small(tmp_path, capsys):
    out = tmp_path / "cmp.csv"
    code, stdout, _ = run(["bench", "compare", "--m", "30", "--n", "30",
                           "--spectrum-rank", "12", "--spectrum-distinct", "8",
                           "--k", "4", "--r", "8:4:16", "--w-lo", "50", "--w-hi", "200",
                           "--epsilon", "1e-8", "--max-iter", "120",
                           "--em-max-iter", "80", "--output", str(out)], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "sweep_parameter,solver_id,metric_name,metric,iterations_used"
    rs = sorted({ln.split(",")[0] for ln in lines[1:]})
    assert rs == ["12", "16", "8"]  # string-sorted CSV rows
    png = tmp_path / "cmp.png"
    assert png.exists() and png.stat().st_size > 0


def test_bench_trace_uniform_plot(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    code, stdout, _ = run(["bench", "trace", "--m", "20", "--n", "18",
                           "--true-rank", "4", "--k", "2", "--r", "4",
                           "--w-lo", "30", "--w-hi", "30", "--epsilon", "1e-10",
                           "--max-iter", "150", "--output", str(out)], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "iteration,error,rel_error,rel_dist_to_closed_form"
    assert (tmp_path / "trace.png").exists()


def test_bench_timings_flag_adds_column(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(["bench", "sweep-lambda", "--m", "12", "--n", "10",
                      "--true-rank", "3", "--k", "2", "--r", "4",
                      "--lambdas", "50", "--trials", "1", "--max-iter", "60",
                      "--timings", "--no-plot", "--output", str(out)], capsys)
    assert code == 0
    assert out.read_text().splitlines()[0].endswith(",wall_time_seconds")


# --------------------------------------------------------------- selftest


def test_selftest_single_suite(capsys):
    code, stdout, _ = run(["selftest", "--suite", "descent", "--trials", "3"], capsys)
    assert code == 0
    assert stdout.startswith("PASS descent")


def test_selftest_fault_injection_fails(capsys, monkeypatch):
    monkeypatch.setenv("WLRA_SELFTEST_FAULT", "1")
    code, stdout, _ = run(["selftest", "--suite", "descent", "--trials", "2"], capsys)
    assert code != 0
    assert "FAIL" in stdout


# ---------------------------------------------------------------- convert


def test_convert_round_trip(tmp_path, capsys):
    rng = np.random.default_rng(4)
    a = rng.standard_normal((5, 7))
    mat = tmp_path / "a.txt"
    csv = tmp_path / "a.csv"
    back = tmp_path / "b.txt"
    write_matrix(mat, a)
    code, _, _ = run(["convert", "--input", str(mat), "--to", "csv",
                      "--output", str(csv)], capsys)
    assert code == 0
    assert np.array_equal(csv_text_to_matrix(csv.read_text()), a)
    code, _, _ = run(["convert", "--input", str(csv), "--to", "matrix",
                      "--output", str(back)], capsys)
    assert code == 0
    assert np.array_equal(read_matrix(back), a)


def test_selftest_default_all_suites(capsys):
    code, stdout, _ = run(["selftest", "--trials", "3"], capsys)
    assert code == 0
    lines = stdout.strip().splitlines()
    assert len(lines) == 4
    assert all(ln.startswith("PASS ") for ln in lines)


def test_bench_sweep_lambda_renders_figure(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(["bench", "sweep-lambda", "--m", "12", "--n", "10",
                      "--true-rank", "3", "--k", "2", "--r", "4",
                      "--lambdas", "50:100:150", "--trials", "1",
                      "--max-iter", "60", "--output", str(out)], capsys)
    assert code == 0
    png = tmp_path / "s.png"
    assert png.exists() and png.stat().st_size > 0
