import io
from contextlib import redirect_stderr, redirect_stdout

from mtlmon.cli import (
    EXIT_ALLOC,
    EXIT_IO,
    EXIT_MISMATCH,
    EXIT_OK,
    EXIT_PARSE,
    main,
)

FIG_ARGS = ["--npe", "8", "--nq", "8", "--nap", "4", "--qsz", "16"]


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def write_trace_file(path, width, rows):
    with open(path, "w") as fh:
        fh.write("time," + ",".join(f"ap{i}" for i in range(width)) + "\n")
        for t, row in enumerate(rows):
            fh.write(f"{t}," + ",".join(str(v) for v in row) + "\n")
    return str(path)


def test_compile_reports_latency_and_bit_counts(tmp_path):
    out_file = tmp_path / "fig.bit"
    code, out, _ = run_cli(
        "compile", "--formula", "F[0,1] !ap1 | F[1,4] ap2", *FIG_ARGS,
        "-o", str(out_file),
    )
    assert code == EXIT_OK
    assert "latency: 8" in out
    assert "pe bits: 200 (8 x 25)" in out
    assert out_file.exists()


def test_compile_constant_formula_writes_nothing(tmp_path):
    out_file = tmp_path / "const.bit"
    code, out, _ = run_cli("compile", "--formula", "true", *FIG_ARGS, "-o", str(out_file))
    assert code == EXIT_OK
    assert "constant formula: verdict always 1" in out
    assert not out_file.exists()


def test_compile_pe_exhaustion_exit_code(tmp_path):
    formula = "ap0"
    for _ in range(17):
        formula = "!(" + formula + ")"
    code, _, err = run_cli(
        "compile", "--formula", formula, "--npe", "16", "--nq", "32",
        "--nap", "4", "--qsz", "256", "-o", str(tmp_path / "x.bit"),
    )
    assert code == EXIT_ALLOC
    assert "PE exhaustion" in err


def test_parse_error_exit_code(tmp_path):
    code, _, err = run_cli(
        "compile", "--formula", "ap0 U[2,1] ap1", *FIG_ARGS, "-o", str(tmp_path / "x.bit")
    )
    assert code == EXIT_PARSE
    assert "interval" in err


def test_run_negation(tmp_path):
    prog = tmp_path / "neg.bit"
    run_cli("compile", "--formula", "!ap0", "--npe", "2", "--nq", "2",
            "--nap", "1", "--qsz", "4", "-o", str(prog))
    trace = write_trace_file(tmp_path / "t.csv", 1, [[1], [0], [0]])
    code, out, err = run_cli("run", "--prog", str(prog), "--trace", trace)
    assert code == EXIT_OK
    assert out.splitlines() == ["0,0", "1,1"]
    assert "latency: 2" in err


def test_run_until_worked_example(tmp_path):
    prog = tmp_path / "u.bit"
    run_cli("compile", "--formula", "ap0 U[1,2] ap1", "--npe", "4", "--nq", "4",
            "--nap", "2", "--qsz", "8", "-o", str(prog))
    trace = write_trace_file(
        tmp_path / "t.csv", 2, [[0, 0], [1, 0], [1, 0], [0, 1], [1, 1]]
    )
    code, out, _ = run_cli("run", "--prog", str(prog), "--trace", trace)
    assert code == EXIT_OK
    assert out.splitlines() == ["0,0", "1,1"]


def test_run_empty_trace(tmp_path):
    prog = tmp_path / "neg.bit"
    run_cli("compile", "--formula", "!ap0", "--npe", "2", "--nq", "2",
            "--nap", "1", "--qsz", "4", "-o", str(prog))
    trace = write_trace_file(tmp_path / "t.csv", 1, [])
    code, out, _ = run_cli("run", "--prog", str(prog), "--trace", trace)
    assert code == EXIT_OK
    assert out == ""


def test_run_missing_file(tmp_path):
    code, _, err = run_cli("run", "--prog", str(tmp_path / "no.bit"),
                           "--trace", str(tmp_path / "no.csv"))
    assert code == EXIT_IO


def test_run_width_mismatch(tmp_path):
    prog = tmp_path / "neg.bit"
    run_cli("compile", "--formula", "!ap0", "--npe", "2", "--nq", "2",
            "--nap", "1", "--qsz", "4", "-o", str(prog))
    trace = write_trace_file(tmp_path / "t.csv", 2, [[1, 0]])
    code, _, err = run_cli("run", "--prog", str(prog), "--trace", trace)
    assert code == EXIT_IO
    assert "width" in err


def test_check_agrees_on_the_running_example(tmp_path):
    import random
    rng = random.Random(3)
    trace = write_trace_file(
        tmp_path / "t.csv", 4,
        [[rng.randint(0, 1) for _ in range(4)] for _ in range(40)],
    )
    code, _, err = run_cli(
        "check", "--formula", "F[0,1] !ap1 | F[1,4] ap2", *FIG_ARGS, "--trace", trace
    )
    assert code == EXIT_OK
    assert "mismatches: 0" in err


def test_check_constant_formula(tmp_path):
    trace = write_trace_file(tmp_path / "t.csv", 4, [[0, 0, 0, 0]] * 5)
    code, _, err = run_cli("check", "--formula", "true | ap0", *FIG_ARGS, "--trace", trace)
    assert code == EXIT_OK
    assert "constant formula: verdict always 1" in err


def test_check_forced_head_fails(tmp_path):
    rows = []
    pattern = [1, 1, 0]
    for t in range(24):
        rows.append([0, pattern[t % 3], 0, 0])
    trace = write_trace_file(tmp_path / "t.csv", 4, rows)
    code, out, _ = run_cli(
        "check", "--formula", "F[0,1] !ap1 | F[1,4] ap2", *FIG_ARGS,
        "--trace", trace, "--force-head", "2=2",
    )
    assert code == EXIT_MISMATCH
    assert out.splitlines()[0].startswith("mismatch at time 0:")


def test_fuzz_is_deterministic():
    args = ("fuzz", "--seed", "1", "--count", "5", "--max-depth", "3", "--max-t2", "4")
    first = run_cli(*args)
    second = run_cli(*args)
    assert first == second
    assert first[0] == EXIT_OK
    assert "passes: 5" in first[1]
