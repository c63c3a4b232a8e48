import csv
import io
import json
import os
import subprocess
import sys

import pytest

from oresme.cli import csv_cell, main
from oresme.dsl import shipped_corpus_path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def as_json(capsys, *argv):
    code, out, err = run(capsys, "--format", "json", *argv)
    return code, json.loads(out), err


# -- oracle examples --------------------------------------------------------------------

def test_table_initial_rows(capsys):
    code, doc, _ = as_json(capsys, "table", "--from", "0", "--to", "6")
    assert code == 0
    texts = [r["text"] for r in doc["records"]]
    assert texts == [
        "0",
        "x^(-1)",
        "x^(-1)",
        "x^(-1) - x^(-3)",
        "x^(-1) - 2*x^(-3)",
        "x^(-1) - 3*x^(-3) + x^(-5)",
        "x^(-1) - 4*x^(-3) + 3*x^(-5)",
    ]
    assert doc["records"][3]["poly"] == [[-1, "1/1"], [-3, "-1/1"]]


def test_eval_matrix_equals_recurrence(capsys):
    _, a, _ = as_json(capsys, "eval", "--n", "100", "--x", "3", "--mode", "matrix")
    _, b, _ = as_json(capsys, "eval", "--n", "100", "--x", "3", "--mode", "recurrence")
    assert a["records"][0]["digest"] == b["records"][0]["digest"]
    assert a["records"][0]["value"] == b["records"][0]["value"]


def test_verify_all_quick(capsys):
    code, doc, _ = as_json(capsys, "verify", "--all", "--profile", "quick")
    assert code == 0
    outcomes = {r["id"]: r["outcome"] for r in doc["records"]}
    for i in ("ODD_SUM_T", "G3_T", "BN_T", "BN1_T"):
        assert outcomes[i] == "fails (expected)"
    assert doc["unexpected"] == 0


def test_table_derivative_values(capsys):
    code, doc, _ = as_json(capsys, "table", "--from", "0", "--to", "4", "--derivative", "--x", "4")
    from fractions import Fraction
    values = [Fraction(r["value"]) for r in doc["records"]]
    assert values == [0, Fraction(-1, 16), Fraction(-1, 16), Fraction(-13, 256), Fraction(-10, 256)]


# -- exit-code matrix -----------------------------------------------------------------------

def test_exit_ok(capsys):
    assert run(capsys, "verify", "--id", "CASSINI")[0] == 0


def test_exit_unexpected_outcome(capsys, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("WRONG: O[n] == x*O[n] where n=1..3\n")
    code, out, _ = run(capsys, "dsl", "check", str(f))
    assert code == 1
    assert "UNEXPECTED" in out
    assert run(capsys, "roots", "--n", "24", "--tol", "1e-30")[0] == 1


@pytest.mark.parametrize("argv", [
    ["table", "--from", "0"],
    ["table", "--from", "0", "--to", "3", "--bogus"],
    ["eval", "--n", "3", "--x", "1/0"],
    ["eval", "--n", "3", "--x", "3", "--mode", "guess"],
    ["verify", "--id", "CASSINI", "--all"],
    ["--format", "xml", "table", "--from", "0", "--to", "1"],
    [],
])
def test_exit_usage_argparse(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and err


@pytest.mark.parametrize("argv", [
    ["verify", "--id", "NOPE"],
    ["table", "--from", "5", "--to", "1"],
    ["eval", "--n", "3", "--x", "0"],
    ["roots", "--n", "0"],
    ["limit", "--x", "abc"],
    ["dsl", "check", "/nonexistent/corpus.txt"],
    ["dsl", "check", str(shipped_corpus_path()), "--range", "n=0-5"],
])
def test_exit_usage_semantic(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == "" and err.startswith("oresme ")


def test_dsl_parse_error_exit(capsys, tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("A: O[n] == O[n] where n=0..2\nB: O[n == 1\n")
    code, out, err = run(capsys, "--format", "json", "dsl", "check", str(f))
    assert code == 2
    doc = json.loads(out)
    assert [r["id"] for r in doc["records"]] == ["A"]
    assert "line 2" in err


# -- determinism and formats ------------------------------------------------------------------

def test_json_deterministic_across_workers(capsys):
    outs = []
    for w in ("1", "2", "4"):
        code, out, _ = run(capsys, "--format", "json", "--workers", w, "verify", "--all")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]
    code, out, _ = run(capsys, "verify", "--all", "--format", "json", "--workers", "3")
    assert out == outs[0]


def test_options_after_subcommand(capsys):
    a = run(capsys, "--format", "csv", "table", "--from", "0", "--to", "3")
    b = run(capsys, "table", "--from", "0", "--to", "3", "--format", "csv")
    assert a == b


CSV_CASES = [
    ["table", "--from", "0", "--to", "8", "--x", "3/2"],
    ["table", "--from", "0", "--to", "5", "--derivative"],
    ["eval", "--n", "30", "--x=-7/3", "--mode", "closed"],
    ["eval", "--n", "12", "--x", "5/2", "--mode", "binet"],
    ["verify", "--all"],
    ["roots", "--n", "6"],
    ["limit", "--x", "3", "--steps", "15"],
    ["limit", "--x", "2.5", "--steps", "15"],
    ["dsl", "check", str(shipped_corpus_path()), "--range", "n=0..5"],
]


@pytest.mark.parametrize("argv", CSV_CASES)
def test_csv_matches_json(capsys, argv):
    _, doc, _ = as_json(capsys, *argv)
    _, out, _ = run(capsys, "--format", "csv", *argv)
    rows = list(csv.DictReader(io.StringIO(out)))
    records = doc["records"]
    assert len(rows) == len(records)
    for row, rec in zip(rows, records):
        assert list(row) == list(rec)
        for key, value in rec.items():
            assert row[key] == csv_cell(value)
            if not isinstance(value, str):
                assert json.loads(row[key]) == value


def test_pretty_default(capsys):
    code, out, _ = run(capsys, "table", "--from", "3", "--to", "3")
    assert out == "O_3(x) = x^(-1) - x^(-3)\n"


def test_limit_degenerate_flag(capsys):
    code, doc, _ = as_json(capsys, "limit", "--x", "2", "--steps", "60")
    assert doc["verdict"] == "degenerate" and doc["remark_discrepancy"] is True
    assert float(doc["observed_limit"]) == pytest.approx(0.5, abs=1e-12)
    assert len(doc["records"]) == 60


def test_bench_digests(capsys):
    code, doc, _ = as_json(capsys, "bench", "--n-list", "64,256", "--x", "3")
    assert code == 0 and doc["digests_agree"]
    recs = doc["records"]
    assert {r["strategy"] for r in recs} == {"recurrence", "matrix", "closed", "binet_float"}
    for n in (64, 256):
        exact = {r["digest"] for r in recs if r["n"] == n and r["strategy"] != "binet_float"}
        assert len(exact) == 1 and next(iter(exact)).startswith("sha256:")


def test_dsl_range_override(capsys):
    code, doc, _ = as_json(capsys, "dsl", "check", str(shipped_corpus_path()), "--range", "n=0..5")
    assert code == 0
    cassini = next(r for r in doc["records"] if r["id"] == "CASSINI")
    assert cassini["sweep"] == "n=0..5"


def test_module_entry_point():
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "oresme", "eval", "--n", "4", "--x", "3"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert proc.stdout.startswith("O_4(3/1) = 7/27")
    proc = subprocess.run([sys.executable, "-m", "oresme", "verify", "--id", "X"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 2 and proc.stdout == "" and "unknown identity" in proc.stderr
