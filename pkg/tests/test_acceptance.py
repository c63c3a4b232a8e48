"""Acceptance criteria, one test per criterion.

Each test prints a single ``ACn ... PASS|FAIL`` line; the lines are also
repeated in the pytest terminal summary. Run directly with
``python tests/test_acceptance.py`` to get just the lines.
"""
import json
import math
import random
import subprocess
import sys
import time
from fractions import Fraction

from oresme.algebra import LaurentPoly, poly_eval_exact
from oresme.analytic import (
    binet_float,
    hyperbolic_eval,
    lambda_roots,
    product_reconstruct,
    ratio_limit_probe,
)
from oresme.cli import main as cli_main
from oresme.dsl import ParseError, check_ast, format_identity, load_corpus, parse
from oresme.identities import check_identity
from oresme.sequences import (
    eval_recurrence,
    fibonacci,
    oresme_by_matrix,
    oresme_derivative_poly,
    oresme_eval,
    oresme_poly,
    oresme_poly_closed,
)

RESULTS: list[str] = []


def report(tag: str, title: str, ok: bool, detail: str = "") -> None:
    line = f"{tag} {title}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
    RESULTS.append(line)
    print(line)
    assert ok, line


def cli(*argv):
    proc = subprocess.run([sys.executable, "-m", "oresme", *argv], capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


def L(*pairs):
    return LaurentPoly(dict(pairs))


def test_ac01_symbolic_tables():
    initial = [L(), L((-1, 1)), L((-1, 1)), L((-1, 1), (-3, -1)), L((-1, 1), (-3, -2)),
               L((-1, 1), (-3, -3), (-5, 1)), L((-1, 1), (-3, -4), (-5, 3))]
    derivs = [L((-2, -1)), L((-2, -1)), L((-2, -1), (-4, 3)), L((-2, -1), (-4, 6)),
              L((-2, -1), (-4, 9), (-6, -5)), L((-2, -1), (-4, 12), (-6, -15))]
    t0 = time.perf_counter()
    code1, out1, _ = cli("--format", "json", "table", "--from", "0", "--to", "6")
    code2, out2, _ = cli("--format", "json", "table", "--from", "1", "--to", "6", "--derivative")
    wall = time.perf_counter() - t0
    got = [LaurentPoly.from_json(r["poly"]) for r in json.loads(out1)["records"]]
    got_d = [LaurentPoly.from_json(r["poly"]) for r in json.loads(out2)["records"]]
    ok = code1 == code2 == 0 and got == initial and got_d == derivs and wall / 2 < 1.0
    report("AC1", "symbolic tables O_0..O_6 and O_1'..O_6'", ok, f"{wall / 2:.3f} s per table")


def test_ac02_numeric_derivatives():
    want3 = [0, Fraction(-1, 9), Fraction(-1, 9), Fraction(-6, 81), Fraction(-3, 81)]
    want4 = [0, Fraction(-1, 16), Fraction(-1, 16), Fraction(-13, 256), Fraction(-10, 256)]
    got3 = [poly_eval_exact(oresme_derivative_poly(n), 3) for n in range(5)]
    got4 = [poly_eval_exact(oresme_derivative_poly(n), 4) for n in range(5)]
    code, out, _ = cli("--format", "json", "table", "--from", "0", "--to", "4", "--derivative", "--x", "4")
    cli4 = [Fraction(r["value"]) for r in json.loads(out)["records"]]
    report("AC2", "O_n'(3), O_n'(4) for n=0..4", got3 == want3 and got4 == want4 and cli4 == want4)


def test_ac03_fibonacci_links():
    fib = all(3**n * oresme_eval(n, 3) == fibonacci(2 * n) for n in range(61))
    classical = all(oresme_eval(n, 2) == Fraction(n, 2**n) for n in range(61))
    report("AC3", "3^n O_n(3) = F_2n and O_n(2) = n/2^n, n<=60", fib and classical)


def test_ac04_three_way_agreement():
    t0 = time.perf_counter()
    bad = [n for n in range(1, 201)
           if not (oresme_poly(n) == oresme_poly_closed(n) == oresme_by_matrix(n))]
    wall = time.perf_counter() - t0
    report("AC4", "recurrence = closed form = matrix power, n=1..200",
           not bad and wall < 10.0, f"{wall:.2f} s" + (f", mismatches {bad[:5]}" if bad else ""))


def test_ac05_full_catalog():
    t0 = time.perf_counter()
    code, out, err = cli("--format", "json", "verify", "--all", "--profile", "full")
    wall = time.perf_counter() - t0
    doc = json.loads(out)
    by_id = {r["id"]: r for r in doc["records"]}
    holds = ["CASSINI", "THREE_TERM", "ADD", "GB1", "COR", "SUM", "ALT_SUM", "ODD_SUM_C", "G1",
             "N2", "G2", "G3_C", "REMARK_COMBINED", "BN_C", "BN1_C", "MAT_ENTRY", "DET"]
    fails = {"ODD_SUM_T": 0, "G3_T": 2, "BN_T": 1, "BN1_T": 1}
    ok = code == 0 and wall < 60.0
    ok &= all(by_id[i]["verdict"] == "holds" and by_id[i]["checked"] > 0 for i in holds)
    for i, n in fails.items():
        ok &= by_id[i]["verdict"] == "fails" and not by_id[i]["unexpected"]
        ok &= {"n": n} in [w["params"] for w in by_id[i]["witnesses"]]
    report("AC5", "full-profile catalog verdicts, exit code 0", ok,
           f"exit {code}, {wall:.1f} s, {len(by_id)} entries")


def test_ac06_product_formula():
    reps = [product_reconstruct(n, 1e-8) for n in range(1, 25)]
    worst = max(r.max_error for r in reps)
    n4 = reps[3]
    ok = all(r.passed for r in reps) and n4.exact == [1, 0, -2, 0] \
        and max(abs(a - b) for a, b in zip(n4.coefficients, [1, 0, -2, 0])) < 1e-12
    report("AC6", "cosine-root product matches x^n O_n, n<=24", ok, f"max error {worst:.2e}")


def test_ac07_ratio_limit():
    lam = (3 + math.sqrt(5)) / 6
    t3 = ratio_limit_probe(3, 60)
    tail_ok = all(abs(r - lam) < 1e-12 and e < 1e-12 for n, r, e in t3.steps if n >= 40)
    rp = lambda_roots(3.0)
    q = rp.lambda2 / rp.lambda1
    errs = t3.errors()
    c = errs[10] / q**10
    envelope = all(errs[n] <= 2 * c * q**n for n in range(10, 51))
    t2 = ratio_limit_probe(2, 60)
    deg = t2.verdict == "degenerate" and abs(t2.observed_limit - 0.5) < 1e-9 and t2.remark_discrepancy
    osc = ratio_limit_probe(1, 200).verdict == "oscillating"
    ok = t3.verdict == "converged" and tail_ok and envelope and deg and osc
    report("AC7", "ratio limit at x=3, envelope, x=2 degenerate (0.5 flagged), x=1 oscillating",
           ok, f"observed limit at x=2: {t2.observed_limit:.12g}")


def test_ac08_binet_hyperbolic():
    worst = 0.0
    for x in (Fraction(5, 2), Fraction(3), Fraction(4), Fraction(10)):
        for n in range(1, 61):
            exact = float(eval_recurrence(n, x))
            for approx in (binet_float(n, float(x)), hyperbolic_eval(n, float(x))):
                worst = max(worst, abs(approx - exact) / abs(exact))
    report("AC8", "Binet and hyperbolic forms within 1e-9 relative, n<=60", worst < 1e-9,
           f"worst relative error {worst:.2e}")


def test_ac09_dsl():
    entries = load_corpus()
    count_ok = len(entries) == 19
    round_trip = all(parse(format_identity(ast)) == ast for _, ast in entries)
    agree = True
    for name, ast in entries:
        d = check_ast(ast, name)
        c = check_identity(name, ast.sweep)
        agree &= d.verdict == c.verdict and d.checked == c.checked and not d.unexpected
    rng = random.Random(9)
    alphabet = ["O", "O'", "[", "]", "(", ")", "n", "x", "C", "Sum", "where", "==", "=", "..",
                ",", "+", "-", "*", "/", "^", "//", "1", "0", "2/3", " ", "\n", ">=", "\x00"]
    survived = True
    for i in range(10_000):
        src = (bytes(rng.randrange(256) for _ in range(rng.randrange(30))) if i % 3 == 0
               else "".join(rng.choice(alphabet) for _ in range(rng.randrange(1, 25))))
        try:
            parse(src)
        except ParseError:
            pass
        except Exception:  # noqa: BLE001 - any other exception is a failure
            survived = False
    report("AC9", "DSL corpus parses (19), round-trips, agrees with catalog; fuzz 10^4",
           count_ok and round_trip and agree and survived,
           f"{len(entries)} identities")


def test_ac10_bench(capsys):
    code = cli_main(["--format", "json", "bench", "--modes", "recurrence,matrix,closed,binet_float",
                     "--n-list", "1024,4096,16384", "--x", "3"])
    doc = json.loads(capsys.readouterr().out)
    recs = doc["records"]
    ok = code == 0 and doc["digests_agree"] and len(recs) == 12
    for n in (1024, 4096, 16384):
        exact = {r["digest"] for r in recs if r["n"] == n and r["strategy"] != "binet_float"}
        ok &= len(exact) == 1
    timings = ", ".join(f"{r['strategy']}@{r['n']}={float(r['wall_seconds']):.4f}s"
                        for r in recs if r["n"] == 16384)
    report("AC10", "bench exact digests identical for n=2^10,2^12,2^14 at x=3", ok, timings)


if __name__ == "__main__":
    import pytest

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
