import random

import pytest

from oresme.dsl import (
    MAX_DEPTH,
    CorpusError,
    ParseError,
    Pow,
    SeqRef,
    SumNode,
    check_ast,
    check_source,
    evaluate,
    format_identity,
    load_corpus,
    parse,
    parse_corpus,
    shipped_corpus_path,
)
from oresme.identities import CATALOG, FAILS, HOLDS, check_identity, EvaluationError
from oresme.sweep import Affine

CASSINI_SRC = "O[n+1]*O[n-1] - O[n]^2 == -x^(-2*n) where n=1..50"


# -- oracle examples ------------------------------------------------------------------

def test_parse_cassini():
    ast = parse(CASSINI_SRC)
    assert ast.free_variables == ("n",)
    assert ast.sweep.ranges == (("n", 1, 50),)
    rhs = ast.rhs
    pow_node = rhs.operand if hasattr(rhs, "operand") else rhs
    assert isinstance(pow_node, Pow) and pow_node.exponent == Affine.of(0, n=-2)


def test_parse_sum():
    ast = parse("Sum(j=0..n, O[j]) == x^2*(1/x - O[n+2]) where n=0..30")
    assert isinstance(ast.lhs, SumNode)
    assert ast.lhs.var == "j" and ast.lhs.upper == Affine.var("n")
    assert ast.lhs.body == SeqRef(False, Affine.var("j"))


def test_unclosed_bracket_position():
    with pytest.raises(ParseError) as exc:
        parse("O[n")
    assert (exc.value.line, exc.value.column) == (1, 4)
    assert "]" in exc.value.message


def test_check_cassini_holds():
    r = check_source(CASSINI_SRC)
    assert r.verdict == HOLDS and r.checked == 50


def test_check_g3_transcribed_fails():
    r = check_source("(n-1)*O[n] - 2*n*O[n+1] == x*O'[n+1] - (1/x)*O'[n-1] where n=1..10")
    assert r.verdict == FAILS
    assert {"n": 2} in [w.params for w in r.witnesses]


def test_trivial_identity():
    assert check_source("O[n] == O[n] where n=0..3").verdict == HOLDS


def test_shipped_corpus():
    entries = load_corpus()
    assert len(entries) == 19
    assert len({name for name, _ in entries}) == 19
    assert shipped_corpus_path().is_file()


def test_empty_corpus():
    assert parse_corpus("") == []
    assert parse_corpus("# only a comment\n\n") == []


def test_corpus_bad_line():
    text = "A: O[n] == O[n] where n=0..2\nB: O[n == 1 where n=0..1\nC: O[n]*x == x*O[n] where n=0..2\n"
    with pytest.raises(CorpusError) as exc:
        parse_corpus(text)
    err = exc.value
    assert [e.line for e in err.errors] == [2]
    assert [name for name, _ in err.entries] == ["A", "C"]
    assert "line 2" in str(err)


# -- scoping and semantics ----------------------------------------------------------------

@pytest.mark.parametrize("src", [
    "O[m] == O[m] where n=0..3",                 # free variable without a range
    "Sum(n=0..n, O[n]) == 0 where n=0..3",       # sum variable shadows
    "O[n*n] == 0 where n=0..3",                  # not affine
    "O[O[n]] == 0 where n=0..3",                 # nested sequence index
    "O[n] == O[n] where n=0..3, m>=n",           # constraint on undeclared name
    "O[n] == O[n] where n=0..3, n=0..4",         # duplicate range
    "O[n] = O[n] where n=0..3",                  # single equals
    "O''[n] == 0 where n=0..3",                  # second derivative
    "1/0 == 0",                                  # zero denominator literal
    "x == x where x=0..3",                       # reserved name
    "",
])
def test_rejected_sources(src):
    with pytest.raises(ParseError):
        parse(src)


def test_depth_limit():
    deep = "(" * (MAX_DEPTH + 5) + "x" + ")" * (MAX_DEPTH + 5) + " == x"
    with pytest.raises(ParseError):
        parse(deep)
    assert parse("(" * 50 + "x" + ")" * 50 + " == x")


def test_binomial_outside_range_is_zero():
    assert check_source("C(n, n+1) == 0 where n=0..5").verdict == HOLDS
    assert check_source("C(n, 2)*2 == n*(n-1) where n=0..8").verdict == HOLDS


def test_floor_division_in_bounds():
    src = "Sum(j=0..(n-1)//2, (-1)^j*C(n-j-1, j)*x^(-2*j-1)) == O[n] where n=1..25"
    assert check_source(src).verdict == HOLDS


def test_zero_division_during_evaluation():
    with pytest.raises(EvaluationError):
        check_source("x/O[n] == x where n=0..2")


def test_negative_indices_allowed():
    assert check_source("O[-n] == -x^(2*n)*O[n] where n=0..10").verdict == HOLDS


def test_multiline_error_positions():
    src = "O[n] ==\n  O[n] + where n=0..2"
    with pytest.raises(ParseError) as exc:
        parse(src)
    assert exc.value.line == 2 and exc.value.column == 10


def test_bytes_input():
    assert parse(CASSINI_SRC.encode()) == parse(CASSINI_SRC)
    with pytest.raises(ParseError):
        parse(b"O[n] == \xff")


# -- invariants -------------------------------------------------------------------------------

def test_round_trip_corpus():
    for name, ast in load_corpus():
        text = format_identity(ast)
        assert parse(text) == ast, name
        assert format_identity(parse(text)) == text


def test_corpus_matches_catalog():
    for name, ast in load_corpus():
        assert name in CATALOG
        dsl = check_ast(ast, name)
        cat = check_identity(name, ast.sweep)
        assert dsl.verdict == cat.verdict, name
        assert dsl.checked == cat.checked
        assert [w.params for w in dsl.witnesses] == [w.params for w in cat.witnesses]
        assert not dsl.unexpected


def test_dsl_parallel_matches_serial():
    ast = parse("Sum(j=1..n-1, O[j]*O[n-j]) == O'[n] + (n/x)*O[n] where n=1..40")
    a = check_ast(ast, workers=1)
    b = check_ast(ast, workers=3)
    assert a.to_json() == b.to_json() and a.verdict == HOLDS


def test_evaluate_env():
    ast = parse("O[n+1] == O[n] - x^(-2)*O[n-1] where n=0..0")
    assert evaluate(ast.lhs, {"n": 5}) == evaluate(ast.rhs, {"n": 5})


ALPHABET = ["O", "O'", "[", "]", "(", ")", "n", "m", "j", "x", "C", "Sum", "where", "==",
            "=", "..", ",", "+", "-", "*", "/", "^", "//", "1", "2", "0", "3/4", " ", "\n",
            ">=", "!=", "#", "é", "\x00", "9999999999", "n=0..3"]


def test_fuzz_parser_total():
    rng = random.Random(20261016)
    parsed = 0
    for i in range(10_000):
        if i % 4 == 0:
            data = bytes(rng.randrange(256) for _ in range(rng.randrange(40)))
            src = data
        else:
            src = "".join(rng.choice(ALPHABET) for _ in range(rng.randrange(1, 30)))
        try:
            parse(src)
            parsed += 1
        except ParseError as exc:
            assert exc.line >= 1 and exc.column >= 1
    assert parsed < 10_000
