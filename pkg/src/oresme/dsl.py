"""A small text language for Oresme identities.

Example::

    O[n+1]*O[n-1] - O[n]^2 == -x^(-2*n) where n=1..50

Grammar (precedence ``^`` > unary ``-`` > ``* /`` > ``+ -``)::

    identity   := expr "==" expr ["where" item ("," item)*]
    item       := NAME "=" ["-"] INT ".." ["-"] INT | index CMP index
    expr       := term (("+" | "-") term)*
    term       := unary (("*" | "/") unary)*
    unary      := "-" unary | power
    power      := atom ["^" exponent]
    exponent   := "-" exponent | INT | NAME | "(" index ")"
    atom       := INT | INT "/" INT (no spaces) | "x" | NAME
                | ("O" | "O'") "[" index "]" | "C(" index "," index ")"
                | "Sum(" NAME "=" index ".." index "," expr ")" | "(" expr ")"
    index      := affine ["//" INT]

Index expressions are affine in the integer variables; ``//`` is floor
division and may only appear at the top of an index.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from math import comb
from pathlib import Path
from typing import Union

from .algebra import LaurentPoly, RationalFunction
from .identities import (
    CATALOG,
    FAILS,
    HOLDS,
    WITNESS_CAP,
    EvaluationError,
    IdentityReport,
    Witness,
    _resolve_workers,
    run_scan,
    values_equal,
)
from .sequences import oresme, oresme_derivative_poly
from .sweep import Affine, Constraint, InvalidSweep, Sweep

MAX_DEPTH = 200
MAX_POWER = 100_000
RESERVED = {"x", "O", "C", "Sum", "where"}
CORPUS_RESOURCE = "identities.txt"


class ParseError(Exception):
    """Syntax or scoping error at a 1-based line/column."""

    def __init__(self, message: str, line: int, column: int, token: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.token = token
        super().__init__(f"line {line}, column {column}: {message}"
                         + (f" (at {token!r})" if token else ""))


# -- AST ------------------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: Fraction


@dataclass(frozen=True)
class VarX:
    pass


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class SeqRef:
    derivative: bool
    index: Affine


@dataclass(frozen=True)
class Binom:
    top: Affine
    bottom: Affine


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: Affine


@dataclass(frozen=True)
class SumNode:
    var: str
    lower: Affine
    upper: Affine
    body: "Expr"


Expr = Union[Lit, VarX, Param, SeqRef, Binom, Neg, BinOp, Pow, SumNode]


@dataclass(frozen=True)
class IdentityAst:
    lhs: Expr
    rhs: Expr
    sweep: Sweep

    @property
    def free_variables(self) -> tuple[str, ...]:
        return self.sweep.names


# -- lexer ----------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<rational>\d+/\d+)
  | (?P<int>\d+)
  | (?P<seqd>O')
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|>=|<=|!=|\.\.|//|[-+*/^()\[\],=<>])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError("unexpected character", line, col, source[pos])
        kind = m.lastgroup
        text = m.group()
        if kind == "ws":
            for i, ch in enumerate(text):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        else:
            tokens.append(Token(kind, text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# -- parser -----------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0
        self.bound: list[str] = []
        # names used outside any Sum binding: (name, token) checked against `where`
        self.free_refs: list[tuple[str, Token]] = []
        self.sum_vars: list[tuple[str, Token]] = []

    # helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column, tok.text)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "name", "seqd") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
            raise self.error(f'expected "{text}", found {found}')
        tok = self.tok
        self.pos += 1
        return tok

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.error("expression nested too deeply")

    def leave(self):
        self.depth -= 1

    def int_value(self, tok: Token) -> int:
        try:
            return int(tok.text)
        except ValueError:
            raise self.error("integer literal too large", tok) from None

    def use_name(self, tok: Token):
        name = tok.text
        if name in RESERVED:
            raise self.error(f"{name!r} is reserved", tok)
        if name not in self.bound:
            self.free_refs.append((name, tok))

    # grammar
    def identity(self) -> IdentityAst:
        lhs = self.expr()
        self.expect("==")
        rhs = self.expr()
        ranges: list[tuple[str, int, int]] = []
        constraints: list[Constraint] = []
        range_toks: dict[str, Token] = {}
        if self.at("where"):
            self.pos += 1
            self.where_item(ranges, constraints, range_toks)
            while self.at(","):
                self.pos += 1
                self.where_item(ranges, constraints, range_toks)
        if self.tok.kind != "eof":
            raise self.error("unexpected trailing input")
        declared = {r[0] for r in ranges}
        for name, tok in self.free_refs:
            if name not in declared:
                raise self.error(f"variable {name!r} has no range in the where clause", tok)
        for name, tok in self.sum_vars:
            if name in declared:
                raise self.error(f"summation variable {name!r} shadows a free variable", tok)
        try:
            sweep = Sweep(tuple(ranges), tuple(constraints))
        except InvalidSweep as exc:
            raise self.error(str(exc), self.tok) from None
        return IdentityAst(lhs, rhs, sweep)

    def where_item(self, ranges, constraints, range_toks):
        if self.tok.kind == "name" and self.peek().kind == "op" and self.peek().text == "=":
            tok = self.tok
            name = tok.text
            if name in RESERVED:
                raise self.error(f"{name!r} is reserved", tok)
            if name in range_toks:
                raise self.error(f"duplicate range for {name!r}", tok)
            self.pos += 2
            lo = self.signed_int()
            self.expect("..")
            hi = self.signed_int()
            ranges.append((name, lo, hi))
            range_toks[name] = tok
            return
        start = self.pos
        lhs = self.index()
        if not (self.tok.kind == "op" and self.tok.text in ("==", ">=", "<=", "!=", ">", "<")):
            raise self.error('expected a range "NAME=LO..HI" or a comparison')
        op = self.tok.text
        self.pos += 1
        rhs = self.index()
        for tok in self.tokens[start:self.pos]:
            if tok.kind == "name" and tok.text not in range_toks:
                raise self.error(f"constraint uses {tok.text!r} before its range", tok)
        constraints.append(Constraint(lhs, op, rhs))

    def signed_int(self) -> int:
        sign = 1
        if self.at("-"):
            self.pos += 1
            sign = -1
        if self.tok.kind != "int":
            raise self.error("expected an integer")
        value = self.int_value(self.tok)
        self.pos += 1
        return sign * value

    def expr(self) -> Expr:
        self.enter()
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        self.leave()
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.at("*") or self.at("/"):
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.at("-"):
            self.pos += 1
            self.enter()
            node = Neg(self.unary())
            self.leave()
            return node
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.at("^"):
            self.pos += 1
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> Affine:
        if self.at("-"):
            self.pos += 1
            self.enter()
            inner = self.exponent()
            self.leave()
            if inner.divisor != 1:
                raise self.error("cannot negate a floor-divided exponent")
            return -inner
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return Affine.of(self.int_value(tok))
        if tok.kind == "name" and tok.text not in RESERVED:
            self.pos += 1
            self.use_name(tok)
            return Affine.var(tok.text)
        if self.at("("):
            self.pos += 1
            aff = self.index()
            self.expect(")")
            return aff
        raise self.error("expected an integer exponent")

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "int":
            self.pos += 1
            return Lit(Fraction(self.int_value(tok)))
        if tok.kind == "rational":
            self.pos += 1
            p, q = tok.text.split("/")
            if int(q) == 0:
                raise self.error("zero denominator in rational literal", tok)
            return Lit(Fraction(int(p), int(q)))
        if tok.kind == "seqd" or (tok.kind == "name" and tok.text == "O"):
            self.pos += 1
            self.expect("[")
            idx = self.index()
            self.expect("]")
            return SeqRef(tok.kind == "seqd", idx)
        if tok.kind == "name" and tok.text == "x":
            self.pos += 1
            return VarX()
        if tok.kind == "name" and tok.text == "C":
            self.pos += 1
            self.expect("(")
            top = self.index()
            self.expect(",")
            bottom = self.index()
            self.expect(")")
            return Binom(top, bottom)
        if tok.kind == "name" and tok.text == "Sum":
            return self.sum_node()
        if tok.kind == "name" and tok.text != "where":
            self.pos += 1
            self.use_name(tok)
            return Param(tok.text)
        if self.at("("):
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "eof":
            raise self.error("unexpected end of input")
        raise self.error("expected an expression")

    def sum_node(self) -> Expr:
        self.pos += 1
        self.expect("(")
        vtok = self.tok
        if vtok.kind != "name" or vtok.text in RESERVED:
            raise self.error("expected a summation variable")
        var = vtok.text
        if var in self.bound or any(name == var for name, _ in self.free_refs):
            raise self.error(f"summation variable {var!r} reuses an existing name", vtok)
        self.sum_vars.append((var, vtok))
        self.pos += 1
        self.expect("=")
        lower = self.index()
        self.expect("..")
        upper = self.index()
        self.expect(",")
        self.bound.append(var)
        body = self.expr()
        self.bound.pop()
        self.expect(")")
        return SumNode(var, lower, upper, body)

    # index := affine ["//" INT]
    def index(self) -> Affine:
        self.enter()
        aff = self.affine()
        if self.at("//"):
            self.pos += 1
            if self.tok.kind != "int":
                raise self.error("floor division needs a positive integer divisor")
            d = self.int_value(self.tok)
            if d <= 0:
                raise self.error("floor division needs a positive integer divisor")
            self.pos += 1
            aff = Affine(aff.coeffs, aff.const, d)
        self.leave()
        return aff

    def affine(self) -> Affine:
        node = self.aterm()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.pos += 1
            rhs = self.aterm()
            node = node + rhs if op == "+" else node - rhs
        return node

    def aterm(self) -> Affine:
        start = self.tok
        node = self.afactor()
        while self.at("*"):
            self.pos += 1
            rhs = self.afactor()
            if node.is_constant():
                node = rhs.scale(node.const)
            elif rhs.is_constant():
                node = node.scale(rhs.const)
            else:
                raise self.error("index expressions must be affine", start)
        return node

    def afactor(self) -> Affine:
        tok = self.tok
        if self.at("-"):
            self.pos += 1
            self.enter()
            inner = self.afactor()
            self.leave()
            return -inner
        if tok.kind == "int":
            self.pos += 1
            return Affine.of(self.int_value(tok))
        if tok.kind == "name" and tok.text not in RESERVED:
            self.pos += 1
            self.use_name(tok)
            return Affine.var(tok.text)
        if self.at("("):
            self.pos += 1
            self.enter()
            inner = self.affine()
            self.leave()
            self.expect(")")
            return inner
        raise self.error("expected an integer index expression")


def parse(source: str | bytes) -> IdentityAst:
    """Parse one identity; raises :class:`ParseError` on any defect."""
    if isinstance(source, (bytes, bytearray)):
        try:
            source = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = bytes(source[: exc.start]).decode("utf-8", "replace")
            line = prefix.count("\n") + 1
            col = len(prefix) - (prefix.rfind("\n") + 1) + 1
            raise ParseError("invalid UTF-8", line, col) from None
    try:
        return _Parser(tokenize(source)).identity()
    except RecursionError:
        raise ParseError("expression nested too deeply", 1, 1) from None


# -- pretty printer -------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_NEG_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _prec(node: Expr) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _NEG_PREC
    if isinstance(node, Pow):
        return _POW_PREC
    return _ATOM_PREC


def _wrap(node: Expr, min_prec: int) -> str:
    text = format_expr(node)
    return f"({text})" if _prec(node) < min_prec else text


def _format_exponent(aff: Affine) -> str:
    if aff.is_constant() and aff.divisor == 1 and aff.const >= 0:
        return str(aff.const)
    return f"({aff})"


def format_expr(node: Expr) -> str:
    if isinstance(node, Lit):
        v = node.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(node, VarX):
        return "x"
    if isinstance(node, Param):
        return node.name
    if isinstance(node, SeqRef):
        return f"{'O' + chr(39) if node.derivative else 'O'}[{node.index}]"
    if isinstance(node, Binom):
        return f"C({node.top}, {node.bottom})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _NEG_PREC)
    if isinstance(node, Pow):
        return f"{_wrap(node.base, _ATOM_PREC)}^{_format_exponent(node.exponent)}"
    if isinstance(node, SumNode):
        return f"Sum({node.var}={node.lower}..{node.upper}, {format_expr(node.body)})"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = _wrap(node.left, p)
        right = _wrap(node.right, p + 1)
        if node.op == "*":
            return f"{left}*{right}"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


def format_identity(ast: IdentityAst) -> str:
    text = f"{format_expr(ast.lhs)} == {format_expr(ast.rhs)}"
    items = [f"{k}={lo}..{hi}" for k, lo, hi in ast.sweep.ranges]
    items += [f"{c.lhs} {c.op} {c.rhs}" for c in ast.sweep.constraints]
    if items:
        text += " where " + ", ".join(items)
    return text


# -- evaluation -------------------------------------------------------------------

_X = RationalFunction(LaurentPoly.monomial(1, 1))


def evaluate(node: Expr, env: dict[str, int]) -> RationalFunction:
    if isinstance(node, Lit):
        return RationalFunction(node.value)
    if isinstance(node, VarX):
        return _X
    if isinstance(node, Param):
        return RationalFunction(env[node.name])
    if isinstance(node, SeqRef):
        k = node.index(env)
        return RationalFunction(oresme_derivative_poly(k) if node.derivative else oresme(k))
    if isinstance(node, Binom):
        a, b = node.top(env), node.bottom(env)
        return RationalFunction(comb(a, b) if 0 <= b <= a else 0)
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    if isinstance(node, Pow):
        k = node.exponent(env)
        if abs(k) > MAX_POWER:
            raise EvaluationError(f"exponent {k} exceeds the limit {MAX_POWER}")
        base = evaluate(node.base, env)
        if k < 0 and base.is_zero():
            raise EvaluationError(f"negative power of zero at {env}")
        return base**k
    if isinstance(node, SumNode):
        lo, hi = node.lower(env), node.upper(env)
        total = RationalFunction(0)
        inner = dict(env)
        for v in range(lo, hi + 1):
            inner[node.var] = v
            total = total + evaluate(node.body, inner)
        return total
    if isinstance(node, BinOp):
        a = evaluate(node.left, env)
        b = evaluate(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b.is_zero():
            raise EvaluationError(f"division by a side that is identically zero at {env}")
        return a / b
    raise TypeError(f"not an expression node: {node!r}")


def _scan_ast(ast: IdentityAst, chunk, cap):
    names = ast.sweep.names
    nfail = 0
    failures = []
    for params in chunk:
        env = dict(zip(names, params))
        lhs = evaluate(ast.lhs, env)
        rhs = evaluate(ast.rhs, env)
        if not values_equal(lhs, rhs):
            nfail += 1
            if len(failures) < cap:
                failures.append((params, lhs, rhs))
    return nfail, failures


def check_ast(ast: IdentityAst, name: str = "dsl", expected: str | None = None,
              workers: int | None = None) -> IdentityReport:
    """Check an identity over every assignment of its sweep.

    ``expected`` defaults to the built-in catalog's flag when ``name`` is a
    catalog id, else ``holds``.
    """
    if expected is None:
        expected = CATALOG[name].expected if name in CATALOG else HOLDS
    points = list(ast.sweep.assignments())
    w = _resolve_workers(workers)
    nfail, failures = run_scan(_scan_ast, ast, points, w)
    names = ast.sweep.names
    return IdentityReport(
        id=name,
        sweep=ast.sweep.describe(),
        verdict=FAILS if nfail else HOLDS,
        expected=expected,
        witnesses=[Witness(dict(zip(names, p)), l, r) for p, l, r in failures],
        checked=len(points),
        failures=nfail,
    )


def check_source(source: str, **kwargs) -> IdentityReport:
    return check_ast(parse(source), **kwargs)


# -- corpus -----------------------------------------------------------------------

_NAME_PREFIX = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*:(.*)$", re.S)


class CorpusError(Exception):
    """One or more corpus lines failed to parse; ``entries`` holds the rest."""

    def __init__(self, errors: list[ParseError], entries: list[tuple[str, IdentityAst]]):
        self.errors = errors
        self.entries = entries
        lines = "; ".join(str(e) for e in errors)
        super().__init__(f"{len(errors)} corpus line(s) failed to parse: {lines}")


def parse_corpus(text: str) -> list[tuple[str, IdentityAst]]:
    entries = []
    errors = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        offset = 0
        m = _NAME_PREFIX.match(body)
        if m:
            name = m.group(1)
            offset = m.start(2)
            body = m.group(2)
        else:
            name = f"line{lineno}"
        try:
            entries.append((name, parse(body)))
        except ParseError as exc:
            col = exc.column + offset if exc.line == 1 else exc.column
            errors.append(ParseError(exc.message, lineno, col, exc.token))
    if errors:
        raise CorpusError(errors, entries)
    return entries


def load_corpus(path: str | Path | None = None) -> list[tuple[str, IdentityAst]]:
    """Parse a corpus file; ``None`` loads the shipped corpus."""
    if path is None:
        text = resources.files("oresme").joinpath("data", CORPUS_RESOURCE).read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_corpus(text)


def shipped_corpus_path() -> Path:
    return Path(str(resources.files("oresme").joinpath("data", CORPUS_RESOURCE)))
