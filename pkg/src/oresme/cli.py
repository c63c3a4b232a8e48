"""Command-line interface.

Usage::

    oresme [--format json|csv|pretty] [--workers N] COMMAND ...

Commands: table, eval, verify, roots, limit, bench, dsl check.
Data goes to stdout, diagnostics to stderr. Exit codes: 0 success,
1 an outcome did not match expectations, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import statistics
import sys
import time
from fractions import Fraction

from . import __version__
from .algebra import as_rational, format_rational
from .analytic import binet_float, product_reconstruct, ratio_limit_probe
from .dsl import CorpusError, ParseError, check_ast, load_corpus
from .identities import (
    CATALOG,
    PROFILES,
    InvalidSweep,
    UnknownIdentity,
    run_catalog,
)
from .sequences import eval_closed, eval_matrix, eval_recurrence, sequence_table
from .sweep import parse_range_override

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
BENCH_REPEAT = 3

EXACT_MODES = {
    "recurrence": eval_recurrence,
    "matrix": eval_matrix,
    "closed": eval_closed,
}
MODES = (*EXACT_MODES, "binet")
BENCH_STRATEGY = {"recurrence": "recurrence", "matrix": "matrix", "closed": "closed",
                  "binet": "binet_float", "binet_float": "binet_float"}


class UsageError(Exception):
    pass


def fmt_float(v: float) -> str:
    return format(v, ".17g")


def digest(value) -> str:
    if isinstance(value, float):
        return fmt_float(value)
    text = format_rational(value)
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


def _rational_arg(text: str) -> Fraction:
    try:
        return as_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None


def _mode_list(text: str) -> list[str]:
    modes = [t.strip() for t in text.split(",") if t.strip()]
    for m in modes:
        if m not in BENCH_STRATEGY:
            raise argparse.ArgumentTypeError(f"unknown mode {m!r}")
    return modes


# -- commands: each returns (exit code, payload, records, pretty text) -----------

def cmd_table(args):
    if args.start > args.stop:
        raise UsageError("--from must not exceed --to")
    table = sequence_table(args.start, args.stop, "recurrence", args.derivative, args.x)
    rows = table.rows()
    name = "O'" if args.derivative else "O"
    lines = []
    for row in rows:
        line = f"{name}_{row['n']}(x) = {row['text']}"
        if "value" in row:
            line += f"    [x={format_rational(table.x)}: {row['value']}]"
        lines.append(line)
    meta = {
        "provenance": table.provenance,
        "derivative": table.derivative,
        "x": None if table.x is None else format_rational(table.x),
    }
    return EXIT_OK, meta, rows, "\n".join(lines)


def _eval_one(mode: str, n: int, x: Fraction):
    if mode == "binet":
        return binet_float(n, float(x))
    return EXACT_MODES[mode](n, x)


def cmd_eval(args):
    value = _eval_one(args.mode, args.n, args.x)
    shown = fmt_float(value) if isinstance(value, float) else format_rational(value)
    rec = {"n": args.n, "x": format_rational(args.x), "mode": args.mode,
           "value": shown, "digest": digest(value)}
    return EXIT_OK, {}, [rec], f"O_{args.n}({format_rational(args.x)}) = {shown}  [{args.mode}]"


def _report_record(r) -> dict:
    d = r.to_json()
    d["outcome"] = r.outcome
    return d


def cmd_verify(args):
    ids = [args.id] if args.id else None
    if args.id and args.id not in CATALOG:
        raise UsageError(f"unknown identity {args.id!r}; known: {', '.join(sorted(CATALOG))}")
    reports = run_catalog(args.profile, ids, workers=args.workers)
    records = [_report_record(r) for r in reports]
    unexpected = sum(r.unexpected for r in reports)
    lines = [f"{r.id:<16} {r.outcome:<22} checked={r.checked}"
             + (f" first witness {r.witnesses[0].params}" if r.witnesses else "")
             for r in reports]
    lines.append(f"{len(reports)} identities, {unexpected} unexpected")
    meta = {"profile": args.profile, "unexpected": unexpected}
    return (EXIT_UNEXPECTED if unexpected else EXIT_OK), meta, records, "\n".join(lines)


def cmd_roots(args):
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    rep = product_reconstruct(args.n, args.tol)
    rec = rep.to_json()
    text = (f"n={rep.n} roots={[round(r, 12) for r in rep.roots]}\n"
            f"exact x^n O_n coefficients: {rep.exact}\n"
            f"max coefficient error {fmt_float(rep.max_error)} "
            f"({'pass' if rep.passed else 'FAIL'} at tol {rep.tol:g})")
    return (EXIT_OK if rep.passed else EXIT_UNEXPECTED), {}, [rec], text


def cmd_limit(args):
    if args.steps < 1:
        raise UsageError("--steps must be positive")
    x = args.x
    try:
        xv = as_rational(x)
    except (ValueError, ZeroDivisionError):
        try:
            xv = float(x)
        except ValueError:
            raise UsageError(f"--x is not a number: {x!r}") from None
    trace = ratio_limit_probe(xv, args.steps)
    payload = trace.to_json()
    steps = payload.pop("steps")
    last = trace.steps[-1]
    text = (f"x={payload['x']} verdict={trace.verdict} limit={payload['limit']} "
            f"observed={payload['observed_limit']}\n"
            f"last step n={last[0]} ratio={last[1]} error={last[2]}")
    if trace.remark_discrepancy:
        text += "\nobserved |limit| differs from the claimed value 1 at x = +-2"
    return EXIT_OK, payload, steps, text


def _time_median(fn, repeat: int):
    times = []
    value = None
    for _ in range(max(3, repeat)):
        t0 = time.perf_counter()
        value = fn()
        times.append(time.perf_counter() - t0)
    return value, statistics.median(times)


def cmd_bench(args):
    records = []
    agree = True
    for n in args.n_list:
        exact_digests = set()
        for mode in args.modes:
            strategy = BENCH_STRATEGY[mode]
            key = "binet" if strategy == "binet_float" else mode
            try:
                value, wall = _time_median(lambda: _eval_one(key, n, args.x), BENCH_REPEAT)
            except OverflowError:
                value, wall = float("nan"), 0.0
            d = digest(value)
            if strategy != "binet_float":
                exact_digests.add(d)
            records.append({"strategy": strategy, "n": n, "x": format_rational(args.x),
                            "wall_seconds": fmt_float(wall), "digest": d})
        if len(exact_digests) > 1:
            agree = False
    lines = [f"{r['strategy']:<12} n={r['n']:<7} {r['wall_seconds']:>24}s  {r['digest'][:24]}"
             for r in records]
    lines.append("exact digests agree" if agree else "EXACT DIGESTS DISAGREE")
    return (EXIT_OK if agree else EXIT_UNEXPECTED), {"digests_agree": agree}, records, "\n".join(lines)


def cmd_dsl(args):
    overrides = dict(parse_range_override(r) for r in (args.range or []))
    errors = []
    try:
        entries = load_corpus(args.file)
    except OSError as exc:
        raise UsageError(f"cannot read corpus: {exc}") from None
    except CorpusError as exc:
        entries = exc.entries
        errors = exc.errors
    for err in errors:
        print(f"{args.file}: {err}", file=sys.stderr)
    reports = []
    for name, ast in entries:
        applicable = {k: v for k, v in overrides.items() if k in ast.sweep.names}
        if applicable:
            ast = type(ast)(ast.lhs, ast.rhs, ast.sweep.with_ranges(applicable))
        reports.append(check_ast(ast, name, workers=args.workers))
    records = [_report_record(r) for r in reports]
    unexpected = sum(r.unexpected for r in reports)
    lines = [f"{r.id:<16} {r.outcome:<22} checked={r.checked}" for r in reports]
    lines.append(f"{len(reports)} identities, {unexpected} unexpected, {len(errors)} parse errors")
    meta = {"file": str(args.file), "unexpected": unexpected,
            "parse_errors": [str(e) for e in errors]}
    if errors:
        code = EXIT_USAGE
    else:
        code = EXIT_UNEXPECTED if unexpected else EXIT_OK
    return code, meta, records, "\n".join(lines)


# -- output -------------------------------------------------------------------------

def csv_cell(value) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value)


def render(fmt: str, command: str, meta: dict, records: list[dict], pretty: str) -> str:
    if fmt == "json":
        doc = {"command": command, **meta, "records": records}
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        columns: list[str] = []
        for rec in records:
            for k in rec:
                if k not in columns:
                    columns.append(k)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            writer.writerow([csv_cell(rec[k]) if k in rec else "" for k in columns])
        return buf.getvalue()
    return pretty + "\n"


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        v = 0
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _add_common(p: argparse.ArgumentParser, default) -> None:
    p.add_argument("--format", choices=("json", "csv", "pretty"), default=default)
    p.add_argument("--workers", type=_positive_int, default=default,
                   help="worker processes (capped by ORESME_WORKERS)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oresme", description="Exact Oresme polynomial toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_common(p, argparse.SUPPRESS)
    p.set_defaults(format="pretty", workers=None)
    # the same options are accepted after the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)
    add = sub.add_parser

    def sub_parser(name, **kw):
        return add(name, parents=[common], **kw)

    sub.add_parser = sub_parser

    t = sub.add_parser("table", help="O_n(x) (or O_n'(x)) for a range of n")
    t.add_argument("--from", dest="start", type=int, required=True)
    t.add_argument("--to", dest="stop", type=int, required=True)
    t.add_argument("--derivative", action="store_true")
    t.add_argument("--x", type=_rational_arg, help="also evaluate each row at this rational")

    e = sub.add_parser("eval", help="one value O_n(x)")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--x", type=_rational_arg, required=True)
    e.add_argument("--mode", choices=MODES, default="recurrence")

    v = sub.add_parser("verify", help="check catalog identities")
    which = v.add_mutually_exclusive_group()
    which.add_argument("--id", help="identity id")
    which.add_argument("--all", action="store_true", help="every catalog entry (default)")
    v.add_argument("--profile", choices=PROFILES, default="quick")

    r = sub.add_parser("roots", help="product-formula reconstruction from cosine roots")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--tol", type=float, default=1e-8)

    lim = sub.add_parser("limit", help="ratio O_{n+1}/O_n convergence trace")
    lim.add_argument("--x", required=True, help="rational p/q (exact) or decimal (float)")
    lim.add_argument("--steps", type=int, default=60)

    b = sub.add_parser("bench", help="time evaluation strategies")
    b.add_argument("--modes", type=_mode_list, default=["recurrence", "matrix", "closed", "binet_float"])
    b.add_argument("--n-list", type=_int_list, default=[2**10, 2**12, 2**14])
    b.add_argument("--x", type=_rational_arg, default=Fraction(3))

    d = sub.add_parser("dsl", help="identity DSL tools")
    dsub = d.add_subparsers(dest="dsl_command", required=True)
    dc = dsub.add_parser("check", parents=[common], help="verify every identity in a corpus file")
    dc.add_argument("file")
    dc.add_argument("--range", action="append", metavar="VAR=LO..HI")
    return p


COMMANDS = {
    "table": cmd_table,
    "eval": cmd_eval,
    "verify": cmd_verify,
    "roots": cmd_roots,
    "limit": cmd_limit,
    "bench": cmd_bench,
    "dsl": cmd_dsl,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code, meta, records, pretty = COMMANDS[args.command](args)
    except (UsageError, InvalidSweep, UnknownIdentity, ParseError) as exc:
        print(f"oresme {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ZeroDivisionError) as exc:
        print(f"oresme {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(render(args.format, args.command, meta, records, pretty))
    return code


if __name__ == "__main__":
    sys.exit(main())
