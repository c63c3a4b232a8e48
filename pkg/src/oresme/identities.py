"""Catalog of Oresme identities checked exactly in the rational-function field.

Each entry pairs two expression builders with a default sweep per profile.
Entries whose printed form is wrong are kept with
``expected="fails_as_transcribed"`` next to a corrected twin.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .algebra import (
    ONE,
    LaurentPoly,
    RationalFunction,
    ZeroPoint,
    as_rational,
    companion,
    format_rational,
    mat_pow,
    rf_equals,
)
from .sequences import (
    oresme,
    oresme_derivative_as_printed,
    oresme_derivative_closed,
    oresme_derivative_poly,
    oresme_poly_closed,
    oresme_poly_closed_as_printed,
    prefix_sums,
)
from .sweep import Affine, Constraint, InvalidSweep, Sweep

WITNESS_CAP = 10
WORKERS_ENV = "ORESME_WORKERS"
HOLDS = "holds"
FAILS = "fails"
FAILS_AS_TRANSCRIBED = "fails_as_transcribed"


class UnknownIdentity(KeyError):
    pass


class EvaluationError(ArithmeticError):
    pass


class DomainError(ValueError):
    pass


# -- report -----------------------------------------------------------------

def _value_json(v):
    if isinstance(v, RationalFunction):
        return v.to_json()
    if isinstance(v, tuple):
        return [_value_json(e) for e in v]
    if isinstance(v, float):
        return format(v, ".17g")
    return format_rational(v)


@dataclass
class Witness:
    params: dict[str, int]
    lhs: object
    rhs: object

    def to_json(self) -> dict:
        return {"params": dict(self.params), "lhs": _value_json(self.lhs), "rhs": _value_json(self.rhs)}


@dataclass
class IdentityReport:
    id: str
    sweep: str
    verdict: str
    expected: str
    witnesses: list[Witness] = field(default_factory=list)
    checked: int = 0
    failures: int = 0

    @property
    def unexpected(self) -> bool:
        return (self.verdict == HOLDS) != (self.expected == HOLDS)

    @property
    def vacuous(self) -> bool:
        return self.checked == 0

    @property
    def outcome(self) -> str:
        if self.unexpected:
            return f"{self.verdict} (UNEXPECTED)"
        if self.verdict == FAILS:
            return "fails (expected)"
        return "holds (vacuous)" if self.vacuous else "holds"

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "sweep": self.sweep,
            "verdict": self.verdict,
            "expected": self.expected,
            "unexpected": self.unexpected,
            "vacuous": self.vacuous,
            "checked": self.checked,
            "failures": self.failures,
            "witnesses": [w.to_json() for w in self.witnesses],
        }


# -- builder helpers ----------------------------------------------------------

def _mono(c, e: int) -> LaurentPoly:
    return LaurentPoly.monomial(c, e)


O = oresme
D = oresme_derivative_poly


@lru_cache(maxsize=1 << 16)
def _prod(i: int, j: int) -> LaurentPoly:
    if i > j:
        i, j = j, i
    return oresme(i) * oresme(j)


def _rf(num, den=None) -> RationalFunction:
    return RationalFunction(num, den)


_TWO_X2_PLUS_1 = LaurentPoly({2: 2, 0: 1})
_X2_MINUS_4 = LaurentPoly({2: 1, 0: -4})
_X3_X2_MINUS_4 = _X2_MINUS_4.shift(3)


def _cassini_lhs(n):
    return O(n + 1) * O(n - 1) - O(n) * O(n)


def _cassini_rhs(n):
    return _mono(-1, -2 * n)


def _three_term_rhs(n):
    # ((x^2-1)/x^2) O_{n+1} - x^-4 O_{n-1}
    return O(n + 1) - O(n + 1).shift(-2) - O(n - 1).shift(-4)


def _add_lhs(n, m):
    return O(n + m)


def _add_rhs(n, m):
    return (O(n) * O(m + 1)).shift(1) - (O(n - 1) * O(m)).shift(-1)


def _gb1_lhs(a, b, c, d, t):
    return _prod(a, b) - _prod(c, d)


def _gb1_rhs(a, b, c, d, t):
    return (_prod(a - t, b - t) - _prod(c - t, d - t)).shift(-2 * t)


def _cor_lhs(n, m):
    return O(n + 1) * O(m) - O(n) * O(m + 1)


def _cor_rhs(n, m):
    return O(m - n).shift(-(2 * n + 1))


def _sum_rhs(n):
    # x^2 (1/x - O_{n+2})
    return _mono(1, 1) - O(n + 2).shift(2)


def _alt_sum_rhs(n):
    sign = 1 if (n + 1) % 2 == 0 else -1
    inner = _mono(-1, -1) + (O(n + 2) - O(n + 1).scale(2)).scale(sign)
    return _rf(inner.shift(2), _TWO_X2_PLUS_1)


def _odd_sum_t_rhs(n):
    x2p1 = LaurentPoly({2: 1, 0: 1})
    inner = x2p1.shift(-1) + (x2p1.shift(-2) * (O(2 * n + 1) - O(2 * (n + 1)).shift(2)))
    return _rf(inner.shift(2), _TWO_X2_PLUS_1)


def _odd_sum_c_rhs(n):
    x2p1 = LaurentPoly({2: 1, 0: 1})
    num = x2p1.shift(1) + x2p1 * O(2 * n + 1) - O(2 * n + 2).shift(4)
    return _rf(num, _TWO_X2_PLUS_1)


def _g1_rhs(n):
    # x^2 (2n - x^2) = 2n x^2 - x^4
    num = LaurentPoly({2: 2 * n, 4: -1}) * O(n) - O(n - 2).scale(2 * n)
    return _rf(num, _X3_X2_MINUS_4)


def _deriv_plus(n):
    # O_n' + (n/x) O_n
    return D(n) + O(n).shift(-1).scale(n)


def _n2_rhs(n):
    total = LaurentPoly()
    for j in range(1, n):
        total = total + _prod(j, n - j)
    return total


def _g2_rhs(n):
    total = LaurentPoly()
    for j in range((n - 2) // 2 + 1):
        total = total + O(n - 1 - 2 * j).shift(-(2 * j + 1)).scale(n - 1 - 2 * j)
    return total


def _g3_t_lhs(n):
    return O(n).scale(n - 1) - O(n + 1).scale(2 * n)


def _g3_c_lhs(n):
    return O(n).scale(2 * n - 1) - O(n + 1).scale(2 * n)


def _g3_rhs(n):
    return D(n + 1).shift(1) - D(n - 1).shift(-1)


def _remark_lhs(n):
    num = LaurentPoly({4: n - 1, 2: -2 * n}) * O(n) - O(n - 2).scale(2 * n)
    return _rf(num, _X3_X2_MINUS_4)


def _mat_entry_lhs(n):
    return mat_pow(companion(), n).entries()


def _mat_entry_rhs(n):
    return (O(n + 1).shift(1), -O(n).shift(-1), O(n).shift(1), -O(n - 1).shift(-1))


def _det_lhs(n):
    return mat_pow(companion(), n).det()


def _det_rhs(n):
    return _mono(1, -2 * n)


# -- catalog ----------------------------------------------------------------

Builder = Callable[..., object]


@dataclass(frozen=True)
class IdentityEntry:
    id: str
    params: tuple[str, ...]
    lhs: Builder
    rhs: Builder
    expected: str
    statement: str
    sweeps: dict  # profile -> Sweep
    domain: tuple[Constraint, ...] = ()

    def sweep(self, profile: str = "quick") -> Sweep:
        try:
            return self.sweeps[profile]
        except KeyError:
            raise ValueError(f"unknown sweep profile {profile!r}") from None

    def in_domain(self, env: dict) -> bool:
        return all(c.holds(env) for c in self.domain)

    def evaluate(self, params: Sequence[int]):
        env = dict(zip(self.params, params))
        return _as_value(self.lhs(**env)), _as_value(self.rhs(**env))


def _as_value(v):
    if isinstance(v, RationalFunction):
        return v
    if isinstance(v, tuple):
        return tuple(_as_value(e) for e in v)
    return RationalFunction(v)


def values_equal(a, b) -> bool:
    if isinstance(a, tuple):
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, RationalFunction):
        return rf_equals(a, b)
    return a == b


def _ge(var: str, k: int) -> Constraint:
    return Constraint(Affine.var(var), ">=", Affine.of(k))


def _one_param(lo: int, quick_hi: int = 20, full_hi: int = 100, name: str = "n"):
    return {
        "quick": Sweep(((name, lo, quick_hi),)),
        "full": Sweep(((name, lo, full_hi),)),
    }


_M_GE_N = Constraint(Affine.var("m"), ">=", Affine.var("n"))
_GB1_BALANCE = Constraint(
    Affine.of(a=1, b=1), "==", Affine.of(c=1, d=1)
)


def _grid(names, bound):
    return tuple((k, -bound, bound) for k in names)


def _entry(id, params, lhs, rhs, expected, statement, sweeps, domain=()):
    return IdentityEntry(id, tuple(params), lhs, rhs, expected, statement, sweeps, tuple(domain))


CATALOG: dict[str, IdentityEntry] = {
    e.id: e
    for e in [
        _entry("CASSINI", "n", _cassini_lhs, _cassini_rhs, HOLDS,
               "O[n+1]*O[n-1] - O[n]^2 = -x^(-2n)", _one_param(1), [_ge("n", 1)]),
        _entry("THREE_TERM", "n", lambda n: O(n + 2), _three_term_rhs, HOLDS,
               "O[n+2] = ((x^2-1)/x^2)*O[n+1] - x^(-4)*O[n-1]", _one_param(1), [_ge("n", 1)]),
        _entry("ADD", ("n", "m"), _add_lhs, _add_rhs, HOLDS,
               "O[n+m] = x*O[n]*O[m+1] - (1/x)*O[n-1]*O[m]",
               {"quick": Sweep(_grid("nm", 6)), "full": Sweep(_grid("nm", 12))}),
        _entry("GB1", ("a", "b", "c", "d", "t"), _gb1_lhs, _gb1_rhs, HOLDS,
               "O[a]*O[b] - O[c]*O[d] = x^(-2t)*(O[a-t]*O[b-t] - O[c-t]*O[d-t]) for a+b = c+d",
               {"quick": Sweep(_grid("abcdt", 3), (_GB1_BALANCE,)),
                "full": Sweep(_grid("abcdt", 12), (_GB1_BALANCE,))},
               [_GB1_BALANCE]),
        _entry("COR", ("n", "m"), _cor_lhs, _cor_rhs, HOLDS,
               "O[n+1]*O[m] - O[n]*O[m+1] = x^(-(2n+1))*O[m-n] for m >= n",
               {"quick": Sweep((("n", 0, 20), ("m", 0, 20)), (_M_GE_N,)),
                "full": Sweep((("n", 0, 100), ("m", 0, 100)), (_M_GE_N,))},
               [_M_GE_N]),
        _entry("SUM", "n", lambda n: prefix_sums(n, "plain"), _sum_rhs, HOLDS,
               "sum_{j=0..n} O[j] = x^2*(1/x - O[n+2])", _one_param(0), [_ge("n", 0)]),
        _entry("ALT_SUM", "n", lambda n: prefix_sums(n, "alternating"), _alt_sum_rhs, HOLDS,
               "sum_{j=0..n} (-1)^j O[j] = (x^2/(2x^2+1))*(-1/x + (-1)^(n+1)*(O[n+2] - 2*O[n+1]))",
               _one_param(0), [_ge("n", 0)]),
        _entry("ODD_SUM_T", "n", lambda n: prefix_sums(n, "odd_index"), _odd_sum_t_rhs,
               FAILS_AS_TRANSCRIBED,
               "sum_{j=0..n} O[2j+1] = (x^2/(2x^2+1))*((x^2+1)/x + ((x^2+1)/x^2)*(O[2n+1] - x^2*O[2n+2]))",
               _one_param(0), [_ge("n", 0)]),
        _entry("ODD_SUM_C", "n", lambda n: prefix_sums(n, "odd_index"), _odd_sum_c_rhs, HOLDS,
               "sum_{j=0..n} O[2j+1] = (x*(x^2+1) + (x^2+1)*O[2n+1] - x^4*O[2n+2])/(2x^2+1)",
               _one_param(0), [_ge("n", 0)]),
        _entry("G1", "n", lambda n: D(n), _g1_rhs, HOLDS,
               "O'[n] = (x^2*(2n-x^2)*O[n] - 2n*O[n-2])/(x^3*(x^2-4))", _one_param(2), [_ge("n", 2)]),
        _entry("N2", "n", _deriv_plus, _n2_rhs, HOLDS,
               "O'[n] + (n/x)*O[n] = sum_{j=1..n-1} O[j]*O[n-j]", _one_param(2), [_ge("n", 2)]),
        _entry("G2", "n", _deriv_plus, _g2_rhs, HOLDS,
               "O'[n] + (n/x)*O[n] = sum_{j=0..floor((n-2)/2)} ((n-1-2j)/x^(2j+1))*O[n-1-2j]",
               _one_param(2), [_ge("n", 2)]),
        _entry("G3_T", "n", _g3_t_lhs, _g3_rhs, FAILS_AS_TRANSCRIBED,
               "(n-1)*O[n] - 2n*O[n+1] = x*O'[n+1] - (1/x)*O'[n-1]", _one_param(1), [_ge("n", 1)]),
        _entry("G3_C", "n", _g3_c_lhs, _g3_rhs, HOLDS,
               "(2n-1)*O[n] - 2n*O[n+1] = x*O'[n+1] - (1/x)*O'[n-1]", _one_param(1), [_ge("n", 1)]),
        _entry("REMARK_COMBINED", "n", _remark_lhs, _n2_rhs, HOLDS,
               "(x^2*((n-1)x^2-2n)*O[n] - 2n*O[n-2])/(x^3*(x^2-4)) = sum_{j=1..n-1} O[j]*O[n-j]",
               _one_param(2), [_ge("n", 2)]),
        _entry("BN_T", "n", lambda n: O(n), oresme_poly_closed_as_printed, FAILS_AS_TRANSCRIBED,
               "O[n] = sum_{j=0..floor((n-1)/2)} (-1)^j C(n-j-1,j) x^(-2j)", _one_param(1), [_ge("n", 1)]),
        _entry("BN_C", "n", lambda n: O(n), oresme_poly_closed, HOLDS,
               "O[n] = sum_{j=0..floor((n-1)/2)} (-1)^j C(n-j-1,j) x^(-2j-1)", _one_param(1), [_ge("n", 1)]),
        _entry("BN1_T", "n", lambda n: D(n), oresme_derivative_as_printed, FAILS_AS_TRANSCRIBED,
               "O'[n] = sum_{j=0..floor((n-2)/2)} (-1)^(j+1) (2j) C(n-j-1,j) x^(-2j-1)",
               _one_param(1), [_ge("n", 1)]),
        _entry("BN1_C", "n", lambda n: D(n), oresme_derivative_closed, HOLDS,
               "O'[n] = sum_{j=0..floor((n-1)/2)} (-1)^(j+1) (2j+1) C(n-j-1,j) x^(-2j-2)",
               _one_param(1), [_ge("n", 1)]),
        _entry("MAT_ENTRY", "n", _mat_entry_lhs, _mat_entry_rhs, HOLDS,
               "M^n = [[x*O[n+1], -(1/x)*O[n]], [x*O[n], -(1/x)*O[n-1]]]", _one_param(1), [_ge("n", 1)]),
        _entry("DET", "n", _det_lhs, _det_rhs, HOLDS,
               "det(M^n) = x^(-2n)", _one_param(1), [_ge("n", 1)]),
    ]
}

PROFILES = ("quick", "full")


def get_entry(identity_id: str) -> IdentityEntry:
    try:
        return CATALOG[identity_id]
    except KeyError:
        raise UnknownIdentity(identity_id) from None


# -- checking -----------------------------------------------------------------

def default_workers() -> int:
    """Worker count from ``ORESME_WORKERS`` (default 1 = serial)."""
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _resolve_workers(workers: int | None) -> int:
    cap = os.environ.get(WORKERS_ENV)
    w = default_workers() if workers is None else max(1, workers)
    if cap:
        w = min(w, default_workers())
    return w


def _scan(entry: IdentityEntry, chunk: Sequence[tuple[int, ...]], cap: int):
    failures = []
    nfail = 0
    for params in chunk:
        lhs, rhs = entry.evaluate(params)
        if not values_equal(lhs, rhs):
            nfail += 1
            if len(failures) < cap:
                failures.append((params, lhs, rhs))
    return nfail, failures


def _scan_by_id(identity_id: str, chunk, cap):
    return _scan(get_entry(identity_id), chunk, cap)


def validate_sweep(entry_id: str, params: Sequence[str], domain, sweep: Sweep) -> list[tuple]:
    if tuple(sweep.names) != tuple(params):
        raise InvalidSweep(
            f"{entry_id} takes parameters {list(params)}, sweep declares {list(sweep.names)}"
        )
    points = list(sweep.assignments())
    for p in points:
        env = dict(zip(params, p))
        if not all(c.holds(env) for c in domain):
            bad = ", ".join(str(c) for c in domain if not c.holds(env))
            raise InvalidSweep(f"{entry_id}: assignment {env} violates {bad}")
    return points


def run_scan(scan_fn, key, points, workers: int = 1):
    """Evaluate ``points`` serially or in process chunks; merge deterministically."""
    if workers <= 1 or len(points) < 2 * workers:
        return scan_fn(key, points, WITNESS_CAP)
    size = math.ceil(len(points) / (workers * 4))
    chunks = [points[i:i + size] for i in range(0, len(points), size)]
    total = 0
    failures = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for nfail, fails in pool.map(scan_fn, [key] * len(chunks), chunks, [WITNESS_CAP] * len(chunks)):
            total += nfail
            failures.extend(fails)
    failures.sort(key=lambda f: f[0])
    return total, failures[:WITNESS_CAP]


def check_identity(
    identity_id: str,
    sweep: Sweep | None = None,
    profile: str = "quick",
    workers: int | None = None,
) -> IdentityReport:
    entry = get_entry(identity_id)
    if sweep is None:
        sweep = entry.sweep(profile)
    points = validate_sweep(entry.id, entry.params, entry.domain, sweep)
    workers = _resolve_workers(workers)
    if workers > 1:
        nfail, failures = run_scan(_scan_by_id, entry.id, points, workers)
    else:
        nfail, failures = _scan(entry, points, WITNESS_CAP)
    witnesses = [Witness(dict(zip(entry.params, p)), l, r) for p, l, r in failures]
    return IdentityReport(
        id=entry.id,
        sweep=sweep.describe(),
        verdict=FAILS if nfail else HOLDS,
        expected=entry.expected,
        witnesses=witnesses,
        checked=len(points),
        failures=nfail,
    )


def _check_for_pool(args):
    identity_id, profile = args
    return check_identity(identity_id, profile=profile, workers=1)


def run_catalog(profile: str = "quick", ids: Sequence[str] | None = None,
                workers: int | None = None) -> list[IdentityReport]:
    """Check every (or the selected) catalog entry; reports sorted by id."""
    if profile not in PROFILES:
        raise ValueError(f"unknown sweep profile {profile!r}")
    ids = sorted(CATALOG) if ids is None else sorted(ids)
    for i in ids:
        get_entry(i)
    workers = _resolve_workers(workers)
    if workers > 1 and len(ids) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_check_for_pool, [(i, profile) for i in ids]))
    else:
        reports = [check_identity(i, profile=profile, workers=1) for i in ids]
    return sorted(reports, key=lambda r: r.id)


# -- numeric k-Oresme checks ------------------------------------------------

BINET_ID = "BINET"
BINET_RTOL = 1e-9


def kores_numeric_check(identity_id: str, k, sweep: Sweep | None = None,
                        profile: str = "quick") -> IdentityReport:
    """Check an identity with x fixed at the rational k.

    ``BINET`` compares the exact value O_n(k) against the float Binet formula
    at relative tolerance 1e-9 (needs k^2 > 4).
    """
    k = as_rational(k)
    if k == 0:
        raise ZeroPoint("k must be nonzero")
    if identity_id == BINET_ID:
        return _binet_numeric(k, sweep or Sweep((("n", 0, 20 if profile == "quick" else 60),)))
    entry = get_entry(identity_id)
    if sweep is None:
        sweep = entry.sweep(profile)
    points = validate_sweep(entry.id, entry.params, entry.domain, sweep)
    nfail = 0
    witnesses = []
    for p in points:
        lhs, rhs = entry.evaluate(p)
        try:
            lv, rv = _at(lhs, k), _at(rhs, k)
        except ZeroDivisionError as exc:
            raise EvaluationError(f"{entry.id} at {dict(zip(entry.params, p))}: {exc}") from exc
        if lv != rv:
            nfail += 1
            if len(witnesses) < WITNESS_CAP:
                witnesses.append(Witness(dict(zip(entry.params, p)), lv, rv))
    return IdentityReport(
        id=entry.id,
        sweep=f"{sweep.describe()}; x={format_rational(k)}",
        verdict=FAILS if nfail else HOLDS,
        expected=entry.expected,
        witnesses=witnesses,
        checked=len(points),
        failures=nfail,
    )


def _at(value, k):
    if isinstance(value, tuple):
        return tuple(_at(v, k) for v in value)
    return value.evaluate(k)


def _binet_numeric(k: Fraction, sweep: Sweep) -> IdentityReport:
    from .analytic import binet_float
    from .sequences import eval_recurrence

    if k * k <= 4:
        raise DomainError("Binet comparison needs k^2 > 4")
    if sweep.names != ("n",):
        raise InvalidSweep("BINET takes a single parameter n")
    nfail = 0
    witnesses = []
    points = list(sweep.assignments())
    for (n,) in points:
        exact = eval_recurrence(n, k)
        approx = binet_float(n, float(k))
        if exact == 0:
            ok = abs(approx) < BINET_RTOL
        else:
            ok = abs(approx - float(exact)) <= BINET_RTOL * abs(float(exact))
        if not ok:
            nfail += 1
            if len(witnesses) < WITNESS_CAP:
                witnesses.append(Witness({"n": n}, exact, approx))
    return IdentityReport(
        id=BINET_ID,
        sweep=f"{sweep.describe()}; x={format_rational(k)}",
        verdict=FAILS if nfail else HOLDS,
        expected=HOLDS,
        witnesses=witnesses,
        checked=len(points),
        failures=nfail,
    )
