"""Oresme polynomials O_n(x): three independent generators, negative indices,
derivatives, numeric evaluation and prefix sums."""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .algebra import (
    ZERO,
    LaurentPoly,
    RationalFunction,
    ZeroPoint,
    as_rational,
    format_rational,
    companion,
    mat_pow,
    poly_derivative,
)

_X_INV = LaurentPoly.monomial(1, -1)


class _PrefixCache:
    """Thread-safe growing prefix [O_0, O_1, ...] of the forward recurrence."""

    def __init__(self):
        self._lock = threading.Lock()
        self._polys = [ZERO, _X_INV]

    def get(self, n: int) -> LaurentPoly:
        polys = self._polys
        if n < len(polys):
            return polys[n]
        with self._lock:
            polys = self._polys
            while len(polys) <= n:
                # O_{k+1} = O_k - x^-2 O_{k-1}
                polys.append(polys[-1] - polys[-2].shift(-2))
            return polys[n]


_forward = _PrefixCache()
_deriv_cache: dict[int, LaurentPoly] = {}
_deriv_lock = threading.Lock()


def oresme_poly(n: int) -> LaurentPoly:
    """O_n(x) for n >= 0 from the recurrence with seeds O_0 = 0, O_1 = 1/x."""
    if n < 0:
        raise ValueError("oresme_poly needs n >= 0; use oresme() for negative indices")
    return _forward.get(n)


def oresme_poly_closed(n: int) -> LaurentPoly:
    """Closed form sum_j (-1)^j C(n-j-1, j) x^(-2j-1), j = 0..floor((n-1)/2)."""
    if n < 1:
        raise ValueError("oresme_poly_closed needs n >= 1")
    return LaurentPoly(
        (-2 * j - 1, (-1) ** j * comb(n - j - 1, j)) for j in range((n - 1) // 2 + 1)
    )


def oresme_by_matrix(n: int) -> LaurentPoly:
    """Lower-left entry of M_or(x)^n, which is x*O_n(x), divided by x."""
    if n < 1:
        raise ValueError("oresme_by_matrix needs n >= 1")
    return mat_pow(companion(), n).e21.shift(-1)


def oresme_neg_index(n: int) -> LaurentPoly:
    """O_{-n}(x) = -x^(2n) O_n(x), the backward continuation of the recurrence."""
    if n < 1:
        raise ValueError("oresme_neg_index needs n >= 1")
    return -oresme_poly(n).shift(2 * n)


def oresme(n: int) -> LaurentPoly:
    """O_n(x) for any integer n."""
    return oresme_poly(n) if n >= 0 else oresme_neg_index(-n)


def oresme_backward(n: int) -> LaurentPoly:
    """O_{-n} obtained by literally running the recurrence backward from O_1, O_0.

    O_{k-1} = x^2 (O_k - O_{k+1}). Used as an independent check of
    :func:`oresme_neg_index`.
    """
    if n < 0:
        raise ValueError("oresme_backward needs n >= 0")
    hi, lo = _X_INV, ZERO  # O_1, O_0
    for _ in range(n):
        hi, lo = lo, (lo - hi).shift(2)
    return lo


def oresme_derivative_poly(n: int) -> LaurentPoly:
    """d/dx O_n(x); negative n allowed."""
    if n in _deriv_cache:
        return _deriv_cache[n]
    d = poly_derivative(oresme(n))
    with _deriv_lock:
        _deriv_cache.setdefault(n, d)
    return d


def oresme_derivative_closed(n: int) -> LaurentPoly:
    """sum_j (-1)^(j+1) (2j+1) C(n-j-1, j) x^(-2j-2), j = 0..floor((n-1)/2)."""
    if n < 0:
        raise ValueError("oresme_derivative_closed needs n >= 0")
    return LaurentPoly(
        (-2 * j - 2, (-1) ** (j + 1) * (2 * j + 1) * comb(n - j - 1, j))
        for j in range((n - 1) // 2 + 1)
    )


# -- as printed (kept for the catalog's expected-failure entries) ---------

def oresme_poly_closed_as_printed(n: int) -> LaurentPoly:
    """sum_j (-1)^j C(n-j-1, j) x^(-2j): off from O_n by a factor x."""
    return LaurentPoly(
        (-2 * j, (-1) ** j * comb(n - j - 1, j)) for j in range((n - 1) // 2 + 1)
    )


def oresme_derivative_as_printed(n: int) -> LaurentPoly:
    """sum_j (-1)^(j+1) (2j) C(n-j-1, j) x^(-2j-1), j = 0..floor((n-2)/2)."""
    upper = (n - 2) // 2
    return LaurentPoly(
        (-2 * j - 1, (-1) ** (j + 1) * 2 * j * comb(n - j - 1, j))
        for j in range(upper + 1)
    )


# -- numeric evaluation ----------------------------------------------------

def _check_point(k) -> Fraction:
    k = as_rational(k)
    if k == 0:
        raise ZeroPoint("Oresme values are undefined at x = 0")
    return k


def eval_recurrence(n: int, k) -> Fraction:
    """O_n(k) by the integer-scaled recurrence.

    With k = p/q and O_n = B_n / p^n: B_0 = 0, B_1 = q,
    B_{i+1} = p B_i - q^2 B_{i-1}.
    """
    k = _check_point(k)
    if n < 0:
        return -(k ** (-2 * n)) * eval_recurrence(-n, k)
    p, q = k.numerator, k.denominator
    q2 = q * q
    b_prev, b = 0, q
    if n == 0:
        return Fraction(0)
    for _ in range(n - 1):
        b_prev, b = b, p * b - q2 * b_prev
    return Fraction(b, p**n)


def eval_matrix(n: int, k) -> Fraction:
    """O_n(k) from M_or(k)^n over exact rationals."""
    k = _check_point(k)
    if n < 0:
        return -(k ** (-2 * n)) * eval_matrix(-n, k)
    if n == 0:
        return Fraction(0)
    return mat_pow(companion(k), n).e21 / k


def eval_closed(n: int, k) -> Fraction:
    """O_n(k) from the closed binomial sum, accumulated over a common denominator."""
    k = _check_point(k)
    if n < 0:
        return -(k ** (-2 * n)) * eval_closed(-n, k)
    if n == 0:
        return Fraction(0)
    p, q = k.numerator, k.denominator
    top = (n - 1) // 2
    # x^(-2j-1) = q^(2j+1) p^(2top-2j) / p^(2top+1)
    p2, q2 = p * p, q * q
    total = 0
    qpow = q
    ppow = p2**top
    c = 1  # C(n-1, 0)
    for j in range(top + 1):
        total += (-1) ** j * c * qpow * ppow
        if j < top:
            # C(n-j-2, j+1) from C(n-j-1, j)
            m = n - j - 1
            c = c * (m - j) * (m - j - 1) // ((j + 1) * m)
            qpow *= q2
            ppow //= p2
    return Fraction(total, p ** (2 * top + 1))


def oresme_eval(n: int, k) -> Fraction:
    """A_n^(k) = O_n(k), exact."""
    return eval_recurrence(n, k)


def fibonacci(n: int) -> int:
    if n < 0:
        raise ValueError("fibonacci needs n >= 0")
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


# -- sums and tables ---------------------------------------------------------

PREFIX_KINDS = ("plain", "alternating", "odd_index")


def prefix_sums(n: int, kind: str = "plain") -> RationalFunction:
    """Direct summation: plain sum O_j, alternating sum (-1)^j O_j, or sum O_{2j+1}."""
    if n < 0:
        raise ValueError("prefix_sums needs n >= 0")
    total = ZERO
    if kind == "plain":
        for j in range(n + 1):
            total = total + oresme_poly(j)
    elif kind == "alternating":
        for j in range(n + 1):
            total = total + (oresme_poly(j) if j % 2 == 0 else -oresme_poly(j))
    elif kind == "odd_index":
        for j in range(n + 1):
            total = total + oresme_poly(2 * j + 1)
    else:
        raise ValueError(f"unknown prefix sum kind {kind!r}")
    return RationalFunction(total)


@dataclass(frozen=True)
class SequenceTable:
    entries: tuple[tuple[int, LaurentPoly], ...]
    provenance: str = "recurrence"
    derivative: bool = False
    x: Fraction | None = None
    values: tuple[Fraction, ...] | None = field(default=None)

    def rows(self) -> list[dict]:
        out = []
        for i, (n, poly) in enumerate(self.entries):
            row = {"n": n, "poly": poly.to_json(), "text": str(poly)}
            if self.values is not None:
                v = self.values[i]
                row["value"] = format_rational(v)
            out.append(row)
        return out


_GENERATORS = {
    "recurrence": oresme_poly,
    "closed": lambda n: oresme_poly_closed(n) if n >= 1 else ZERO,
    "matrix": lambda n: oresme_by_matrix(n) if n >= 1 else ZERO,
}


def sequence_table(
    start: int,
    stop: int,
    provenance: str = "recurrence",
    derivative: bool = False,
    x=None,
) -> SequenceTable:
    """Rows O_start..O_stop inclusive (or their derivatives), optionally evaluated at x."""
    if start > stop:
        raise ValueError("empty table range")
    gen = _GENERATORS[provenance]
    entries = []
    for n in range(start, stop + 1):
        if n < 0:
            poly = oresme(n)
        else:
            poly = gen(n)
        if derivative:
            poly = poly_derivative(poly)
        entries.append((n, poly))
    values = None
    x_val = None
    if x is not None:
        x_val = _check_point(x)
        values = tuple(RationalFunction(p).evaluate(x_val) for _, p in entries)
    return SequenceTable(tuple(entries), provenance, derivative, x_val, values)

