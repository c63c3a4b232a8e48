"""Exact arithmetic: rationals, sparse Laurent polynomials, rational functions
and 2x2 matrices.

Coefficients are kept as Python ints when integral and as
:class:`fractions.Fraction` otherwise; both are exact and compare/hash equal,
so the int fast path is invisible to callers.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Mapping, Union

Rational = Fraction
Coeff = Union[int, Fraction]

# exponents are machine-width signed integers
EXP_MIN = -(2**63)
EXP_MAX = 2**63 - 1


class ZeroPoint(ZeroDivisionError):
    """Evaluation of a polynomial with negative exponents at x = 0."""


def as_rational(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings into a reduced Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if len(text) > _DIRECT_DIGITS:
            num, _, den = text.partition("/")
            return Fraction(decimal_to_int(num), decimal_to_int(den) if den else 1)
        return Fraction(text)
    if isinstance(value, _RationalABC):
        return Fraction(value.numerator, value.denominator)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def _norm(c) -> Coeff:
    if type(c) is int:
        return c
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    if isinstance(c, _RationalABC):
        f = Fraction(c.numerator, c.denominator)
        return f.numerator if f.denominator == 1 else f
    raise TypeError(f"non-rational coefficient {c!r}")


# int <-> str conversions below the interpreter's digit limit go straight
# through str/int; larger ones are split recursively on powers of ten.
_DIRECT_BITS = 12000
_DIRECT_DIGITS = 3000


def int_to_decimal(n: int) -> str:
    if n < 0:
        return "-" + int_to_decimal(-n)
    if n.bit_length() <= _DIRECT_BITS:
        return str(n)
    k = int(n.bit_length() * 0.30102999566398) // 2
    hi, lo = divmod(n, 10**k)
    return int_to_decimal(hi) + int_to_decimal(lo).rjust(k, "0")


def decimal_to_int(text: str) -> int:
    text = text.strip()
    if len(text) <= _DIRECT_DIGITS:
        return int(text)
    sign = 1
    if text[0] in "+-":
        sign = -1 if text[0] == "-" else 1
        text = text[1:]
    if not text.isdigit():
        raise ValueError(f"invalid integer literal of length {len(text)}")
    k = len(text) // 2
    return sign * (decimal_to_int(text[:-k]) * 10**k + decimal_to_int(text[-k:]))


def _coeff_text(c) -> str:
    if isinstance(c, int):
        return int_to_decimal(c)
    return f"{int_to_decimal(c.numerator)}/{int_to_decimal(c.denominator)}"


def format_rational(c) -> str:
    """Render as ``"num/den"``, including ``den == 1``."""
    f = as_rational(c)
    return f"{int_to_decimal(f.numerator)}/{int_to_decimal(f.denominator)}"


def _check_exponents(terms: Mapping[int, Coeff]) -> None:
    if terms and (min(terms) < EXP_MIN or max(terms) > EXP_MAX):
        raise OverflowError("Laurent exponent outside the signed 64-bit range")


class LaurentPoly:
    """Immutable sparse Laurent polynomial in one indeterminate ``x``.

    ``terms`` maps exponent -> nonzero coefficient. The zero polynomial has
    no terms.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | Iterable[tuple[int, object]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[int, Coeff] = {}
        for e, c in items:
            if not isinstance(e, int):
                raise TypeError(f"exponent must be an integer, got {e!r}")
            c = _norm(c)
            if e in clean:
                c = _norm(clean[e] + c)
            if c:
                clean[e] = c
            else:
                clean.pop(e, None)
        _check_exponents(clean)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[int, Coeff]) -> "LaurentPoly":
        # terms must already be canonical
        obj = object.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, c) -> "LaurentPoly":
        return cls.monomial(c, 0)

    @classmethod
    def monomial(cls, c, e: int) -> "LaurentPoly":
        c = _norm(c)
        if not c:
            return ZERO
        _check_exponents({e: c})
        return cls._raw({e: c})

    @property
    def terms(self) -> dict[int, Coeff]:
        """A copy of the exponent -> coefficient map."""
        return dict(self._terms)

    def items(self):
        """(exponent, coefficient) pairs in descending exponent order."""
        return sorted(self._terms.items(), reverse=True)

    def coeff(self, e: int) -> Coeff:
        return self._terms.get(e, 0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def min_exponent(self) -> int:
        return min(self._terms)

    def max_exponent(self) -> int:
        return max(self._terms)

    def support(self) -> list[int]:
        return sorted(self._terms, reverse=True)

    # -- ring operations ------------------------------------------------
    @staticmethod
    def _coerce(other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, _RationalABC):
            return LaurentPoly.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = _norm(s)
            else:
                out.pop(e, None)
        return LaurentPoly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw({e: -c for e, c in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._terms, other._terms
        if not a or not b:
            return ZERO
        if len(a) > len(b):
            a, b = b, a
        out: dict[int, Coeff] = {}
        get = out.get
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = ea + eb
                out[e] = get(e, 0) + ca * cb
        clean = {}
        for e, c in out.items():
            if c:
                clean[e] = _norm(c)
        _check_exponents(clean)
        return LaurentPoly._raw(clean)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            if not self.is_monomial():
                raise ValueError("negative powers are only defined for monomials")
            ((e, c),) = self._terms.items()
            return LaurentPoly.monomial(Fraction(1) / c, -e) ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by ``x**k``."""
        if k == 0:
            return self
        out = {e + k: c for e, c in self._terms.items()}
        _check_exponents(out)
        return LaurentPoly._raw(out)

    def scale(self, c) -> "LaurentPoly":
        c = _norm(c)
        if not c:
            return ZERO
        return LaurentPoly._raw({e: _norm(v * c) for e, v in self._terms.items()})

    def derivative(self) -> "LaurentPoly":
        return poly_derivative(self)

    def __call__(self, x0):
        if isinstance(x0, float):
            return poly_eval_float(self, x0)
        return poly_eval_exact(self, x0)

    # -- comparisons ----------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self._terms == other._terms
        if isinstance(other, _RationalABC):
            return self._terms == LaurentPoly.constant(other)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        return f"LaurentPoly({dict(self.items())!r})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.items():
            mag = _coeff_text(abs(c))
            sign = "-" if c < 0 else "+"
            if e == 0:
                body = str(mag)
            else:
                xpart = "x" if e == 1 else f"x^{e}" if e > 0 else f"x^({e})"
                body = xpart if mag == "1" else f"{mag}*{xpart}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    # -- serialization --------------------------------------------------
    def to_json(self) -> list:
        """``[[exponent, "num/den"], ...]`` sorted by descending exponent."""
        return [[e, format_rational(c)] for e, c in self.items()]

    @classmethod
    def from_json(cls, data) -> "LaurentPoly":
        return cls((int(e), as_rational(c)) for e, c in data)


ZERO = LaurentPoly._raw({})
ONE = LaurentPoly._raw({0: 1})
X = LaurentPoly._raw({1: 1})


def poly_arith(a: LaurentPoly, b: LaurentPoly, op: str) -> LaurentPoly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown polynomial operation {op!r}")


def poly_derivative(p: LaurentPoly) -> LaurentPoly:
    return LaurentPoly._raw(
        {e - 1: _norm(c * e) for e, c in p._terms.items() if e != 0}
    )


def poly_eval_exact(p: LaurentPoly, x0) -> Fraction:
    x0 = as_rational(x0)
    if not p._terms:
        return Fraction(0)
    if x0 == 0:
        if p.min_exponent() < 0:
            raise ZeroPoint("polynomial has negative exponents; cannot evaluate at 0")
        return Fraction(p.coeff(0))
    # clear denominators over the exponent window, divide once at the end
    lo, hi = p.min_exponent(), p.max_exponent()
    num, den = x0.numerator, x0.denominator
    span = hi - lo
    total = 0
    for e, c in p._terms.items():
        k = e - lo
        total += c * (num**k * den ** (span - k))
    return Fraction(total) / den**span * x0**lo


def poly_eval_float(p: LaurentPoly, x0: float) -> float:
    x0 = float(x0)
    if not p._terms:
        return 0.0
    if x0 == 0.0 and p.min_exponent() < 0:
        raise ZeroPoint("polynomial has negative exponents; cannot evaluate at 0")
    total = 0.0
    for e, c in p.items():
        total += float(c) * x0**e
    return total


class RationalFunction:
    """Quotient ``num/den`` of Laurent polynomials.

    Not reduced; equality is decided by cross-multiplication. Monomial
    denominators are folded into the numerator, which keeps polynomial
    sides at ``den == 1``.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = _as_poly(num)
        den = ONE if den is None else _as_poly(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if den.is_monomial() and den != ONE:
            ((e, c),) = den._terms.items()
            num = num.shift(-e).scale(Fraction(1) / c)
            den = ONE
        self.num = num
        self.den = den

    def __setattr__(self, name, value):
        if hasattr(self, "den"):
            raise AttributeError("RationalFunction is immutable")
        object.__setattr__(self, name, value)

    @staticmethod
    def _coerce(other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, (LaurentPoly, _RationalABC)):
            return RationalFunction(other)
        return NotImplemented

    def is_polynomial(self) -> bool:
        return self.den == ONE

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            if self.num.is_zero():
                raise ZeroDivisionError("negative power of the zero rational function")
            return RationalFunction(self.den**-n, self.num**-n)
        return RationalFunction(self.num**n, self.den**n)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return rf_equals(self, other)

    __hash__ = None

    def same_representation(self, other: "RationalFunction") -> bool:
        """Structural (not mathematical) equality of num and den."""
        return self.num == other.num and self.den == other.den

    def __repr__(self):
        return f"RationalFunction({self.num!r}, {self.den!r})"

    def __str__(self):
        if self.den == ONE:
            return str(self.num)
        return f"({self.num})/({self.den})"

    def evaluate(self, x0) -> Fraction:
        d = poly_eval_exact(self.den, x0)
        if d == 0:
            raise ZeroDivisionError(f"denominator vanishes at x = {x0}")
        return poly_eval_exact(self.num, x0) / d

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @classmethod
    def from_json(cls, data) -> "RationalFunction":
        return cls(LaurentPoly.from_json(data["num"]), LaurentPoly.from_json(data["den"]))


def _as_poly(value) -> LaurentPoly:
    if isinstance(value, LaurentPoly):
        return value
    if isinstance(value, _RationalABC):
        return LaurentPoly.constant(value)
    raise TypeError(f"cannot build a Laurent polynomial from {value!r}")


def rf_equals(a: RationalFunction, b: RationalFunction) -> bool:
    if a.den == b.den:
        return a.num == b.num
    return (a.num * b.den - b.num * a.den).is_zero()


class Mat2:
    """Immutable 2x2 matrix over any commutative ring with ``+ - *``
    (LaurentPoly, Fraction, int)."""

    __slots__ = ("e11", "e12", "e21", "e22")

    def __init__(self, e11, e12, e21, e22):
        object.__setattr__(self, "e11", e11)
        object.__setattr__(self, "e12", e12)
        object.__setattr__(self, "e21", e21)
        object.__setattr__(self, "e22", e22)

    def __setattr__(self, name, value):
        raise AttributeError("Mat2 is immutable")

    @classmethod
    def identity(cls, one=ONE, zero=ZERO) -> "Mat2":
        return cls(one, zero, zero, one)

    def entries(self):
        return (self.e11, self.e12, self.e21, self.e22)

    def det(self):
        return self.e11 * self.e22 - self.e12 * self.e21

    def __mul__(self, other: "Mat2") -> "Mat2":
        return mat_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, Mat2):
            return NotImplemented
        return self.entries() == other.entries()

    def __hash__(self):
        return hash(self.entries())

    def map(self, fn) -> "Mat2":
        return Mat2(*(fn(e) for e in self.entries()))

    def __repr__(self):
        return f"Mat2([[{self.e11}, {self.e12}], [{self.e21}, {self.e22}]])"


def mat_mul(a: Mat2, b: Mat2) -> Mat2:
    return Mat2(
        a.e11 * b.e11 + a.e12 * b.e21,
        a.e11 * b.e12 + a.e12 * b.e22,
        a.e21 * b.e11 + a.e22 * b.e21,
        a.e21 * b.e12 + a.e22 * b.e22,
    )


def mat_pow(m: Mat2, n: int) -> Mat2:
    """Square-and-multiply power; ``m**0`` is the identity of ``m``'s ring."""
    if n < 0:
        raise ValueError("mat_pow needs n >= 0")
    e = m.e11
    if isinstance(e, LaurentPoly):
        result = Mat2.identity()
    else:
        result = Mat2.identity(type(e)(1), type(e)(0))
    base = m
    while n:
        if n & 1:
            result = mat_mul(result, base)
        n >>= 1
        if n:
            base = mat_mul(base, base)
    return result


def companion(x0=None) -> Mat2:
    """The Oresme companion matrix [[1, -1/x^2], [1, 0]].

    With ``x0`` given, entries are exact rationals at ``x = x0``.
    """
    if x0 is None:
        return Mat2(ONE, LaurentPoly.monomial(-1, -2), ONE, ZERO)
    x0 = as_rational(x0)
    if x0 == 0:
        raise ZeroPoint("companion matrix undefined at x = 0")
    return Mat2(Fraction(1), -1 / x0**2, Fraction(1), Fraction(0))
