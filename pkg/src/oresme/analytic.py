"""Binary64 tooling: characteristic roots, Binet and hyperbolic evaluation,
ratio-limit probes and the cosine-root product reconstruction."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import ZeroPoint, as_rational
from .identities import DomainError
from .sequences import oresme_eval, oresme_poly

TAIL = 20
TAIL_SPREAD = 1e-3
# claimed limit of |O_{n+1}/O_n| at x = +-2
REMARK_CLAIM = 1.0


@dataclass(frozen=True)
class RootPair:
    lambda1: float
    lambda2: float
    x: float


def lambda_roots(x: float) -> RootPair:
    """Roots (x +- sqrt(x^2-4)) / (2x) of t^2 - t + 1/x^2, larger first."""
    x = float(x)
    if x * x <= 4.0:
        raise DomainError(f"real roots need x^2 > 4, got x = {x!r}")
    s = math.sqrt(x * x - 4.0)
    a = (x + s) / (2.0 * x)
    b = (x - s) / (2.0 * x)
    hi, lo = (a, b) if a >= b else (b, a)
    # the smaller root by Vieta avoids cancellation for large |x|
    lo = 1.0 / (x * x * hi)
    return RootPair(hi, lo, x)


def binet_float(n: int, x: float) -> float:
    """(l1^n - l2^n) / sqrt(x^2 - 4), any integer n."""
    x = float(x)
    if x * x <= 4.0:
        raise DomainError(f"Binet form needs x^2 > 4, got x = {x!r}")
    if x < 0:
        # O_n is odd in x
        return -binet_float(n, -x)
    r = lambda_roots(x)
    return (r.lambda1**n - r.lambda2**n) / math.sqrt(x * x - 4.0)


def hyperbolic_eval(n: int, x: float) -> float:
    """x^-n sinh(nz)/sinh(z) with cosh z = x/2."""
    x = float(x)
    if x <= 2.0:
        raise DomainError(f"hyperbolic form needs x > 2, got x = {x!r}")
    if n < 1:
        raise ValueError("hyperbolic_eval needs n >= 1")
    z = math.acosh(x / 2.0)
    # sinh(nz)/sinh(z) = e^{(n-1)z} (1 - e^{-2nz}) / (1 - e^{-2z}); avoids overflow
    ratio = math.exp((n - 1) * z) * (-math.expm1(-2 * n * z)) / (-math.expm1(-2 * z))
    return ratio / x**n


# -- ratio limit ---------------------------------------------------------------

@dataclass
class ConvergenceTrace:
    x: float
    steps: list[tuple[int, float | None, float | None]] = field(default_factory=list)
    verdict: str = "converged"
    limit: float | None = None
    observed_limit: float | None = None
    burn_in: int | None = None
    remark_discrepancy: bool = False
    exact: bool = False

    def errors(self) -> dict[int, float]:
        return {n: e for n, _, e in self.steps if e is not None}

    def to_json(self) -> dict:
        def fmt(v):
            return None if v is None else format(v, ".17g")

        return {
            "x": fmt(self.x),
            "exact": self.exact,
            "verdict": self.verdict,
            "limit": fmt(self.limit),
            "observed_limit": fmt(self.observed_limit),
            "burn_in": self.burn_in,
            "remark_discrepancy": self.remark_discrepancy,
            "steps": [{"n": n, "ratio": fmt(r), "error": fmt(e)} for n, r, e in self.steps],
        }


def _exact_ratio_error(r: Fraction, x: Fraction) -> float:
    # r - l1 with l1 = (x + sqrt(b)) / (2x), b = x^2 - 4, rewritten as
    # (u^2 - b) / (2x (u + sqrt b)), u = 2xr - x, to avoid cancellation
    b = x * x - 4
    u = 2 * x * r - x
    den = 2 * float(x) * (float(u) + math.sqrt(float(b)))
    if den == 0.0:
        return abs(float(r) - lambda_roots(float(x)).lambda1)
    return abs(float(u * u - b) / den)


def _is_oscillating(ratios: list[float | None]) -> bool:
    tail = ratios[-TAIL:]
    if len(tail) < TAIL or any(r is None or not math.isfinite(r) for r in tail):
        return True
    if any((a < 0) != (b < 0) for a, b in zip(tail, tail[1:])):
        return True
    return max(tail) - min(tail) > TAIL_SPREAD


def _burn_in(errors: list[tuple[int, float]]) -> int | None:
    if not errors:
        return None
    idx = len(errors) - 1
    while idx > 0 and errors[idx - 1][1] >= errors[idx][1]:
        idx -= 1
    return errors[idx][0]


def ratio_limit_probe(x, max_steps: int = 60) -> ConvergenceTrace:
    """Trace O_{n+1}(x)/O_n(x) for n = 1..max_steps.

    Rational ``x`` (int, Fraction, ``"p/q"``) uses exact values; floats use
    the float recurrence. Verdict: ``converged`` for |x| > 2, ``degenerate``
    at x = +-2 (observed limit by Richardson extrapolation, compared with
    the claimed magnitude 1); for |x| < 2 ``oscillating`` when the last 20
    ratios contain a sign change, an undefined ratio or spread above 1e-3.
    """
    exact = not isinstance(x, float)
    if exact:
        xq = as_rational(x)
        xf = float(xq)
    else:
        xq = None
        xf = x
    if xf == 0:
        raise ZeroPoint("ratio probe undefined at x = 0")
    if max_steps < 1:
        raise ValueError("max_steps must be positive")

    if exact:
        values = [oresme_eval(n, xq) for n in range(max_steps + 2)]
    else:
        values = [0.0, 1.0 / xf]
        inv2 = 1.0 / (xf * xf)
        for _ in range(max_steps):
            values.append(values[-1] - inv2 * values[-2])

    region_real = xf * xf > 4.0
    lam = lambda_roots(abs(xf)).lambda1 if region_real else None
    trace = ConvergenceTrace(x=xf, exact=exact, limit=lam)
    ratios: list[float | None] = []
    errors: list[tuple[int, float]] = []
    for n in range(1, max_steps + 1):
        num, den = values[n + 1], values[n]
        if den == 0:
            ratios.append(None)
            trace.steps.append((n, None, None))
            continue
        ratio = num / den
        rf = float(ratio)
        err = None
        if lam is not None:
            if exact:
                err = _exact_ratio_error(ratio, abs(xq))
            else:
                err = abs(rf - lam)
            errors.append((n, err))
        ratios.append(rf)
        trace.steps.append((n, rf, err))

    if xf * xf == 4.0:
        trace.verdict = "degenerate"
    elif region_real:
        trace.verdict = "converged"
        trace.burn_in = _burn_in(errors)
    elif _is_oscillating(ratios):
        trace.verdict = "oscillating"
    else:
        trace.verdict = "converged"

    last = [r for r in ratios[-2:] if r is not None]
    if trace.verdict == "degenerate" and len(last) == 2 and max_steps >= 2:
        # ratios behave like L + c/n; eliminate the 1/n term
        n = max_steps
        trace.observed_limit = n * last[1] - (n - 1) * last[0]
        trace.remark_discrepancy = abs(abs(trace.observed_limit) - REMARK_CLAIM) > 1e-6
    elif trace.verdict == "converged" and ratios:
        trace.observed_limit = ratios[-1]
    return trace


# -- product formula -------------------------------------------------------------

def product_roots(n: int) -> list[float]:
    """2 cos(k pi / n) for k = 1..n-1, ascending."""
    if n < 1:
        raise ValueError("product_roots needs n >= 1")
    return sorted(2.0 * math.cos(k * math.pi / n) for k in range(1, n))


def exact_scaled_coefficients(n: int) -> list[int]:
    """Coefficients of x^n O_n(x), highest degree (n-1) first."""
    poly = oresme_poly(n).shift(n)
    deg = n - 1
    return [int(poly.coeff(d)) for d in range(deg, -1, -1)]


@dataclass
class ReconstructionReport:
    n: int
    tol: float
    roots: list[float]
    coefficients: list[float]
    exact: list[int]
    max_error: float

    @property
    def passed(self) -> bool:
        return self.max_error < self.tol

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "tol": format(self.tol, ".17g"),
            "passed": self.passed,
            "max_error": format(self.max_error, ".17g"),
            "roots": [format(r, ".17g") for r in self.roots],
            "coefficients": [format(c, ".17g") for c in self.coefficients],
            "exact": [str(c) for c in self.exact],
        }


def product_reconstruct(n: int, tol: float = 1e-8) -> ReconstructionReport:
    """Expand prod (x - r) over the cosine roots (ascending order) in binary64
    and compare with the exact coefficients of x^n O_n(x)."""
    roots = product_roots(n)
    coeffs = [1.0]  # highest degree first
    for r in roots:
        nxt = coeffs + [0.0]
        for i, c in enumerate(coeffs):
            nxt[i + 1] -= r * c
        coeffs = nxt
    exact = exact_scaled_coefficients(n)
    err = max(abs(a - b) for a, b in zip(coeffs, exact))
    return ReconstructionReport(n, tol, roots, coeffs, exact, err)
