"""Integer parameter sweeps: inclusive ranges, Cartesian products, constraint
filters, lexicographic enumeration."""
from __future__ import annotations

import operator
from dataclasses import dataclass, field


class InvalidSweep(ValueError):
    pass


@dataclass(frozen=True)
class Affine:
    """``floor((const + sum coeff*var) / divisor)`` with integer data.

    ``divisor`` is 1 for plain affine forms; the DSL uses it for floor
    division in summation bounds.
    """

    coeffs: tuple[tuple[str, int], ...] = ()
    const: int = 0
    divisor: int = 1

    @classmethod
    def of(cls, const: int = 0, divisor: int = 1, **coeffs: int) -> "Affine":
        return cls.make(coeffs, const, divisor)

    @classmethod
    def make(cls, coeffs: dict, const: int = 0, divisor: int = 1) -> "Affine":
        if divisor <= 0:
            raise ValueError("divisor must be positive")
        items = tuple(sorted((k, v) for k, v in coeffs.items() if v))
        return cls(items, const, divisor)

    @classmethod
    def var(cls, name: str) -> "Affine":
        return cls(((name, 1),), 0, 1)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.coeffs)

    def is_constant(self) -> bool:
        return not self.coeffs

    def __call__(self, env) -> int:
        total = self.const
        for name, c in self.coeffs:
            total += c * env[name]
        return total // self.divisor

    evaluate = __call__

    def _linear(self):
        if self.divisor != 1:
            raise ValueError("floor-divided forms do not support linear arithmetic")
        return dict(self.coeffs), self.const

    def __add__(self, other: "Affine") -> "Affine":
        a, ca = self._linear()
        b, cb = other._linear()
        out = dict(a)
        for k, v in b.items():
            out[k] = out.get(k, 0) + v
        return Affine.make(out, ca + cb)

    def __neg__(self) -> "Affine":
        a, c = self._linear()
        return Affine.make({k: -v for k, v in a.items()}, -c)

    def __sub__(self, other: "Affine") -> "Affine":
        return self + (-other)

    def scale(self, k: int) -> "Affine":
        a, c = self._linear()
        return Affine.make({n: v * k for n, v in a.items()}, c * k)

    def __str__(self) -> str:
        parts = []
        for name, c in self.coeffs:
            if c == 1:
                parts.append(("+", name))
            elif c == -1:
                parts.append(("-", name))
            else:
                parts.append(("-" if c < 0 else "+", f"{abs(c)}*{name}"))
        if self.const or not parts:
            parts.append(("-" if self.const < 0 else "+", str(abs(self.const))))
        sign, first = parts[0]
        text = ("-" if sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f"{sign}{body}"
        if self.divisor != 1:
            return f"({text})//{self.divisor}"
        return text


_OPS = {
    ">=": operator.ge,
    "<=": operator.le,
    ">": operator.gt,
    "<": operator.lt,
    "==": operator.eq,
    "!=": operator.ne,
}


@dataclass(frozen=True)
class Constraint:
    lhs: Affine
    op: str
    rhs: Affine

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValueError(f"unknown comparison {self.op!r}")

    @property
    def variables(self) -> set[str]:
        return set(self.lhs.variables) | set(self.rhs.variables)

    def holds(self, env) -> bool:
        return _OPS[self.op](self.lhs(env), self.rhs(env))

    def __str__(self):
        return f"{self.lhs}{self.op}{self.rhs}"


@dataclass(frozen=True)
class Sweep:
    """Inclusive integer ranges per variable plus filtering constraints.

    Enumeration order is lexicographic in the declared variable order.
    """

    ranges: tuple[tuple[str, int, int], ...]
    constraints: tuple[Constraint, ...] = field(default=())

    @classmethod
    def of(cls, *constraints: Constraint, **ranges: tuple[int, int]) -> "Sweep":
        return cls(tuple((k, lo, hi) for k, (lo, hi) in ranges.items()), tuple(constraints))

    def __post_init__(self):
        names = [r[0] for r in self.ranges]
        if len(set(names)) != len(names):
            raise InvalidSweep(f"duplicate sweep variable in {names}")
        for c in self.constraints:
            unknown = c.variables - set(names)
            if unknown:
                raise InvalidSweep(f"constraint {c} uses undeclared {sorted(unknown)}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r[0] for r in self.ranges)

    def with_ranges(self, overrides: dict[str, tuple[int, int]]) -> "Sweep":
        unknown = set(overrides) - set(self.names)
        if unknown:
            raise InvalidSweep(f"cannot override unknown variables {sorted(unknown)}")
        ranges = tuple(
            (k, *overrides[k]) if k in overrides else (k, lo, hi) for k, lo, hi in self.ranges
        )
        return Sweep(ranges, self.constraints)

    def describe(self) -> str:
        parts = [f"{k}={lo}..{hi}" for k, lo, hi in self.ranges]
        parts += [str(c) for c in self.constraints]
        return ", ".join(parts)

    __str__ = describe

    def assignments(self):
        """Yield parameter tuples (in ``names`` order) passing every constraint.

        Each constraint is tested as soon as all its variables are bound.
        """
        names = self.names
        depth_checks: list[list[Constraint]] = [[] for _ in names]
        for c in self.constraints:
            last = max((names.index(v) for v in c.variables), default=0)
            depth_checks[last].append(c)
        env: dict[str, int] = {}
        values: list[int] = []

        def rec(i):
            if i == len(names):
                yield tuple(values)
                return
            name, lo, hi = self.ranges[i]
            checks = depth_checks[i]
            for v in range(lo, hi + 1):
                env[name] = v
                if all(c.holds(env) for c in checks):
                    values.append(v)
                    yield from rec(i + 1)
                    values.pop()
            env.pop(name, None)

        if not names:
            if all(c.holds({}) for c in self.constraints):
                yield ()
            return
        yield from rec(0)


def parse_range_override(text: str) -> tuple[str, tuple[int, int]]:
    """``"n=0..5"`` -> ``("n", (0, 5))``."""
    try:
        name, span = text.split("=", 1)
        lo, hi = span.split("..", 1)
        return name.strip(), (int(lo), int(hi))
    except ValueError as exc:
        raise InvalidSweep(f"bad range override {text!r}; expected NAME=LO..HI") from exc
