"""Exact rational comparison helpers.

Everything downstream keeps quantities as `fractions.Fraction` for as long as
possible.  The one wrinkle is comparisons against *rational powers* of
rationals, e.g. ``x <= y^(3/4)``: both sides are irrational in general, but
for x, y >= 0 the comparison is equivalent to ``x^4 <= y^3`` and can be
settled with integer arithmetic.  `compare_power_product` implements the
general form ``lhs  vs  prod_i x_i^{p_i}`` this way.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

Rat = Union[int, Fraction]
Real = Union[int, float, Fraction]

INF = float("inf")


def frac(x: Real | str) -> Fraction:
    """Coerce to Fraction. Floats convert exactly (binary value, not a guess)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"cannot represent {x!r} as a rational")
        return Fraction(*x.as_integer_ratio())
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not a rational-like value: {x!r}")


def fmt(x: Real) -> str:
    """Serialize a number for reports: rationals as 'num/den', floats as repr."""
    if isinstance(x, (int, Fraction)):
        f = Fraction(x)
        return f"{f.numerator}/{f.denominator}"
    return repr(float(x))


def parse_number(s: str) -> Real:
    """Inverse of `fmt`: 'num/den' -> Fraction, anything else -> float."""
    if "/" in s:
        return Fraction(s)
    return float(s)


def is_exact(x: Real) -> bool:
    return isinstance(x, (int, Fraction))


def compare_power_product(lhs: Rat, factors: Sequence[tuple[Rat, Rat]]) -> int:
    """Sign of ``lhs - prod_i x_i^(p_i)`` for lhs, x_i >= 0 and rational p_i.

    Returns -1, 0, or +1.  Exact: with D the lcm of the exponent
    denominators, the comparison is raised to the D-th power, where every
    exponent becomes an integer.  Negative integer exponents are moved to the
    other side, so only nonnegative integer powers are ever formed.
    """
    lhs = Fraction(lhs)
    if lhs < 0:
        raise ValueError("compare_power_product needs lhs >= 0")
    terms = []
    denom_lcm = 1
    for x, p in factors:
        x, p = Fraction(x), Fraction(p)
        if x < 0:
            raise ValueError("compare_power_product needs factors >= 0")
        if p == 0 or x == 1:
            continue
        terms.append((x, p))
        denom_lcm = denom_lcm * p.denominator // math.gcd(denom_lcm, p.denominator)

    left = lhs**denom_lcm
    right = Fraction(1)
    for x, p in terms:
        e = int(p * denom_lcm)
        if x == 0:
            if e > 0:
                right = Fraction(0)
                break
            raise ZeroDivisionError("0 raised to a negative power")
        if e >= 0:
            right *= x**e
        else:
            left *= x ** (-e)
    if left < right:
        return -1
    if left > right:
        return 1
    return 0


def le_power_product(lhs: Rat, factors: Sequence[tuple[Rat, Rat]]) -> bool:
    """Exact test of ``lhs <= prod_i x_i^(p_i)``."""
    return compare_power_product(lhs, factors) <= 0


def lt_power_product(lhs: Rat, factors: Sequence[tuple[Rat, Rat]]) -> bool:
    """Exact test of ``lhs < prod_i x_i^(p_i)``."""
    return compare_power_product(lhs, factors) < 0


def le_with_tol(lhs: Real, rhs: Real, tol: float = 0.0) -> bool:
    """lhs <= rhs·(1+tol), exact when both sides are rational and tol == 0."""
    if tol == 0.0 and is_exact(lhs) and is_exact(rhs):
        return Fraction(lhs) <= Fraction(rhs)
    lhs_f, rhs_f = float(lhs), float(rhs)
    return lhs_f <= rhs_f * (1.0 + tol) + 1e-300


def conjugate(t: Real) -> Real:
    """Hölder conjugate t' with 1/t + 1/t' = 1; conjugate(1) = inf."""
    if t == 1:
        return INF
    if t == INF:
        return 1 if not isinstance(t, Fraction) else Fraction(1)
    if isinstance(t, (int, Fraction)):
        t = Fraction(t)
        return t / (t - 1)
    return t / (t - 1.0)


def lcm_all(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out
