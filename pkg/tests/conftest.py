from fractions import Fraction

import pytest

from sparselab import GridFunction, LatticeInterval, Weight


def rel_err(a, b) -> float:
    a, b = float(a), float(b)
    return abs(a - b) / max(abs(b), 1e-300)


@pytest.fixture
def root3():
    return LatticeInterval(Fraction(0), 0, 0, 3)


def ones_weight(L: int) -> Weight:
    return Weight(GridFunction(L, [1] * (3 << L), 1))


def indicator(L: int, lo: Fraction, hi: Fraction, scale=1) -> GridFunction:
    """scale·1_{[lo,hi)} as a grid function (endpoints on the cell lattice)."""
    n = 3 << L
    lo, hi = Fraction(lo), Fraction(hi)
    a, b = lo * n, hi * n
    if a.denominator != 1 or b.denominator != 1:
        raise ValueError("endpoints must sit on the cell lattice")
    scale = Fraction(scale)
    nums = [scale.numerator if a <= i < b else 0 for i in range(n)]
    return GridFunction(L, nums, scale.denominator)
