"""Step functions on the cell lattice: averages, norms, Kolmogorov bounds.

A `GridFunction` is a nonnegative piecewise-constant function on [0, 1) at
resolution L, held exactly as integer numerators over one common denominator.
Signs never matter in any downstream formula, so nonnegativity is baked in.

Two distinct weighted-norm conventions appear in the source material and they
do *not* coincide for p != 1, so every weighted call site says which one it
means (`NormConvention`): the multiplier form ||f·w||_p versus the measure
form (∫ f^p w dx)^{1/p}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ._rat import INF, frac, fmt, is_exact
from .errors import MalformedInputError, ParameterError
from .lattice import LatticeInterval
from .reports import CheckReport

__all__ = [
    "GridFunction",
    "MeasureSpec",
    "NormConvention",
    "average",
    "weighted_norm",
    "weak_norm",
    "kolmogorov_check",
    "kolmogorov_subset",
    "cellset",
]


def cellset(indices: Iterable[int]) -> np.ndarray:
    """Normalize a cell set to a sorted, duplicate-free int array."""
    return np.unique(np.asarray(list(indices), dtype=np.int64))


class GridFunction:
    """Nonnegative step function with exact rational cell values.

    Stored as ``values[i] = nums[i] / den`` with Python-int numerators, so no
    quantity here ever rounds.  Float mirrors (`floats`) are derived views
    used by vectorized pre-selection and by checks whose exponents are
    irrational anyway.
    """

    __slots__ = ("L", "n", "nums", "den", "_floats", "_prefix")

    def __init__(self, L: int, nums: Sequence[int], den: int = 1):
        if den <= 0:
            raise ValueError("denominator must be positive")
        n = 3 << L
        if len(nums) != n:
            raise ValueError(f"need {n} cell values at resolution L={L}, got {len(nums)}")
        nums = [int(v) for v in nums]
        if any(v < 0 for v in nums):
            raise ValueError("grid functions are nonnegative")
        g = math.gcd(den, math.gcd(*nums) if nums else den)
        if g > 1:
            nums = [v // g for v in nums]
            den //= g
        self.L = L
        self.n = n
        self.nums = nums
        self.den = den
        self._floats: np.ndarray | None = None
        self._prefix: list[int] | None = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_fractions(cls, L: int, values: Sequence[Fraction | int | float]) -> "GridFunction":
        vals = [frac(v) for v in values]
        den = 1
        for v in vals:
            den = den * v.denominator // math.gcd(den, v.denominator)
        return cls(L, [int(v * den) for v in vals], den)

    @classmethod
    def constant(cls, L: int, value: Fraction | int | float = 1) -> "GridFunction":
        v = frac(value)
        return cls(L, [v.numerator] * (3 << L), v.denominator)

    # -- views -------------------------------------------------------------

    def frac(self, i: int) -> Fraction:
        return Fraction(self.nums[i], self.den)

    def fractions(self) -> list[Fraction]:
        return [Fraction(v, self.den) for v in self.nums]

    @property
    def floats(self) -> np.ndarray:
        if self._floats is None:
            self._floats = np.array([float(v) for v in self.nums]) / float(self.den)
        return self._floats

    @property
    def prefix(self) -> list[int]:
        """Exact numerator prefix sums: prefix[b] - prefix[a] = Σ nums[a:b]."""
        if self._prefix is None:
            acc = 0
            out = [0] * (self.n + 1)
            for i, v in enumerate(self.nums):
                acc += v
                out[i + 1] = acc
            self._prefix = out
        return self._prefix

    # -- exact arithmetic --------------------------------------------------

    def range_sum(self, a: int, b: int) -> Fraction:
        """Σ of cell values over cells a..b-1 (not yet scaled by cell width)."""
        p = self.prefix
        return Fraction(p[b] - p[a], self.den)

    def integral(self, Q: LatticeInterval | None = None) -> Fraction:
        """∫_Q f dx (whole domain when Q is None)."""
        a, b = (0, self.n) if Q is None else (Q.start_index, Q.end_index)
        return self.range_sum(a, b) / self.n

    def integral_cells(self, cells: np.ndarray | Sequence[int]) -> Fraction:
        """∫ over a cell set; exact."""
        total = sum(self.nums[int(i)] for i in cells)
        return Fraction(total, self.den * self.n)

    def avg(self, Q: LatticeInterval) -> Fraction:
        """⟨f⟩_{1,Q}, exact."""
        p = self.prefix
        return Fraction(
            p[Q.end_index] - p[Q.start_index], self.den * (Q.end_index - Q.start_index)
        )

    def max_on(self, Q: LatticeInterval | None = None) -> Fraction:
        a, b = (0, self.n) if Q is None else (Q.start_index, Q.end_index)
        return Fraction(max(self.nums[a:b]), self.den)

    def min_on(self, Q: LatticeInterval | None = None) -> Fraction:
        a, b = (0, self.n) if Q is None else (Q.start_index, Q.end_index)
        return Fraction(min(self.nums[a:b]), self.den)

    def power(self, r: int) -> "GridFunction":
        """f^r for integer r >= 1, exact."""
        if r == 1:
            return self
        return GridFunction(self.L, [v**r for v in self.nums], self.den**r)

    def reciprocal(self) -> "GridFunction":
        """1/f, exact; requires strictly positive values."""
        if min(self.nums) == 0:
            raise ParameterError("reciprocal needs a strictly positive function")
        den = math.lcm(*self.nums) if len(set(self.nums)) > 1 else self.nums[0]
        return GridFunction(self.L, [self.den * (den // v) for v in self.nums], den)

    def scaled(self, c: Fraction | int) -> "GridFunction":
        c = frac(c)
        if c < 0:
            raise ValueError("scaling must keep nonnegativity")
        return GridFunction(
            self.L, [v * c.numerator for v in self.nums], self.den * c.denominator
        )

    def __mul__(self, other: "GridFunction") -> "GridFunction":
        if not isinstance(other, GridFunction) or other.L != self.L:
            return NotImplemented
        return GridFunction(
            self.L,
            [a * b for a, b in zip(self.nums, other.nums)],
            self.den * other.den,
        )

    def pointwise_pow_float(self, e: float) -> np.ndarray:
        """Float mirror of f^e (used when e is irrational)."""
        with np.errstate(divide="ignore"):
            out = self.floats**e
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self.L == other.L and self.den == other.den and self.nums == other.nums

    def __hash__(self):
        return hash((self.L, self.den, tuple(self.nums[:16]), len(self.nums)))

    def __repr__(self) -> str:
        lo, hi = min(self.nums), max(self.nums)
        return (
            f"GridFunction(L={self.L}, range [{Fraction(lo, self.den)},"
            f" {Fraction(hi, self.den)}])"
        )

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {"L": self.L, "values": [fmt(Fraction(v, self.den)) for v in self.nums]}

    @classmethod
    def from_json(cls, obj: dict) -> "GridFunction":
        try:
            return cls.from_fractions(
                int(obj["L"]), [Fraction(s) for s in obj["values"]]
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise MalformedInputError(f"bad grid-function payload: {exc}") from exc


class NormConvention(Enum):
    """How a weight enters a norm: as a multiplier of f, or as the measure."""

    MULTIPLIER = "multiplier"
    MEASURE = "measure"


@dataclass(frozen=True)
class MeasureSpec:
    """Lebesgue measure, or w dx for a positive density w."""

    density: GridFunction | None = None  # None -> Lebesgue

    @property
    def is_lebesgue(self) -> bool:
        return self.density is None

    def cell_mass(self, i: int, L: int, n: int) -> Fraction:
        if self.density is None:
            return Fraction(1, n)
        return Fraction(self.density.nums[i], self.density.den * n)

    def masses(self, L: int) -> list[Fraction]:
        n = 3 << L
        if self.density is None:
            return [Fraction(1, n)] * n
        d = self.density
        return [Fraction(v, d.den * n) for v in d.nums]

    def masses_float(self, L: int) -> np.ndarray:
        n = 3 << L
        if self.density is None:
            return np.full(n, 1.0 / n)
        return self.density.floats / n

    def measure_cells(self, cells: np.ndarray | Sequence[int], L: int) -> Fraction:
        n = 3 << L
        if self.density is None:
            return Fraction(len(cells), n)
        return self.density.integral_cells(cells)


def _check_p(p) -> None:
    if not (p == INF or float(p) > 0):
        raise ParameterError(f"exponent p must be positive, got {p!r}")


def average(f: GridFunction, p, Q: LatticeInterval):
    """$L^p$-average ⟨f⟩_{p,Q} = (|Q|^{-1} ∫_Q f^p)^{1/p}; max for p = ∞.

    Exact Fraction for p = 1 and p = ∞, float otherwise.
    """
    _check_p(p)
    if p == INF:
        return f.max_on(Q)
    if p == 1:
        return f.avg(Q)
    pf = float(p)
    vals = f.floats[Q.start_index : Q.end_index]
    return float(np.mean(vals**pf) ** (1.0 / pf))


def weighted_norm(f: GridFunction, p, w: GridFunction, conv: NormConvention):
    """||f||_{L^p} with weight w in the stated convention.

    multiplier: (∫ (f·w)^p dx)^{1/p};  measure: (∫ f^p · w dx)^{1/p}.
    The two agree at p = 1, where the result is exact.
    """
    _check_p(p)
    if p == INF:
        raise ParameterError("weighted_norm is for finite p")
    if p == 1:
        return (f * w).integral()
    pf = float(p)
    if conv is NormConvention.MULTIPLIER:
        total = np.mean((f.floats * w.floats) ** pf)
    else:
        total = np.mean(f.floats**pf * w.floats)
    return float(total ** (1.0 / pf))


def _level_pairs(values, masses):
    """(value, cumulative mass of {g >= value}) over distinct values, desc."""
    by_value: dict = {}
    for v, m in zip(values, masses):
        if v == 0:
            continue
        by_value[v] = by_value.get(v, 0) + m
    out = []
    acc = 0
    for v in sorted(by_value, reverse=True):
        acc = acc + by_value[v]
        out.append((v, acc))
    return out


def weak_norm(
    f: GridFunction,
    p,
    mu: MeasureSpec = MeasureSpec(),
    conv: NormConvention = NormConvention.MEASURE,
    u: GridFunction | None = None,
):
    """Weak L^p norm sup_λ λ·μ({g > λ})^{1/p} of a step function.

    conv MEASURE: g = f·u with level sets measured by μ; conv MULTIPLIER:
    g = f·u·w with Lebesgue measure (μ must then carry the density w).  For a
    step function the sup over λ is attained as λ approaches a cell value from
    below, so it equals max over distinct values v of v·μ({g ≥ v})^{1/p} —
    evaluated over exactly that finite breakpoint set.  Exact for p = 1.
    """
    _check_p(p)
    g = f if u is None else f * u
    if conv is NormConvention.MULTIPLIER:
        if mu.is_lebesgue:
            raise ParameterError("multiplier convention needs a weighted measure")
        g = g * mu.density
        masses = [Fraction(1, g.n)] * g.n
    else:
        masses = mu.masses(g.L)

    pairs = _level_pairs(g.fractions(), masses)
    if not pairs:
        return Fraction(0) if p == 1 else 0.0
    if p == 1:
        return max(v * m for v, m in pairs)
    pf = float(p)
    return float(max(float(v) * float(m) ** (1.0 / pf) for v, m in pairs))


def kolmogorov_check(
    f: GridFunction,
    mu: MeasureSpec,
    E: np.ndarray,
    p,
    theta,
    tol: float = 1e-9,
) -> CheckReport:
    """∫_E f^θ dμ  ≤  (p/θ)'·||f||^θ_{L^{p,∞}(μ)}·μ(E)^{1-θ/p}  for 0 < θ < p."""
    p, theta = float(p), float(theta)
    if not 0 < theta < p:
        raise ParameterError(f"need 0 < theta < p, got theta={theta}, p={p}")
    E = cellset(E)
    masses = mu.masses_float(f.L)
    lhs = float(np.sum(f.floats[E] ** theta * masses[E]))
    w_norm = float(weak_norm(f, p, mu))
    mu_e = float(mu.measure_cells(E, f.L))
    const = p / (p - theta)  # (p/θ)'
    rhs = const * w_norm**theta * mu_e ** (1.0 - theta / p)
    return CheckReport(
        name="kolmogorov",
        lhs=lhs,
        rhs=rhs,
        constant=const,
        passed=lhs <= rhs * (1.0 + tol),
    )


@dataclass
class KolmogorovSubsetReport:
    gamma: object
    measure_check: CheckReport
    forward: CheckReport
    converse: CheckReport

    @property
    def passed(self) -> bool:
        return self.measure_check.passed and self.forward.passed and self.converse.passed

    def to_json(self) -> dict:
        return {
            "gamma": fmt(self.gamma) if is_exact(self.gamma) else float(self.gamma),
            "measure_check": self.measure_check.to_json(),
            "forward": self.forward.to_json(),
            "converse": self.converse.to_json(),
            "pass": self.passed,
        }


def _good_subset(f, mu, E, p):
    """The proof's subset: drop from E where f exceeds γ = (2/μ(E))^{1/p}·||f||_w."""
    w_norm = weak_norm(f, p, mu)
    mu_e = mu.measure_cells(E, f.L)
    if p == 1:
        gamma = 2 / mu_e * w_norm
        keep = [int(i) for i in E if f.frac(int(i)) <= gamma]
    else:
        gamma = float(2.0 / float(mu_e)) ** (1.0 / float(p)) * float(w_norm)
        keep = [int(i) for i in E if f.floats[int(i)] <= gamma]
    return gamma, cellset(keep), w_norm, mu_e


def kolmogorov_subset(
    f: GridFunction,
    mu: MeasureSpec,
    E: np.ndarray,
    p,
    q,
    tol: float = 1e-9,
) -> tuple[np.ndarray, KolmogorovSubsetReport]:
    """Two-sided Kolmogorov bound via an explicit half-measure subset.

    Forward: E' = E \\ {f > γ} with γ = (2/μ(E))^{1/p}·||f||_{L^{p,∞}(μ)}
    satisfies μ(E') ≥ μ(E)/2 and ∫_{E'} f^q dμ ≤ 2^{q/p} μ(E)^{1-q/p} ||f||^q.
    Converse: with C measured as the best normalized integral over the level
    sets {f ≥ v} (each with its own constructed subset), the weak norm is
    dominated by 2^{1/q}·C^{1/q}.
    """
    if float(p) <= 0 or float(q) <= 0:
        raise ParameterError("need p, q > 0")
    E = cellset(E)
    mu_e_frac = mu.measure_cells(E, f.L)
    if mu_e_frac <= 0:
        raise ParameterError("kolmogorov_subset needs μ(E) > 0")

    gamma, e_prime, w_norm, mu_e = _good_subset(f, mu, E, p)
    mu_ep = mu.measure_cells(e_prime, f.L)
    measure_check = CheckReport(
        name="half-measure",
        lhs=mu_e / 2 if is_exact(mu_e) else float(mu_e) / 2,
        rhs=mu_ep,
        constant=Fraction(1, 2),
        passed=mu_ep >= mu_e / 2,
    )

    p_f, q_f = float(p), float(q)
    masses = mu.masses_float(f.L)

    def q_integral(cells: np.ndarray) -> float:
        if len(cells) == 0:
            return 0.0
        return float(np.sum(f.floats[cells] ** q_f * masses[cells]))

    lhs_fwd = q_integral(e_prime)
    rhs_fwd = 2.0 ** (q_f / p_f) * float(mu_e) ** (1.0 - q_f / p_f) * float(w_norm) ** q_f
    forward = CheckReport(
        name="subset-bound",
        lhs=lhs_fwd,
        rhs=rhs_fwd,
        constant=2.0 ** (q_f / p_f),
        passed=lhs_fwd <= rhs_fwd * (1.0 + tol),
    )

    # Converse: measure C over the level-set family and reconstruct the
    # weak norm from it.
    c_best = 0.0
    for v in sorted(set(f.fractions()), reverse=True):
        if v == 0:
            continue
        level = cellset([i for i in range(f.n) if f.frac(i) >= v])
        m_level = mu.measure_cells(level, f.L)
        if m_level == 0:
            continue
        _, level_sub, _, _ = _good_subset(f, mu, level, p)
        c_here = q_integral(level_sub) / float(m_level) ** (1.0 - q_f / p_f)
        c_best = max(c_best, c_here)
    recon = 2.0 ** (1.0 / q_f) * c_best ** (1.0 / q_f)
    converse = CheckReport(
        name="weak-from-subsets",
        lhs=float(w_norm),
        rhs=recon,
        constant=2.0 ** (1.0 / q_f),
        passed=float(w_norm) <= recon * (1.0 + tol),
    )
    return e_prime, KolmogorovSubsetReport(gamma, measure_check, forward, converse)
