"""Weights, their characteristic constants, and the limited-range rescaling.

A weight is a strictly positive `GridFunction`.  Every characteristic here is
a supremum over one of two finite interval families:

* ``dyadic-three-grids`` — every in-domain interval of the three shifted
  dyadic grids; this is what the step-by-step proof pipelines consume.
* ``all-lattice-intervals`` — every ``[a, b)`` with lattice endpoints; for
  step functions this family realizes the full supremum over intervals.

The flatness constant ([w]_1-type products) is computed in exact integer
arithmetic: with cell numerators over a common denominator, the product
⟨w⟩_{1,Q}·max_Q(1/w) equals S/(len·min), denominator-free.  The maximal-
average constant (`fw_constant`) is likewise exact in both operator modes.
Mixed-exponent characteristics (`aprs_constant`) involve irrational powers
and are computed in floats under the usual 1e-9 relative-tolerance policy.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property

import numpy as np

from ._rat import INF, frac
from .errors import GenerationError, ParameterError
from .gridfn import GridFunction, MeasureSpec
from .lattice import SHIFTS, CellSpan, LatticeInterval, k_range

__all__ = [
    "Family",
    "Weight",
    "WeightCharacteristics",
    "a1_constant",
    "aprs_constant",
    "ap_constant",
    "fw_constant",
    "LimitedRangeMap",
    "limited_range_transform",
    "generate_weight",
    "parse_kind",
]


class Family(Enum):
    """Interval family a characteristic supremum ranges over."""

    DYADIC = "dyadic-three-grids"
    ALL_INTERVALS = "all-lattice-intervals"

    @classmethod
    def coerce(cls, x: "Family | str") -> "Family":
        return x if isinstance(x, cls) else cls(x)


@dataclass(frozen=True)
class Weight:
    """Strictly positive density; the measure w dx and all derived objects."""

    density: GridFunction

    def __post_init__(self) -> None:
        if min(self.density.nums) <= 0:
            raise ParameterError("a weight must be strictly positive on every cell")

    @property
    def L(self) -> int:
        return self.density.L

    @property
    def n(self) -> int:
        return self.density.n

    def mass(self, Q=None) -> Fraction:
        """w(Q) = ∫_Q w dx, exact."""
        return self.density.integral(Q)

    def mass_cells(self, cells) -> Fraction:
        return self.density.integral_cells(cells)

    @cached_property
    def reciprocal(self) -> GridFunction:
        return self.density.reciprocal()

    @cached_property
    def measure(self) -> MeasureSpec:
        return MeasureSpec(self.density)

    def power(self, e) -> "Weight":
        """w^e as a weight; exact for integer e, float-derived otherwise."""
        e = frac(e) if not isinstance(e, float) or float(e).is_integer() else e
        if isinstance(e, Fraction) and e.denominator == 1:
            k = int(e)
            if k >= 0:
                return Weight(self.density.power(k)) if k != 1 else self
            return Weight(self.reciprocal.power(-k)) if k != -1 else Weight(self.reciprocal)
        vals = [frac(v) for v in self.density.floats ** float(e)]
        return Weight(GridFunction.from_fractions(self.L, vals))

    def to_json(self) -> dict:
        return self.density.to_json()

    @classmethod
    def from_json(cls, obj: dict) -> "Weight":
        return cls(GridFunction.from_json(obj))


# ---------------------------------------------------------------------------
# Grid scans
# ---------------------------------------------------------------------------

_ARANK = {a: i for i, a in enumerate(SHIFTS)}


def _grid_nodes(L: int, alpha) -> list[tuple[int, int, int, int]]:
    """(j, k, start_cell, n_cells) for every in-domain interval of one grid."""
    t = int(3 * Fraction(alpha))
    out = []
    for j in range(L + 1):
        n = 3 << (L - j)
        base = t << L
        for k in k_range(alpha, j):
            out.append((j, k, 3 * k * (1 << (L - j)) + base, n))
    return out


def _scale_stats(w: GridFunction, alpha) -> dict[int, list[tuple[int, int, int, int]]]:
    """Per scale j: (k, start, S, min) over the grid's intervals, exact ints."""
    L = w.L
    t = int(3 * Fraction(alpha))
    P = w.prefix
    nums = w.nums
    stats: dict[int, list[tuple[int, int, int, int]]] = {}
    finest = []
    for k in k_range(alpha, L):
        s = 3 * k + (t << L)
        finest.append((k, s, P[s + 3] - P[s], min(nums[s], nums[s + 1], nums[s + 2])))
    stats[L] = finest
    for j in range(L - 1, -1, -1):
        prev = {k: (S, m) for (k, _, S, m) in stats[j + 1]}
        rows = []
        for k in k_range(alpha, j):
            S1, m1 = prev[2 * k]
            S2, m2 = prev[2 * k + 1]
            s = 3 * k * (1 << (L - j)) + (t << L)
            rows.append((k, s, S1 + S2, min(m1, m2)))
        stats[j] = rows
    return stats


def _better_exact(num_a, den_a, key_a, num_b, den_b, key_b) -> bool:
    """Whether candidate a beats b: larger num/den, ties by smaller key."""
    lhs, rhs = num_a * den_b, num_b * den_a
    if lhs != rhs:
        return lhs > rhs
    return key_a < key_b


def a1_constant(
    w: Weight, family: Family | str = Family.DYADIC
) -> tuple[Fraction, LatticeInterval | CellSpan]:
    """Flatness constant sup_Q ⟨w⟩_{1,Q}·⟨w^{-1}⟩_{∞,Q}, exact with witness.

    Ties go to the coarsest, leftmost interval (then shift order) in the
    dyadic family, and to the shortest, leftmost span in the all-intervals
    family.
    """
    family = Family.coerce(family)
    d = w.density
    if family is Family.DYADIC:
        best = None  # (S, l*m, (j, k, arank), LatticeInterval args)
        for alpha in SHIFTS:
            stats = _scale_stats(d, alpha)
            ar = _ARANK[alpha]
            for j, rows in stats.items():
                n = 3 << (d.L - j)
                for k, _s, S, m in rows:
                    key = (j, k, ar)
                    if best is None or _better_exact(S, n * m, key, *best[:3]):
                        best = (S, n * m, key, (alpha, j, k))
        S, den, _, (alpha, j, k) = best
        return Fraction(S, den), LatticeInterval(alpha, j, k, d.L)

    # all-lattice-intervals: float pre-selection, exact confirmation per row
    N = d.n
    wf = d.floats
    Pf = np.concatenate(([0.0], np.cumsum(wf)))
    row_max = np.empty(N)
    for a in range(N):
        mins = np.minimum.accumulate(wf[a:])
        lens = np.arange(1, N - a + 1, dtype=float)
        row_max[a] = np.max((Pf[a + 1 :] - Pf[a]) / (lens * mins))
    cutoff = row_max.max() * (1.0 - 1e-9)

    P = d.prefix
    nums = d.nums
    best = None  # (S, l*m, (length, a), (a, b))
    for a in np.nonzero(row_max >= cutoff)[0]:
        a = int(a)
        m = nums[a]
        Pa = P[a]
        for b in range(a + 1, N + 1):
            if nums[b - 1] < m:
                m = nums[b - 1]
            S = P[b] - Pa
            key = (b - a, a)
            if best is None or _better_exact(S, (b - a) * m, key, *best[:3]):
                best = (S, (b - a) * m, key, (a, b))
    S, den, _, (a, b) = best
    return Fraction(S, den), CellSpan(a, b, d.L)


def _avg_pow(Psum: float, n: int, e: float) -> float:
    """(mean of x^e over the interval)^{1/e} given the e-power partial sum."""
    return (Psum / n) ** (1.0 / e)


def aprs_constant(
    w: Weight, p, r, s, family: Family | str = Family.DYADIC
) -> tuple[float, LatticeInterval | CellSpan]:
    """Limited-range characteristic sup_Q ⟨w⟩_{e1,Q}·⟨w^{-1}⟩_{e2,Q}.

    Exponents e1 = 1/(1/p − 1/s) and e2 = 1/(1/r − 1/p); p = r turns e2 into
    the sup-norm of 1/w.  Float-valued (general powers are irrational).
    """
    family = Family.coerce(family)
    p, r = float(p), float(r)
    s = INF if s == INF else float(s)
    if not (0 < r <= p and p < s):
        raise ParameterError(f"need 0 < r <= p < s, got r={r}, p={p}, s={s}")
    e1 = p if s == INF else 1.0 / (1.0 / p - 1.0 / s)
    e2 = INF if p == r else 1.0 / (1.0 / r - 1.0 / p)

    d = w.density
    wf = d.floats
    winv = 1.0 / wf
    P1 = np.concatenate(([0.0], np.cumsum(wf**e1)))
    P2 = None if e2 == INF else np.concatenate(([0.0], np.cumsum(winv**e2)))

    if family is Family.DYADIC:
        best_v, best_key, best_args = -1.0, None, None
        for alpha in SHIFTS:
            ar = _ARANK[alpha]
            maxinv = None if P2 is not None else _scale_maxes(winv, d.L, alpha)
            for j, k, st, n in _grid_nodes(d.L, alpha):
                A1 = _avg_pow(P1[st + n] - P1[st], n, e1)
                if P2 is not None:
                    A2 = _avg_pow(P2[st + n] - P2[st], n, e2)
                else:
                    A2 = maxinv[j][k]
                v = A1 * A2
                key = (j, k, ar)
                if v > best_v or (v == best_v and key < best_key):
                    best_v, best_key, best_args = v, key, (alpha, j, k)
        alpha, j, k = best_args
        return best_v, LatticeInterval(alpha, j, k, d.L)

    N = d.n
    best_v, best_key, best_ab = -1.0, None, None
    for a in range(N):
        lens = np.arange(1, N - a + 1, dtype=float)
        A1 = ((P1[a + 1 :] - P1[a]) / lens) ** (1.0 / e1)
        if P2 is not None:
            A2 = ((P2[a + 1 :] - P2[a]) / lens) ** (1.0 / e2)
        else:
            A2 = np.maximum.accumulate(winv[a:])
        vals = A1 * A2
        b_rel = int(np.argmax(vals))
        v = float(vals[b_rel])
        key = (b_rel + 1, a)
        if v > best_v or (v == best_v and key < best_key):
            best_v, best_key, best_ab = v, key, (a, a + b_rel + 1)
    return best_v, CellSpan(best_ab[0], best_ab[1], d.L)


def ap_constant(w: Weight, p, family: Family | str = Family.DYADIC):
    """[w]_p — the (r, s) = (1, ∞) specialization."""
    return aprs_constant(w, p, 1, INF, family)


def _scale_maxes(values: np.ndarray, L: int, alpha) -> dict[int, dict[int, float]]:
    """Per-scale, per-k max of a cell array over one grid's intervals."""
    out: dict[int, dict[int, float]] = {}
    t = int(3 * Fraction(alpha))
    fin = {}
    for k in k_range(alpha, L):
        s = 3 * k + (t << L)
        fin[k] = float(np.max(values[s : s + 3]))
    out[L] = fin
    for j in range(L - 1, -1, -1):
        out[j] = {k: max(out[j + 1][2 * k], out[j + 1][2 * k + 1]) for k in k_range(alpha, j)}
    return out


def fw_constant(
    w: Weight, mode: str = "dyadic"
) -> tuple[Fraction, LatticeInterval]:
    """Maximal-average constant sup_Q (1/w(Q))·∫_Q M(w·1_Q), exact.

    The supremum always runs over the three dyadic grids; `mode` picks the
    maximal operator inside: "dyadic" uses Q's own grid, "exact" the
    uncentered maximal over all lattice intervals (which, restricted to Q,
    only sees sub-spans of Q — averages only drop when clipped to Q).
    """
    if mode not in ("dyadic", "exact"):
        raise ParameterError(f"fw mode must be 'dyadic' or 'exact', got {mode!r}")
    d = w.density
    L, P, nums = d.L, d.prefix, d.nums
    if mode == "exact":
        from .maximal import exact_maximal_pairs

    best = None  # (num, den, key, args) for ratio as exact Fraction num/den
    for alpha in SHIFTS:
        t = int(3 * Fraction(alpha))
        ar = _ARANK[alpha]
        for j0, k0, st0, n0 in _grid_nodes(L, alpha):
            SQ = P[st0 + n0] - P[st0]
            if mode == "dyadic":
                # Walk Q's subtree keeping the best chain average (S, l) so
                # far; at the finest scale each 3-cell block contributes it.
                total = Fraction(0)
                stack = [(j0, k0, SQ, n0)]
                while stack:
                    j, k, bS, bl = stack.pop()
                    if j < L:
                        for kk in (2 * k, 2 * k + 1):
                            s = 3 * kk * (1 << (L - j - 1)) + (t << L)
                            n = 3 << (L - j - 1)
                            S = P[s + n] - P[s]
                            if S * bl > bS * n:
                                stack.append((j + 1, kk, S, n))
                            else:
                                stack.append((j + 1, kk, bS, bl))
                    else:
                        total += Fraction(3 * bS, bl)
                ratio = total / SQ
            else:
                pairs = exact_maximal_pairs(nums[st0 : st0 + n0])
                total = Fraction(0)
                for S, length in pairs:
                    total += Fraction(S, length)
                ratio = total / SQ
            key = (j0, k0, ar)
            if best is None or _better_exact(
                ratio.numerator, ratio.denominator, key, *best[:3]
            ):
                best = (ratio.numerator, ratio.denominator, key, (alpha, j0, k0))
    num, den, _, (alpha, j, k) = best
    return Fraction(num, den), LatticeInterval(alpha, j, k, L)


# ---------------------------------------------------------------------------
# Limited-range rescaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitedRangeMap:
    """The substitution w ↦ v = w^{1/(1/r−1/s)} and its exponent bookkeeping."""

    r: Fraction
    s: object  # Fraction or INF
    v: Weight

    @property
    def exponent(self) -> Fraction:
        return 1 / (Fraction(self.r) if self.s == INF else (1 / Fraction(self.r) - 1 / Fraction(self.s)))

    def p_rs(self, p):
        """The rescaled integrability exponent (1/r−1/s)/(1/p−1/s)."""
        p = frac(p)
        if self.s == INF:
            return p / Fraction(self.r)
        r, s = Fraction(self.r), Fraction(self.s)
        return (1 / r - 1 / s) / (1 / p - 1 / s)


def limited_range_transform(w: Weight, r, s) -> tuple[Weight, LimitedRangeMap]:
    """Rescale w for the range (r, s): v = w^{1/(1/r−1/s)}.

    Exact when the exponent is an integer (in particular (1, ∞) → identity
    and (1/k··) integer cases); otherwise cell values are float-derived.
    """
    r = frac(r)
    s_inf = s == INF
    if not s_inf:
        s = frac(s)
    if r <= 0 or (not s_inf and r >= s):
        raise ParameterError(f"need 0 < r < s, got r={r}, s={s}")
    e = 1 / r if s_inf else 1 / (1 / r - 1 / s)
    v = w if e == 1 else w.power(e)
    return v, LimitedRangeMap(r, INF if s_inf else s, v)


# ---------------------------------------------------------------------------
# Characteristics bundle
# ---------------------------------------------------------------------------


class WeightCharacteristics:
    """Lazy bundle of every characteristic of one weight over one family."""

    def __init__(self, w: Weight, family: Family | str = Family.DYADIC):
        self.w = w
        self.family = Family.coerce(family)
        self.witnesses: dict[str, object] = {}

    @cached_property
    def a1(self) -> Fraction:
        v, wit = a1_constant(self.w, self.family)
        self.witnesses["a1"] = wit
        return v

    def ap(self, p) -> float:
        v, wit = ap_constant(self.w, p, self.family)
        self.witnesses[f"ap({p})"] = wit
        return v

    def aprs(self, p, r, s) -> float:
        v, wit = aprs_constant(self.w, p, r, s, self.family)
        self.witnesses[f"aprs({p},{r},{s})"] = wit
        return v

    @cached_property
    def fw_dyadic(self) -> Fraction:
        v, wit = fw_constant(self.w, "dyadic")
        self.witnesses["fw_dyadic"] = wit
        return v

    @cached_property
    def fw_exact(self) -> Fraction:
        v, wit = fw_constant(self.w, "exact")
        self.witnesses["fw_exact"] = wit
        return v

    def to_json(self) -> dict:
        from .reports import json_ready

        return json_ready(
            {
                "a1": self.a1,
                "fw_dyadic": self.fw_dyadic,
                "fw_exact": self.fw_exact,
                "witness": {k: v for k, v in self.witnesses.items()},
            }
        )


# ---------------------------------------------------------------------------
# Weight generators
# ---------------------------------------------------------------------------

_KIND_STREAM = {
    "constant": 11,
    "two-step": 12,
    "power": 13,
    "random-a1": 14,
    "doubling-random": 15,
}

_QUANT_DEN = 4096  # small common denominator: keeps integer sums comfortable


def parse_kind(text: str) -> tuple[str, dict]:
    """Parse "power(-0.5)" / "random-a1(8)" / bare kind names."""
    m = re.fullmatch(r"([a-z0-9-]+)(?:\(([^)]*)\))?", text.strip())
    if not m:
        raise ParameterError(f"unparseable weight kind {text!r}")
    kind, arg = m.group(1), m.group(2)
    if kind not in _KIND_STREAM:
        raise ParameterError(
            f"unknown weight kind {kind!r}; choose from {sorted(_KIND_STREAM)}"
        )
    params: dict = {}
    if arg:
        if kind == "power":
            params["beta"] = frac(arg)
        elif kind == "random-a1":
            params["target"] = float(Fraction(arg))
        else:
            raise ParameterError(f"kind {kind!r} takes no argument")
    return kind, params


def _rng(kind: str, seed: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, _KIND_STREAM[kind]])
    )


def _quantize(vals: np.ndarray, L: int) -> GridFunction:
    nums = np.maximum(1, np.rint(np.asarray(vals) * _QUANT_DEN).astype(np.int64))
    return GridFunction(L, [int(v) for v in nums], _QUANT_DEN)


def generate_weight(kind: str, seed: int, L: int, **params) -> Weight:
    """Deterministic weight corpus: same (kind, seed, L) → identical weight.

    Kinds: constant; two-step (random split and level); power(beta) with
    beta ∈ (−1, 0], cell value = exact average of x^beta over the cell,
    closed form (b^{β+1}−a^{β+1})/((β+1)(b−a)); random-a1(target) rejection-
    rescales a spike profile until the flatness constant lands within 10% of
    target; doubling-random, a multiplicative cascade.
    """
    if kind not in _KIND_STREAM:
        raise ParameterError(f"unknown weight kind {kind!r}")
    N = 3 << L
    rng = _rng(kind, seed)

    if kind == "constant":
        return Weight(GridFunction.constant(L, 1))

    if kind == "two-step":
        brk = int(rng.integers(1, N))
        hi = int(rng.integers(2, 17))
        first_high = bool(rng.integers(0, 2))
        vals = [hi if (i < brk) == first_high else 1 for i in range(N)]
        return Weight(GridFunction(L, vals, 1))

    if kind == "power":
        beta = frac(params.get("beta", Fraction(-1, 2)))
        if not -1 < beta <= 0:
            raise ParameterError(f"power weight needs beta in (-1, 0], got {beta}")
        if beta == 0:
            return Weight(GridFunction.constant(L, 1))
        bf = float(beta)
        edges = np.arange(N + 1) / N
        anti = edges ** (bf + 1.0) / (bf + 1.0)  # antiderivative of x^beta
        cell = (anti[1:] - anti[:-1]) * N  # average over each cell
        return Weight(GridFunction.from_fractions(L, [frac(v) for v in cell]))

    if kind == "random-a1":
        target = float(params.get("target", 4.0))
        if target < 1.0:
            raise ParameterError("flatness target must be >= 1")
        if target < 1.05:
            return Weight(GridFunction.constant(L, 1))
        width = int(rng.integers(max(1, N // 8), max(2, N // 2)))
        off = int(rng.integers(0, N - width + 1))
        noise = rng.uniform(1.0, 1.3, size=N)
        H = target
        for _ in range(40):
            vals = noise.copy()
            vals[off : off + width] *= H
            w = Weight(_quantize(vals, L))
            a1 = float(a1_constant(w, Family.DYADIC)[0])
            if 0.9 * target <= a1 <= 1.1 * target:
                return w
            H = max(1.0, H * target / a1)
        raise GenerationError(
            f"random-a1(target={target}) did not converge in 40 rounds (seed {seed})"
        )

    # doubling-random: multiplicative cascade down the alpha = 0 tree
    delta = float(rng.uniform(0.15, 0.35))
    vals = np.ones(N)
    for j in range(1, L + 1):
        signs = rng.integers(0, 2, size=1 << j) * 2 - 1
        vals *= np.repeat(1.0 + delta * signs, 3 << (L - j))
    return Weight(_quantize(vals, L))
