"""Sparse collections, sparse operators/forms, and the selection lemmas.

A sparse collection is a set of grid intervals, kept per shift, together
with one sparseness parameter η ∈ (0, 1): inside each grid, every member Q
must satisfy the children-sum condition Σ_{Q' ∈ ch(Q)} |Q'| ≤ (1−η)|Q|,
where ch(Q) are the maximal members strictly inside Q.  That condition is
checked in exact cell-count arithmetic, and it forces the almost-disjoint
remainder sets E_Q = Q ∖ ∪ch(Q) to be pairwise disjoint with
|E_Q| ≥ η|Q| — the geometry every pipeline leans on.

The two-sided selection (`magic_selection`) additionally needs the tighter
children budget ((1−θ)/4)^{1/(1−θ)}; that comparison, and the membership
test λ⟨w⟩^θ < ⟨f⟩ ≤ 2λ⟨w⟩^θ, are decided exactly by clearing the rational
exponents (see `_rat.compare_power_product`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from ._rat import INF, compare_power_product, conjugate, frac
from .errors import HypothesisError, MalformedInputError, ParameterError
from .gridfn import GridFunction, average
from .lattice import SHIFTS, LatticeInterval, shift_from_str, shift_to_str
from .reports import CheckReport
from .weights import Weight, fw_constant

__all__ = [
    "SparseCollection",
    "CoefficientFamily",
    "verify_sparsity",
    "stopping_time_sparse",
    "sparse_operator",
    "coefficient_operator",
    "bilinear_form",
    "magic_selection",
    "carleson_sum",
]


@dataclass(frozen=True)
class SparseCollection:
    """Per-shift interval sets with a common sparseness parameter η."""

    L: int
    eta: Fraction
    grids: dict  # Fraction shift -> frozenset of (j, k)

    def __post_init__(self) -> None:
        eta = frac(self.eta)
        if not 0 < eta < 1:
            raise ParameterError(f"sparseness eta must lie in (0,1), got {eta}")
        object.__setattr__(self, "eta", eta)
        clean = {}
        for alpha, pairs in self.grids.items():
            a = Fraction(alpha)
            if a not in SHIFTS:
                raise MalformedInputError(f"not a grid shift: {alpha!r}")
            clean[a] = frozenset((int(j), int(k)) for j, k in pairs)
        for a in SHIFTS:
            clean.setdefault(a, frozenset())
        object.__setattr__(self, "grids", clean)
        for Q in self:  # validates every (j, k) against the lattice
            pass

    # -- iteration ---------------------------------------------------------

    def shifts(self) -> list[Fraction]:
        return [a for a in SHIFTS if self.grids[a]]

    def intervals(self, alpha) -> list[LatticeInterval]:
        a = Fraction(alpha)
        return [
            LatticeInterval(a, j, k, self.L) for j, k in sorted(self.grids[a])
        ]

    def __iter__(self) -> Iterator[LatticeInterval]:
        for a in SHIFTS:
            yield from self.intervals(a)

    def __len__(self) -> int:
        return sum(len(v) for v in self.grids.values())

    def __contains__(self, Q: LatticeInterval) -> bool:
        return (Q.j, Q.k) in self.grids.get(Fraction(Q.alpha), frozenset())

    # -- structure ---------------------------------------------------------

    def forest(self, alpha) -> tuple[list[LatticeInterval], dict, dict]:
        """(nodes, parent, children) of one grid's inclusion forest.

        Dyadic intervals of one grid are laminar, so a single sweep in
        (start asc, width desc) order with a containment stack builds the
        forest; `children[Q]` are the maximal members strictly inside Q.
        """
        nodes = sorted(
            self.intervals(alpha), key=lambda q: (q.start_index, -q.n_cells)
        )
        parent: dict[LatticeInterval, LatticeInterval | None] = {}
        children: dict[LatticeInterval, list[LatticeInterval]] = {q: [] for q in nodes}
        stack: list[LatticeInterval] = []
        for q in nodes:
            while stack and not stack[-1].contains(q):
                stack.pop()
            if stack and stack[-1] == q:  # identical duplicates impossible (set)
                continue
            parent[q] = stack[-1] if stack else None
            if stack:
                children[stack[-1]].append(q)
            stack.append(q)
        return nodes, parent, children

    def remainders(self, alpha) -> dict[LatticeInterval, int]:
        """E_Q = Q ∖ ∪ch(Q) per member of one grid, as cell bitmasks."""
        nodes, _, children = self.forest(alpha)
        out = {}
        for q in nodes:
            mask = ((1 << q.n_cells) - 1) << q.start_index
            for c in children[q]:
                mask &= ~(((1 << c.n_cells) - 1) << c.start_index)
            out[q] = mask
        return out

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        from ._rat import fmt

        return {
            "eta": fmt(self.eta),
            "grids": {
                shift_to_str(a): [list(p) for p in sorted(self.grids[a])]
                for a in SHIFTS
            },
        }

    @classmethod
    def from_json(cls, obj: dict, L: int) -> "SparseCollection":
        grids = {
            shift_from_str(a): [(int(j), int(k)) for j, k in pairs]
            for a, pairs in obj["grids"].items()
        }
        return cls(L, Fraction(obj["eta"]), grids)


@dataclass(frozen=True)
class CoefficientFamily:
    """Positive coefficients a_Q attached to the members of a collection."""

    values: dict  # LatticeInterval -> positive number

    def __post_init__(self) -> None:
        for q, a in self.values.items():
            if not float(a) > 0:
                raise ParameterError(f"coefficient at {q!r} must be positive")

    def __getitem__(self, Q: LatticeInterval):
        return self.values[Q]

    def items(self):
        return self.values.items()


def _mask_cells(mask: int) -> np.ndarray:
    out = []
    i = 0
    while mask:
        tz = (mask & -mask).bit_length() - 1
        out.append(tz)
        mask &= mask - 1
    return np.asarray(out, dtype=np.int64)


def verify_sparsity(S: SparseCollection):
    """Exact check of the children-sum condition, plus the remainder family.

    Returns (passed, witness, e_family): witness is the first violating Q
    (None on pass); e_family maps each member to its E_Q cell array, with
    |E_Q| ≥ η|Q| and in-grid pairwise disjointness asserted on pass.
    """
    one_minus = 1 - S.eta
    for alpha in S.shifts():
        _, _, children = S.forest(alpha)
        for q, ch in children.items():
            if Fraction(sum(c.n_cells for c in ch), q.n_cells) > one_minus:
                return False, q, {}
    e_family: dict[LatticeInterval, np.ndarray] = {}
    for alpha in S.shifts():
        seen = 0
        for q, mask in S.remainders(alpha).items():
            if mask & seen:
                raise AssertionError(f"remainder sets overlap at {q!r}")
            seen |= mask
            n_e = mask.bit_count()
            if Fraction(n_e, q.n_cells) < S.eta:
                raise AssertionError(f"|E_Q| < eta·|Q| at {q!r}")
            e_family[q] = _mask_cells(mask)
    return True, None, e_family


def stopping_time_sparse(
    f: GridFunction, grid, factor, root: LatticeInterval | None = None
) -> SparseCollection:
    """Principal intervals of f in one grid: the stopping-time collection.

    Starting from the root, the children of a selected Q are the maximal
    subintervals Q' with ⟨f⟩_{1,Q'} > c·⟨f⟩_{1,Q} (strictly).  The result
    is (1−1/c)-sparse by the stopping inequality, and `verify_sparsity`
    passes on it.
    """
    c = frac(factor)
    if c <= 1:
        raise ParameterError(f"stopping factor must exceed 1, got {c}")
    alpha = shift_from_str(grid) if isinstance(grid, str) else Fraction(grid)
    if root is None:
        if alpha != 0:
            raise ParameterError("shifted grids need an explicit root interval")
        root = LatticeInterval(Fraction(0), 0, 0, f.L)
    if Fraction(root.alpha) != alpha:
        raise ParameterError("root must belong to the requested grid")
    if f.avg(root) == 0:
        raise ParameterError("stopping time needs f not identically 0 on the root")

    selected: set[tuple[int, int]] = set()
    todo = [root]
    while todo:
        q = todo.pop()
        selected.add((q.j, q.k))
        threshold = c * f.avg(q)
        probe = list(q.children()) if q.j < f.L else []
        while probe:
            cand = probe.pop()
            if f.avg(cand) > threshold:
                todo.append(cand)
            elif cand.j < f.L:
                probe.extend(cand.children())
    return SparseCollection(f.L, 1 - 1 / c, {alpha: selected})


def _accumulate_exact(
    L: int, terms: Iterable[tuple[LatticeInterval, Fraction]]
) -> GridFunction:
    """Σ v_Q·1_Q as an exact step function (difference array of fractions)."""
    n = 3 << L
    diff = [Fraction(0)] * (n + 1)
    for q, v in terms:
        diff[q.start_index] += v
        diff[q.end_index] -= v
    vals = []
    acc = Fraction(0)
    for i in range(n):
        acc += diff[i]
        vals.append(acc)
    return GridFunction.from_fractions(L, vals)


def _accumulate_float(L: int, terms: Iterable[tuple[LatticeInterval, float]], q: float) -> GridFunction:
    # Direct segment adds rather than a difference array: float cumsum leaves
    # cancellation residue on cells no member covers, and the final root
    # amplifies it.  This way uncovered cells stay exactly zero.
    n = 3 << L
    acc = np.zeros(n)
    for Q, v in terms:
        acc[Q.start_index : Q.end_index] += v
    vals = acc ** (1.0 / q)
    return GridFunction.from_fractions(L, [frac(v) for v in vals])


def sparse_operator(S: SparseCollection, f: GridFunction, r, q) -> GridFunction:
    """(Σ_{Q∈S} ⟨f⟩_{r,Q}^q·1_Q)^{1/q} pointwise; exact when r = q = 1."""
    if not (float(r) > 0 and float(q) > 0):
        raise ParameterError("sparse operator needs r, q > 0")
    if r == 1 and q == 1:
        return _accumulate_exact(f.L, ((Q, f.avg(Q)) for Q in S))
    rf, qf = float(r), float(q)
    return _accumulate_float(
        f.L, ((Q, float(average(f, rf, Q)) ** qf) for Q in S), qf
    )


def coefficient_operator(S: SparseCollection, a, q) -> GridFunction:
    """(Σ_{Q∈S} a_Q^q·1_Q)^{1/q} for a coefficient family on S."""
    if not float(q) > 0:
        raise ParameterError("coefficient operator needs q > 0")
    values = a.values if isinstance(a, CoefficientFamily) else dict(a)
    for Q in S:
        if Q not in values:
            raise MalformedInputError(f"missing coefficient for {Q!r}")
    exact = q == 1 and all(
        isinstance(v, (int, Fraction)) for v in values.values()
    )
    if exact:
        return _accumulate_exact(S.L, ((Q, frac(values[Q])) for Q in S))
    qf = float(q)
    return _accumulate_float(S.L, ((Q, float(values[Q]) ** qf) for Q in S), qf)


def bilinear_form(
    S: SparseCollection, f: GridFunction, g: GridFunction, r, s, q
):
    """(Σ_{Q∈S} ⟨f⟩_{r,Q}^q·⟨g⟩_{(s/q)',Q}·|Q|)^{1/q}.

    Exact Fraction when r = q = 1 and s = ∞ (the plain sparse form);
    float otherwise.
    """
    if not float(q) > 0:
        raise ParameterError("bilinear form needs q > 0")
    if not (s == INF or float(q) < float(s)):
        raise ParameterError(f"need q < s, got q={q}, s={s}")
    gexp = Fraction(1) if s == INF else conjugate(frac(s) / frac(q))
    if r == 1 and q == 1 and s == INF:
        total = Fraction(0)
        for Q in S:
            total += f.avg(Q) * g.avg(Q) * Q.width
        return total
    rf, qf = float(r), float(q)
    total = 0.0
    for Q in S:
        total += (
            float(average(f, rf, Q)) ** qf
            * float(average(g, float(gexp), Q))
            * float(Q.width)
        )
    return total ** (1.0 / qf)


def magic_selection(S: SparseCollection, f: GridFunction, w: Weight, lam, theta):
    """Two-sided level selection and its disjointness/integral conclusions.

    Requires the tightened children budget Σ|Q'| ≤ ((1−θ)/4)^{1/(1−θ)}|Q|
    on every member (exact check; `HypothesisError` names the first
    offender).  Selects E = {Q : λ⟨w⟩_{1,Q}^θ < ⟨f⟩_{1,Q} ≤ 2λ⟨w⟩_{1,Q}^θ},
    forms E_Q = Q ∖ ∪ch_E(Q), and asserts, exactly, the pairwise
    disjointness of {E_Q}, the halving bound Σ_{ch} ∫_{Q'}f ≤ ½∫_Q f, and
    the factor-2 conclusion ∫_Q f ≤ 2∫_{E_Q} f.
    """
    lam = frac(lam)
    theta = frac(theta)
    if not 0 <= theta < 1:
        raise ParameterError(f"need 0 <= theta < 1, got {theta}")
    if lam <= 0:
        raise ParameterError("selection level must be positive")
    live = S.shifts()
    if len(live) != 1:
        raise ParameterError("magic selection expects a single-grid collection")
    alpha = live[0]

    # Children budget, exact: Σ|ch| / |Q| ≤ ((1−θ)/4)^{1/(1−θ)}
    budget_base = (1 - theta) / 4
    budget_exp = 1 / (1 - theta)
    _, _, children_all = S.forest(alpha)
    for q, ch in children_all.items():
        ratio = Fraction(sum(c.n_cells for c in ch), q.n_cells)
        if compare_power_product(ratio, [(budget_base, budget_exp)]) > 0:
            raise HypothesisError(
                f"children budget violated at {q!r}: "
                f"ratio {ratio} > ((1-theta)/4)^(1/(1-theta))"
            )

    def in_band(Q: LatticeInterval) -> bool:
        af, aw = f.avg(Q), w.density.integral(Q) / Q.width
        lower = compare_power_product(af, [(lam, Fraction(1)), (aw, theta)])
        if lower <= 0:
            return False
        upper = compare_power_product(af, [(2 * lam, Fraction(1)), (aw, theta)])
        return upper <= 0

    chosen = [Q for Q in S.intervals(alpha) if in_band(Q)]
    sub = SparseCollection(S.L, S.eta, {alpha: {(q.j, q.k) for q in chosen}})
    _, _, ch_e = sub.forest(alpha)
    remainders = sub.remainders(alpha)

    seen = 0
    worst_half = Fraction(0)
    worst_double = Fraction(0)
    for Q in chosen:
        mask = remainders[Q]
        if mask & seen:
            raise AssertionError(f"selection remainders overlap at {Q!r}")
        seen |= mask
        total = f.integral(Q)
        kids = sum((f.integral(c) for c in ch_e[Q]), Fraction(0))
        if total > 0:
            worst_half = max(worst_half, kids / total)
        if 2 * kids > total:
            return chosen, remainders, CheckReport(
                name="magic-selection",
                lhs=kids,
                rhs=total / 2,
                constant=Fraction(1, 2),
                passed=False,
                witness=Q.to_json(),
            )
        on_e = f.integral_cells(_mask_cells(mask))
        if total > 2 * on_e:
            return chosen, remainders, CheckReport(
                name="magic-selection",
                lhs=total,
                rhs=2 * on_e,
                constant=2,
                passed=False,
                witness=Q.to_json(),
            )
        if on_e > 0:
            worst_double = max(worst_double, total / on_e)
    report = CheckReport(
        name="magic-selection",
        lhs=worst_half,
        rhs=Fraction(1, 2),
        constant=2,
        passed=True,
        count=len(chosen),
        extras={"worst_conclusion_ratio": worst_double, "selected": len(chosen)},
    )
    return chosen, remainders, report


def carleson_sum(S: SparseCollection, w: Weight, Q0: LatticeInterval):
    """Σ_{Q∈S, Q⊆Q0, same grid} w(Q) against η^{-1}·[w]_maximal-avg·w(Q0).

    Exact rationals throughout; returns (sum, bound, ratio).
    """
    if Q0 not in S:
        raise ParameterError("carleson sum needs Q0 in the collection")
    total = Fraction(0)
    for Q in S.intervals(Q0.alpha):
        if Q0.contains(Q):
            total += w.mass(Q)
    fw = fw_constant(w, "dyadic")[0]
    bound = (1 / S.eta) * fw * w.mass(Q0)
    return total, bound, total / bound
