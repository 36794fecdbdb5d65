"""Seeded corpus generators for tests, sweeps, and benchmarks.

Every generator is a pure function of (seed, L, index, ...) through a
counter-based bit stream, so corpora are reproducible across platforms and
any single instance can be regenerated without replaying the others.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ._rat import INF
from .gridfn import GridFunction
from .lattice import k_range
from .pipelines import TheoremParams, normalize_for
from .sparse import CoefficientFamily, SparseCollection
from .weights import Weight, generate_weight, parse_kind

__all__ = [
    "gen_function",
    "gen_signed_function",
    "gen_cellset",
    "gen_sparse",
    "gen_coefficients",
    "gen_weight",
    "gen_perf_function",
    "corpus_weight_kinds",
    "thm_a_instance",
    "thm_c_instance",
    "prop32_instance",
    "prop31_instance",
]

_MASK64 = (1 << 64) - 1
_F_STREAM = 0x21
_E_STREAM = 0x22
_S_STREAM = 0x23
_A_STREAM = 0x24
_P_STREAM = 0x25


def _rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=[seed & _MASK64, ((stream << 32) | index) & _MASK64])
    )


def gen_function(
    seed: int,
    L: int,
    index: int = 0,
    density: float = 0.8,
    max_num: int = 400,
    den: int = 16,
) -> GridFunction:
    """Nonnegative step function; a `density` fraction of cells is nonzero."""
    rng = _rng(seed, _F_STREAM, index)
    n = 3 << L
    nums = rng.integers(1, max_num + 1, n)
    nums[rng.random(n) >= density] = 0
    if not nums.any():
        nums[int(rng.integers(0, n))] = 1
    return GridFunction(L, [int(x) for x in nums], den)


def gen_signed_function(
    seed: int, L: int, index: int = 0, max_num: int = 400, den: int = 16
) -> GridFunction:
    rng = _rng(seed, _F_STREAM, index ^ 0x80000)
    n = 3 << L
    return GridFunction(L, [int(x) for x in rng.integers(-max_num, max_num + 1, n)], den)


def gen_cellset(seed: int, L: int, index: int = 0, fill: float = 0.7) -> np.ndarray:
    """Random target set E; `fill` is the expected fraction of kept cells."""
    rng = _rng(seed, _E_STREAM, index)
    n = 3 << L
    keep = rng.random(n) < fill
    if not keep.any():
        keep[int(rng.integers(0, n))] = True
    return np.nonzero(keep)[0]


def corpus_weight_kinds() -> list[str]:
    return [
        "doubling-random",
        "random-a1(8)",
        "power(-0.5)",
        "two-step",
        "random-a1(3)",
        "power(-0.8)",
    ]


def gen_weight(seed: int, L: int, index: int = 0, kind: str | None = None) -> Weight:
    """A corpus weight; cycles through the named families when kind=None."""
    if kind is None:
        kind = corpus_weight_kinds()[index % len(corpus_weight_kinds())]
    name, kwargs = parse_kind(kind)
    return generate_weight(name, (seed * 0x9E3779B9 + index) & _MASK64, L, **kwargs)


def gen_sparse(
    seed: int,
    L: int,
    index: int = 0,
    params: TheoremParams | None = None,
    target: int = 32,
    alpha: Fraction = Fraction(0),
    max_children: int = 4,
) -> SparseCollection:
    """A collection honoring the exact children budget of `params`.

    Grows a laminar family: top-level members sit on mutually disjoint grid
    slots (no parent, hence unconstrained), and members sprout children at
    depth offsets small enough for ((1-θ)/4)^{1/(1-θ)}·|Q|.  When no
    offset fits inside resolution L (deep budgets at shallow L) the result
    is an antichain.  Size is capped by `target`; the exact count depends on
    how much room the seed's choices leave.
    """
    params = params or TheoremParams(1, INF, 1)
    rng = _rng(seed, _S_STREAM, index)
    alpha = Fraction(alpha)
    t3 = int(3 * alpha)

    delta_min = next(
        (d for d in range(1, 64) if params.budget_allows(1, 1 << d)), None
    )

    members: set[tuple[int, int]] = set()
    frontier: list[tuple[int, int]] = []
    root_mask = 0

    def span_mask(j: int, k: int) -> int:
        s = 3 * k * (1 << (L - j)) + (t3 << L)
        return ((1 << (3 << (L - j))) - 1) << s

    def try_add_root() -> bool:
        nonlocal root_mask
        for _ in range(8):
            j = 0 if (not members and rng.random() < 0.25 and not t3) else int(
                rng.integers(1, min(L, 8) + 1)
            )
            ks = list(k_range(alpha, j))
            if not ks:
                continue
            k = ks[int(rng.integers(0, len(ks)))]
            m = span_mask(j, k)
            if m & root_mask == 0:
                members.add((j, k))
                frontier.append((j, k))
                root_mask |= m
                return True
        return False

    def grow(j: int, k: int) -> bool:
        if delta_min is None or j + delta_min > L:
            return False
        slack = int(rng.integers(0, 3))
        dc = min(delta_min + slack, L - j)
        nc, npar = 3 << (L - j - dc), 3 << (L - j)
        m_hi = min(max_children, 1 << dc, max(target - len(members), 1))
        while m_hi and not params.budget_allows(m_hi * nc, npar):
            m_hi -= 1
        if m_hi == 0:
            return False
        m = 1 + int(rng.integers(0, m_hi))
        offs = rng.choice(1 << dc, size=m, replace=False)
        base = k << dc
        for o in sorted(int(x) for x in offs):
            members.add((j + dc, base + o))
            frontier.append((j + dc, base + o))
        return True

    try_add_root()
    for _ in range(10 * target):
        if len(members) >= target:
            break
        if frontier and rng.random() < 0.65:
            pos = int(rng.integers(0, len(frontier)))
            j, k = frontier.pop(pos)
            grow(j, k)
        elif not try_add_root() and not frontier:
            break
    if len(members) < target:
        # sweep fill: free fine-scale slots are new (disjoint) roots
        for j in range(min(L, 10), 1, -1):
            ks = list(k_range(alpha, j))
            if not ks:
                continue
            for pos in rng.permutation(len(ks)):
                if len(members) >= target:
                    break
                k = ks[int(pos)]
                m = span_mask(j, k)
                if m & root_mask == 0:
                    members.add((j, k))
                    root_mask |= m
            if len(members) >= target:
                break
    if not members:
        members = {(0, 0) if not t3 else (1, next(iter(k_range(alpha, 1))))}
    return SparseCollection(L, params.eta, {alpha: frozenset(members)})


def gen_coefficients(
    seed: int, L: int, index: int, S: SparseCollection, max_num: int = 100
) -> CoefficientFamily:
    """Positive rational coefficients on the members of S."""
    rng = _rng(seed, _A_STREAM, index)
    return CoefficientFamily(
        {Q: Fraction(int(rng.integers(1, max_num + 1)), 16) for Q in S}
    )


def gen_perf_function(
    seed: int, L: int, index: int = 0, max_num: int = 100
) -> GridFunction:
    """Benchmark input: strictly positive, small numerators, denominator 2^12
    (keeps every engine inside the int64 fast path at native-size grids)."""
    rng = _rng(seed, _P_STREAM, index)
    n = 3 << L
    return GridFunction(L, [int(x) for x in rng.integers(1, max_num + 1, n)], 4096)


# Ready-made instances for the calibrated corpora.  The calibration script
# and the verification suite must walk the *same* inputs, so the instance
# construction lives here, keyed only by (seed, L, index).

_PROP32_T = (1.1, 1.25, 1.5, 2.0)
_PROP31_T = ((1.0, 2.0), (1.25, 2.0), (1.5, 3.0), (1.1, 1.6))


def thm_a_instance(seed: int, L: int, index: int, target: int = 48):
    """(w, f, S, E) with ``f`` normalized to unit weighted norm."""
    w = gen_weight(seed, L, index)
    f = normalize_for(gen_function(seed, L, index, density=0.9), w, 1)
    S = gen_sparse(seed, L, index, None, target=target)
    E = gen_cellset(seed, L, index)
    return w, f, S, E


def thm_c_instance(
    seed: int, L: int, index: int, params: TheoremParams, target: int = 32
):
    """(w, f, S, E) for a general exponent triple; S carries params.eta."""
    w = gen_weight(seed, L, index)
    f = normalize_for(gen_function(seed, L, index, density=0.9), w, params.r)
    S = gen_sparse(seed, L, index, params, target=target)
    E = gen_cellset(seed, L, index)
    return w, f, S, E


def prop32_instance(seed: int, L: int, index: int, target: int = 32):
    """(S, f, t, w); the collection is relabeled to the 1/2 sparsity grade
    its construction budget strictly exceeds."""
    S0 = gen_sparse(seed, L, index, None, target=target)
    S = SparseCollection(S0.L, Fraction(1, 2), S0.grids)
    f = gen_function(seed, L, index, density=0.9)
    w = gen_weight(seed, L, index)
    return S, f, _PROP32_T[index % len(_PROP32_T)], w


def prop31_instance(seed: int, L: int, index: int, target: int = 32):
    """(S, a, t1, t2, w) for the two-exponent comparison."""
    S = gen_sparse(seed, L, index, None, target=target)
    a = gen_coefficients(seed, L, index, S)
    w = gen_weight(seed, L, index)
    t1, t2 = _PROP31_T[index % len(_PROP31_T)]
    return S, a, t1, t2, w
