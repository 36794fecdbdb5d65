"""Integer engines behind the maximal operators.

Both engines work on integer cell numerators (the common denominator divides
out of every average comparison) and return, per cell, the pair (S, l) of an
interval attaining the supremum of S/l — numerator sum over cell count —
among the admissible intervals containing that cell.  All comparisons are
exact cross-multiplications.

Two implementations each: an int64 numba kernel (guarded by the overflow
bound max·N² < 2^62) and a big-int Python fallback that is bit-for-bit the
same algorithm.

`chain_pairs`: intervals are the nodes of the complete dyadic tree over the
slice (a root at scale 0 with 3·2^m cells, bisected down to 3-cell blocks).
One top-down sweep carries the best ancestor average to each node: O(n).

`exact_pairs`: intervals are *all* sub-spans [a, b).  Divide and conquer on
the midpoint: a span crossing the midpoint is a left endpoint a joined to a
right endpoint b, and for a fixed a the best b lies on the upper convex hull
of the prefix-sum points (P[b] maximal relative to the chord), found by
binary search for the unimodal slope maximum; symmetrically for fixed b on
the lower hull of left points.  Running prefix maxima in a turn "best
crossing span for this endpoint" into "best crossing span containing this
cell".  O(n log² n).
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


_I64_LIMIT = 1 << 62


def _fits_i64(nums, n: int) -> bool:
    m = max(nums) if len(nums) else 0
    return m * n * n < _I64_LIMIT


# ---------------------------------------------------------------------------
# Dyadic chain sweep
# ---------------------------------------------------------------------------


@njit(cache=True)
def _chain_sweep_i64(nums):
    n = nums.shape[0]
    m = 0
    while (3 << m) < n:
        m += 1
    P = np.zeros(n + 1, np.int64)
    for i in range(n):
        P[i + 1] = P[i] + nums[i]
    curS = np.empty(1, np.int64)
    curL = np.empty(1, np.int64)
    curS[0] = P[n]
    curL[0] = n
    for j in range(1, m + 1):
        size = 1 << j
        span = 3 << (m - j)
        newS = np.empty(size, np.int64)
        newL = np.empty(size, np.int64)
        for k in range(size):
            s = k * span
            S = P[s + span] - P[s]
            pS = curS[k >> 1]
            pL = curL[k >> 1]
            if S * pL > pS * span:
                newS[k] = S
                newL[k] = span
            else:
                newS[k] = pS
                newL[k] = pL
        curS = newS
        curL = newL
    outS = np.empty(n, np.int64)
    outL = np.empty(n, np.int64)
    for k in range(1 << m):
        for c in range(3 * k, 3 * k + 3):
            outS[c] = curS[k]
            outL[c] = curL[k]
    return outS, outL


def _chain_sweep_py(nums: list) -> tuple[list, list]:
    n = len(nums)
    m = 0
    while (3 << m) < n:
        m += 1
    P = [0] * (n + 1)
    for i, v in enumerate(nums):
        P[i + 1] = P[i] + v
    curS, curL = [P[n]], [n]
    for j in range(1, m + 1):
        span = 3 << (m - j)
        newS, newL = [], []
        for k in range(1 << j):
            s = k * span
            S = P[s + span] - P[s]
            pS, pL = curS[k >> 1], curL[k >> 1]
            if S * pL > pS * span:
                newS.append(S)
                newL.append(span)
            else:
                newS.append(pS)
                newL.append(pL)
        curS, curL = newS, newL
    outS = [0] * n
    outL = [1] * n
    for k in range(1 << m):
        for c in range(3 * k, 3 * k + 3):
            outS[c] = curS[k]
            outL[c] = curL[k]
    return outS, outL


def chain_pairs(nums) -> tuple[list, list]:
    """Best (S, l) per cell over the complete dyadic tree on this slice."""
    n = len(nums)
    if n % 3 != 0 or (n // 3) & (n // 3 - 1):
        raise ValueError(f"slice length must be 3·2^m, got {n}")
    if HAVE_NUMBA and _fits_i64(nums, n):
        S, length = _chain_sweep_i64(np.asarray(nums, dtype=np.int64))
        return S.tolist(), length.tolist()
    return _chain_sweep_py(list(nums))


# ---------------------------------------------------------------------------
# Exact all-spans engine
# ---------------------------------------------------------------------------


@njit(cache=True)
def _exact_dc_i64(nums):
    n = nums.shape[0]
    P = np.zeros(n + 1, np.int64)
    for i in range(n):
        P[i + 1] = P[i] + nums[i]
    bestS = nums.astype(np.int64).copy()
    bestL = np.ones(n, np.int64)
    hull = np.empty(n + 1, np.int64)
    # DFS stack: depth ≤ 2·log2(n) + O(1), far under 256 for any int64 n
    stack = np.empty((256, 2), np.int64)
    top = 0
    stack[top, 0] = 0
    stack[top, 1] = n
    top = 1
    while top > 0:
        top -= 1
        lo = stack[top, 0]
        hi = stack[top, 1]
        if hi - lo < 2:
            continue
        mid = (lo + hi) >> 1

        # Left cells: spans [a, b) with a ≤ cell < mid < b.
        hn = 0
        for b in range(mid + 1, hi + 1):
            while hn >= 2 and (hull[hn - 1] - hull[hn - 2]) * (
                P[b] - P[hull[hn - 2]]
            ) - (P[hull[hn - 1]] - P[hull[hn - 2]]) * (b - hull[hn - 2]) >= 0:
                hn -= 1
            hull[hn] = b
            hn += 1
        runS = np.int64(-1)
        runL = np.int64(1)
        for a in range(lo, mid):
            i0 = 0
            i1 = hn - 1
            while i0 < i1:
                im = (i0 + i1) >> 1
                b1 = hull[im]
                b2 = hull[im + 1]
                if (P[b1] - P[a]) * (b2 - a) < (P[b2] - P[a]) * (b1 - a):
                    i0 = im + 1
                else:
                    i1 = im
            bb = hull[i0]
            S = P[bb] - P[a]
            length = bb - a
            if runS < 0 or S * runL > runS * length:
                runS = S
                runL = length
            if runS * bestL[a] > bestS[a] * runL:
                bestS[a] = runS
                bestL[a] = runL

        # Right cells: spans [a, b) with a < mid ≤ cell < b.
        hn = 0
        for a in range(lo, mid):
            while hn >= 2 and (hull[hn - 1] - hull[hn - 2]) * (
                P[a] - P[hull[hn - 2]]
            ) - (P[hull[hn - 1]] - P[hull[hn - 2]]) * (a - hull[hn - 2]) <= 0:
                hn -= 1
            hull[hn] = a
            hn += 1
        runS = np.int64(-1)
        runL = np.int64(1)
        for b in range(hi, mid, -1):
            i0 = 0
            i1 = hn - 1
            while i0 < i1:
                im = (i0 + i1) >> 1
                a1 = hull[im]
                a2 = hull[im + 1]
                if (P[b] - P[a1]) * (b - a2) < (P[b] - P[a2]) * (b - a1):
                    i0 = im + 1
                else:
                    i1 = im
            aa = hull[i0]
            S = P[b] - P[aa]
            length = b - aa
            if runS < 0 or S * runL > runS * length:
                runS = S
                runL = length
            c = b - 1
            if runS * bestL[c] > bestS[c] * runL:
                bestS[c] = runS
                bestL[c] = runL

        stack[top, 0] = lo
        stack[top, 1] = mid
        top += 1
        stack[top, 0] = mid
        stack[top, 1] = hi
        top += 1
    return bestS, bestL


def _exact_dc_py(nums: list) -> tuple[list, list]:
    n = len(nums)
    P = [0] * (n + 1)
    for i, v in enumerate(nums):
        P[i + 1] = P[i] + v
    bestS = list(nums)
    bestL = [1] * n
    stack = [(0, n)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        mid = (lo + hi) >> 1

        hull: list[int] = []
        for b in range(mid + 1, hi + 1):
            while len(hull) >= 2 and (hull[-1] - hull[-2]) * (P[b] - P[hull[-2]]) - (
                P[hull[-1]] - P[hull[-2]]
            ) * (b - hull[-2]) >= 0:
                hull.pop()
            hull.append(b)
        runS, runL = -1, 1
        for a in range(lo, mid):
            i0, i1 = 0, len(hull) - 1
            while i0 < i1:
                im = (i0 + i1) >> 1
                b1, b2 = hull[im], hull[im + 1]
                if (P[b1] - P[a]) * (b2 - a) < (P[b2] - P[a]) * (b1 - a):
                    i0 = im + 1
                else:
                    i1 = im
            bb = hull[i0]
            S, length = P[bb] - P[a], bb - a
            if runS < 0 or S * runL > runS * length:
                runS, runL = S, length
            if runS * bestL[a] > bestS[a] * runL:
                bestS[a], bestL[a] = runS, runL

        hull = []
        for a in range(lo, mid):
            while len(hull) >= 2 and (hull[-1] - hull[-2]) * (P[a] - P[hull[-2]]) - (
                P[hull[-1]] - P[hull[-2]]
            ) * (a - hull[-2]) <= 0:
                hull.pop()
            hull.append(a)
        runS, runL = -1, 1
        for b in range(hi, mid, -1):
            i0, i1 = 0, len(hull) - 1
            while i0 < i1:
                im = (i0 + i1) >> 1
                a1, a2 = hull[im], hull[im + 1]
                if (P[b] - P[a1]) * (b - a2) < (P[b] - P[a2]) * (b - a1):
                    i0 = im + 1
                else:
                    i1 = im
            aa = hull[i0]
            S, length = P[b] - P[aa], b - aa
            if runS < 0 or S * runL > runS * length:
                runS, runL = S, length
            c = b - 1
            if runS * bestL[c] > bestS[c] * runL:
                bestS[c], bestL[c] = runS, runL

        stack.append((lo, mid))
        stack.append((mid, hi))
    return bestS, bestL


def exact_pairs(nums) -> tuple[list, list]:
    """Best (S, l) per cell over every span [a, b) of the slice."""
    n = len(nums)
    if n == 0:
        return [], []
    if HAVE_NUMBA and _fits_i64(nums, n):
        S, length = _exact_dc_i64(np.asarray(nums, dtype=np.int64))
        return S.tolist(), length.tolist()
    return _exact_dc_py(list(nums))
