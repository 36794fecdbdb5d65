"""Nontrivial smoke: random weight/function, layered collections, failures."""
import numpy as np
from fractions import Fraction

from sparselab import (
    GridFunction, Weight, SparseCollection, TheoremParams,
    thm_a_verify, thm_c_verify, normalize_for, generate_weight,
)
from sparselab._rat import INF
from sparselab.errors import HypothesisError, NormalizationError, ParameterError

L = 6
n = 3 << L
rng = np.random.Generator(np.random.Philox(key=[7, 99]))

w = generate_weight("doubling-random", 5, L)
fraw = GridFunction(L, [int(x) for x in rng.integers(0, 50, n)], 16)
f = normalize_for(fraw, w, 1)

# theta=0 collection: nested, exactly at the 1/4 children budget
S0 = SparseCollection(L, Fraction(3, 4), {Fraction(0): frozenset(
    {(0, 0), (3, 0), (3, 4), (5, 0), (6, 32)})})
E = np.sort(rng.choice(n, size=150, replace=False))

tr = thm_a_verify(w, f, S0, E)
print("thm-a green:", tr.green)
for st in tr.steps:
    mark = "" if st.passed else "  <-- FAIL"
    print(f"  {st.name:24s} pass={st.passed}{mark}")
print("  summary:", {k: tr.summary[k] for k in ("final_ratio", "C_star", "t", "gamma")})
assert tr.green

# same data on a shifted grid (antichain)
S_sh = SparseCollection(L, Fraction(3, 4), {Fraction(1, 3): frozenset(
    {(2, -1), (2, 0), (2, 1)})})
tr_sh = thm_a_verify(w, f, S_sh, E)
print("thm-a shifted-grid green:", tr_sh.green)
assert tr_sh.green

# thm-c cells on suitable collections
f2 = normalize_for(fraw, w, 2)
cells = [
    (TheoremParams(2, INF, 1), {(0, 0), (3, 0), (3, 4), (5, 0), (6, 32)}),
    (TheoremParams(1, 4, 2), {(0, 0), (4, 0)}),
    (TheoremParams(2, 8, 4), {(0, 0), (4, 3)}),
    (TheoremParams(2, 4, 1), {(0, 0), (6, 0)}),
]
for params, pairs in cells:
    S = SparseCollection(L, params.eta, {Fraction(0): frozenset(pairs)})
    fr = normalize_for(fraw, w, params.r)
    t = thm_c_verify(w, params, fr, S, E)
    print(f"thm-c {params.to_json()} green:", t.green,
          " ratio:", round(t.summary["final_ratio"], 6),
          " C*:", round(t.summary["C_star"], 4))
    if not t.green:
        for st in t.failing_steps():
            print("   FAIL", st.name, st.lhs, st.rhs, st.witness)
    assert t.green

# failure modes
try:
    thm_a_verify(w, fraw, S0, E)
    raise SystemExit("expected NormalizationError")
except NormalizationError:
    print("unnormalized input raises: OK")

bad = SparseCollection(L, Fraction(3, 4), {Fraction(0): frozenset(
    {(0, 0), (1, 0), (1, 1)})})  # children cover the whole parent
try:
    thm_a_verify(w, f, bad, E)
    raise SystemExit("expected HypothesisError")
except HypothesisError as e:
    print("budget violation raises: OK --", str(e)[:60])

multi = SparseCollection(L, Fraction(3, 4), {
    Fraction(0): frozenset({(0, 0)}), Fraction(1, 3): frozenset({(2, 0)})})
try:
    thm_a_verify(w, f, multi, E)
    raise SystemExit("expected ParameterError")
except ParameterError:
    print("multi-grid collection raises: OK")

print("ALL SMOKE-2 OK")
