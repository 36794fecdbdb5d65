"""Trivial-config smoke: constant weight, flat f, root-only collection."""
import numpy as np
from fractions import Fraction

from sparselab import (
    GridFunction, Weight, SparseCollection, TheoremParams,
    thm_a_verify, thm_c_verify, reduction_construct_Eprime,
)
from sparselab._rat import INF
from sparselab.errors import ParameterError

L = 3
n = 3 << L
w = Weight(GridFunction(L, [1] * n, 1))
f = GridFunction(L, [1] * n, 1)
S = SparseCollection(L, Fraction(3, 4), {Fraction(0): frozenset({(0, 0)})})
E = np.arange(n)

tr = thm_a_verify(w, f, S, E)
print("thm-a green:", tr.green)
for st in tr.steps:
    print(f"  {st.name:24s} pass={st.passed} lhs={st.lhs} rhs={st.rhs}")
print("summary:", tr.summary)
assert tr.green
assert abs(tr.summary["final_ratio"] - 1.0) < 1e-12
assert abs(tr.summary["C_star"] - 11.313708498984761) < 1e-9, tr.summary["C_star"]

tr2 = thm_c_verify(w, TheoremParams(1, INF, 1), f, S, E)
assert tr2.dumps() == tr.dumps(), "thm-c (1,inf,1) must replay thm-a bitwise"
print("thm-c (1,inf,1) identical: OK")

# (2, inf, 1): theta=0, v = w^2 = 1, t=2, c = 3/4 -> fine
tr3 = thm_c_verify(w, TheoremParams(2, INF, 1), f, S, E)
print("thm-c (2,inf,1) green:", tr3.green, "C*:", tr3.summary["C_star"])
assert tr3.green

# (2, 4, 1) with constant weight: fw=1 -> t=2 -> rt=4=s -> divergent slice integral
try:
    thm_c_verify(w, TheoremParams(2, 4, 1), f, S, E)
    print("ERROR: expected ParameterError")
except ParameterError as e:
    print("thm-c (2,4,1) raises as designed:", e)

# (1, 4, 2): geometric branch, theta=1/4
tr4 = thm_c_verify(w, TheoremParams(1, 4, 2), f, S, E)
print("thm-c (1,4,2) green:", tr4.green)
for st in tr4.steps:
    print(f"  {st.name:24s} pass={st.passed}")
assert tr4.green

# (2, 8, 4): geometric branch, theta=1/4 as well
tr5 = thm_c_verify(w, TheoremParams(2, 8, 4), f, S, E)
print("thm-c (2,8,4) green:", tr5.green)
assert tr5.green

ep, rep = reduction_construct_Eprime(f, w, E)
print("reduction:", rep.name, "passed:", rep.passed, "|E'| =", len(ep))
assert rep.passed and len(ep) == n
print("ALL SMOKE OK")
