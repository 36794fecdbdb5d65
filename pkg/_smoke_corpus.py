"""Corpus generator smoke + the L=10, |S|=256 pipeline timing."""
import time
from fractions import Fraction

from sparselab import TheoremParams, thm_a_verify, normalize_for
from sparselab._rat import INF
from sparselab.corpus import (
    gen_cellset, gen_function, gen_perf_function, gen_sparse, gen_weight,
)

# sizes/shapes across parameter cells
for r, s, q, L in [(1, INF, 1, 8), (2, 4, 1, 8), (1, 4, 2, 8), (3, 4, 1, 8), (3, 4, 1, 16)]:
    p = TheoremParams(r, s, q)
    sizes = [len(gen_sparse(3, L, i, p, target=64)) for i in range(10)]
    depth = max(
        (max(j for j, _ in S.grids[Fraction(0)]) for S in
         (gen_sparse(3, L, i, p, target=64) for i in range(10))),
    )
    print(f"theta={p.theta} L={L}: sizes {min(sizes)}..{max(sizes)} deepest j={depth}")

# shifted-grid generation
S_sh = gen_sparse(4, 6, 0, None, target=20, alpha=Fraction(1, 3))
print("shifted:", len(S_sh), "members on alpha=1/3")

# timing: thm-a at L=10 with |S| = 256
L = 10
p0 = TheoremParams(1, INF, 1)
S = gen_sparse(11, L, 0, p0, target=256)
print("perf |S| =", len(S))
w = gen_weight(11, L, 0)
f = normalize_for(gen_perf_function(11, L, 1), w, 1)
E = gen_cellset(11, L, 2, fill=0.9)
t0 = time.perf_counter()
tr = thm_a_verify(w, f, S, E)
dt = time.perf_counter() - t0
print(f"thm-a L=10 |S|={len(S)}: green={tr.green} in {dt:.3f}s")
for st in tr.failing_steps():
    print("   FAIL", st.name, st.lhs, st.rhs, st.witness)
assert tr.green
assert dt < 1.0, f"too slow: {dt:.3f}s"
print("CORPUS SMOKE OK")
