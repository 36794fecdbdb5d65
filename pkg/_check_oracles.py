"""Scratch: cross-validate tests/oracles.py against the engine. Not shipped."""
import sys, math
from fractions import Fraction

sys.path.insert(0, "tests")
import oracles as O

import numpy as np
from sparselab import (
    Family, GridFunction, LatticeInterval, MaximalMode, MeasureSpec,
    NormConvention, SHIFTS, Weight,
    a1_constant, aprs_constant, bilinear_form, bilinear_maximal, carleson_sum,
    coefficient_operator, fw_constant, kolmogorov_check, maximal, n_weak_check,
    one_third_cover, sparse_operator, weak_norm, weighted_n, weighted_norm,
)
from sparselab._rat import INF
from sparselab.corpus import (
    gen_cellset, gen_coefficients, gen_function, gen_sparse, gen_weight,
)
from sparselab.lattice import k_range

rel = lambda a, b: abs(a - b) / max(abs(b), 1e-300)
fails = []

def check(name, ok):
    if not ok:
        fails.append(name)
        print("FAIL", name)

for L in (3, 4):
    for idx in range(4):
        f = gen_function(7, L, idx, density=0.8)
        w = gen_weight(7, L, idx)
        g = gen_function(11, L, idx + 10, density=0.9)

        # exact maximal
        eng = maximal(f, MaximalMode("exact", 1)).fractions()
        bro = O.brute_exact_maximal(f)
        check(f"exact-max L{L} i{idx}", eng == bro)

        # dyadic maximal, all grids and single grid
        eng = maximal(f, MaximalMode("dyadic", 1)).fractions()
        check(f"dyad-max L{L} i{idx}", eng == O.brute_dyadic_maximal(f))
        eng0 = maximal(f, MaximalMode("dyadic", 1, Fraction(1, 3))).fractions()
        check(f"dyad-max-g L{L} i{idx}", eng0 == O.brute_dyadic_maximal(f, Fraction(1, 3)))

        # r=2 variants (float)
        eng = maximal(f, MaximalMode("dyadic", 2)).floats
        bro = np.array(O.brute_maximal_r(f, 2, "dyadic"))
        check(f"dyad-max-r2 L{L} i{idx}", np.allclose(eng, bro, rtol=1e-11))
        if L == 3:
            eng = maximal(f, MaximalMode("exact", 2)).floats
            bro = np.array(O.brute_maximal_r(f, 2, "exact"))
            check(f"exact-max-r2 L{L} i{idx}", np.allclose(eng, bro, rtol=1e-11))

        # a1 both families
        v, _ = a1_constant(w, Family.DYADIC)
        check(f"a1-dyad L{L} i{idx}", v == O.brute_a1(w, "dyadic-three-grids"))
        v, _ = a1_constant(w, Family.ALL_INTERVALS)
        check(f"a1-all L{L} i{idx}", v == O.brute_a1(w, "all-lattice-intervals"))

        # fw both modes
        v, _ = fw_constant(w, "dyadic")
        check(f"fw-dyad L{L} i{idx}", v == O.brute_fw(w, "dyadic"))
        v, _ = fw_constant(w, "exact")
        check(f"fw-exact L{L} i{idx}", v == O.brute_fw(w, "exact"))

        # aprs
        for (p, r, s) in [(2, 1, INF), (2, 1, 4), (3, 2, 8)]:
            v, _ = aprs_constant(w, p, r, s, Family.DYADIC)
            check(f"aprs-dyad {p},{r},{s} L{L} i{idx}",
                  rel(v, O.brute_aprs(w, p, r, s, "dyadic-three-grids")) < 1e-11)
            if L == 3:
                v, _ = aprs_constant(w, p, r, s, Family.ALL_INTERVALS)
                check(f"aprs-all {p},{r},{s} L{L} i{idx}",
                      rel(v, O.brute_aprs(w, p, r, s, "all-lattice-intervals")) < 1e-11)

        # weak norm: plain, measure-weighted, multiplier
        check(f"weak L{L} i{idx}", weak_norm(f, 1) == O.brute_weak_norm(f, 1))
        mu = w.measure
        check(f"weak-mu L{L} i{idx}",
              weak_norm(f, 1, mu) == O.brute_weak_norm(f, 1, mu))
        check(f"weak-mult L{L} i{idx}",
              weak_norm(f, 1, mu, NormConvention.MULTIPLIER)
              == O.brute_weak_norm(f, 1, mu, NormConvention.MULTIPLIER))
        v = weak_norm(f, 2, mu)
        check(f"weak-p2 L{L} i{idx}", rel(v, O.brute_weak_norm(f, 2, mu)) < 1e-11)

        # weighted norms
        for conv in NormConvention:
            v = weighted_norm(f, 3, w.density, conv)
            check(f"wnorm-{conv.name} L{L} i{idx}",
                  rel(v, O.brute_weighted_norm(f, 3, w.density, conv)) < 1e-11)

        # weighted_n
        for theta in (0, Fraction(1, 2)):
            eng = weighted_n(f, w, theta, Fraction(0))
            bro = O.brute_weighted_n(f, w, theta, Fraction(0))
            if theta == 0:
                check(f"wN0 L{L} i{idx}", eng.fractions() == bro)
            else:
                check(f"wNh L{L} i{idx}",
                      np.allclose(eng.floats, np.array([float(x) for x in bro]), rtol=1e-11))

        # bilinear maximal
        eng = bilinear_maximal(f, g, 1, 1, Family.DYADIC)
        bro = np.array(O.brute_bilinear_maximal(f, g, 1, 1, "dyadic-three-grids"))
        check(f"bimax-dyad L{L} i{idx}", np.allclose(eng.floats, bro, rtol=1e-11))
        if L == 3:
            eng = bilinear_maximal(f, g, 2, 4, Family.ALL_INTERVALS)
            bro = np.array(O.brute_bilinear_maximal(f, g, 2, 4, "all-lattice-intervals"))
            check(f"bimax-all L{L} i{idx}", np.allclose(eng.floats, bro, rtol=1e-11))

        # sparse objects
        S = gen_sparse(7, L, idx, None, target=12)
        eng = sparse_operator(S, f, 1, 1).fractions()
        check(f"sop11 L{L} i{idx}", eng == O.brute_sparse_operator(S, f, 1, 1))
        eng = sparse_operator(S, f, 2, 3).floats
        bro = np.array([float(x) for x in O.brute_sparse_operator(S, f, 2, 3)])
        check(f"sop23 L{L} i{idx}", np.allclose(eng, bro, rtol=1e-11))

        a = gen_coefficients(7, L, idx, S)
        eng = coefficient_operator(S, a, 1).fractions()
        check(f"cop1 L{L} i{idx}", eng == O.brute_coefficient_operator(S, a, 1))
        eng = coefficient_operator(S, a, 2).floats
        bro = np.array([float(x) for x in O.brute_coefficient_operator(S, a, 2)])
        check(f"cop2 L{L} i{idx}", np.allclose(eng, bro, rtol=1e-11))

        v = bilinear_form(S, f, g, 1, INF, 1)
        check(f"bform-exact L{L} i{idx}", v == O.brute_bilinear_form(S, f, g, 1, INF, 1))
        v = bilinear_form(S, f, g, 2, INF, 1)
        check(f"bform-2inf1 L{L} i{idx}",
              rel(v, O.brute_bilinear_form(S, f, g, 2, INF, 1)) < 1e-11)
        v = bilinear_form(S, f, g, 1, 4, 2)
        check(f"bform-142 L{L} i{idx}",
              rel(v, O.brute_bilinear_form(S, f, g, 1, 4, 2)) < 1e-11)

        Q0 = max(S, key=lambda q: q.width)
        total, bound, ratio = carleson_sum(S, w, Q0)
        check(f"carleson L{L} i{idx}", total == O.brute_carleson(S, w, Q0))

# lattice odds and ends
for j in range(0, 6):
    for alpha in SHIFTS:
        check(f"krange {alpha} {j}", list(k_range(alpha, j)) == O.brute_k_range(alpha, j))

import random
rng = random.Random(5)
L = 5
for t in range(200):
    den = 3 << L
    a = rng.randrange(0, den - 1)
    b = rng.randrange(a + 1, min(a + den // 8, den) + 1)
    start, end = Fraction(a, den), Fraction(b, den)
    alpha, Q = one_third_cover(start, end, L)
    balpha, bQ = O.brute_one_third_cover(start, end, L)
    check(f"cover {t}", (alpha, Q) == (balpha, bQ))

print("done;", len(fails), "failures")
