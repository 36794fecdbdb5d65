"""Seeded instance generators: determinism, admissibility, shapes."""

from fractions import Fraction as F

import numpy as np
import pytest

from sparselab import TheoremParams
from sparselab.corpus import (
    corpus_weight_kinds,
    gen_cellset,
    gen_coefficients,
    gen_function,
    gen_sparse,
    gen_weight,
    prop31_instance,
    prop32_instance,
    thm_a_instance,
    thm_c_instance,
)
from sparselab.gridfn import NormConvention, weighted_norm
from sparselab.sparse import verify_sparsity


def members(S):
    return {(q.alpha, q.j, q.k) for q in S}


class TestGenerators:
    def test_function_is_index_addressable(self):
        f = gen_function(7, 5, 2)
        assert f == gen_function(7, 5, 2)
        assert f != gen_function(7, 5, 3)
        assert f.den == 16
        assert all(0 <= v <= 400 for v in f.nums)
        assert sum(f.nums) > 0

    def test_cellset_bounds_and_determinism(self):
        e = gen_cellset(3, 5, 1)
        assert np.array_equal(e, gen_cellset(3, 5, 1))
        assert e.size > 0
        assert 0 <= e.min() and e.max() < 96
        assert np.array_equal(e, np.unique(e))
        sparse = gen_cellset(3, 5, 1, fill=0.05)
        assert sparse.size < e.size

    def test_weight_families_cycle_and_stay_positive(self):
        kinds = corpus_weight_kinds()
        assert len(kinds) >= 2
        for idx in range(len(kinds)):
            w = gen_weight(11, 5, idx)
            assert w == gen_weight(11, 5, idx)
            assert all(v > 0 for v in w.density.nums)
        forced = gen_weight(11, 5, 0, kind="power(-0.25)")
        assert all(v > 0 for v in forced.density.nums)

    def test_collections_verify_and_respect_target(self):
        for seed in range(4):
            S = gen_sparse(seed, 6, seed, target=16)
            passed, witness, _ = verify_sparsity(S)
            assert passed, witness
            count = len(members(S))
            assert 1 <= count <= 16
        assert members(gen_sparse(2, 6, 1, target=16)) == members(gen_sparse(2, 6, 1, target=16))

    def test_collection_carries_requested_grade(self):
        S = gen_sparse(0, 6, 0, TheoremParams(1, 2, 1), target=8)
        assert S.eta == F(63, 64)
        passed, _, _ = verify_sparsity(S)
        assert passed

    def test_coefficients_cover_the_collection(self):
        S = gen_sparse(5, 5, 0, target=8)
        a = gen_coefficients(5, 5, 0, S)
        assert set(a.values) == {q for q in S}
        assert all(v > 0 for _, v in a.items())


class TestInstanceBuilders:
    def test_main_theorem_instance(self):
        w, f, S, E = thm_a_instance(4, 5, 0, target=16)
        assert weighted_norm(f, 1, w.density, NormConvention.MULTIPLIER) == 1
        passed, _, _ = verify_sparsity(S)
        assert passed
        assert E.max() < 96
        w2, f2, S2, E2 = thm_a_instance(4, 5, 0, target=16)
        assert f == f2 and w == w2 and members(S) == members(S2)
        assert np.array_equal(E, E2)

    def test_general_instance_normalizes_in_r(self):
        params = TheoremParams(2, 4, 1)
        w, f, S, E = thm_c_instance(9, 5, 0, params, target=16)
        n = weighted_norm(f, 2, w.density, NormConvention.MULTIPLIER)
        assert float(n) == pytest.approx(1.0, rel=1e-12)
        assert S.eta == params.eta

    def test_power_weak_type_instance(self):
        ts = []
        for idx in range(4):
            S, f, t, w = prop32_instance(1, 5, idx, target=16)
            assert S.eta == F(1, 2)
            ts.append(t)
        assert ts == [1.1, 1.25, 1.5, 2.0]

    def test_exponent_comparison_instance(self):
        for idx in range(4):
            S, a, t1, t2, w = prop31_instance(1, 5, idx, target=16)
            assert 0 < t1 <= t2
            assert set(a.values) == {q for q in S}
