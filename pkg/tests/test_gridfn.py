import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparselab import (
    GridFunction,
    LatticeInterval,
    MalformedInputError,
    MeasureSpec,
    NormConvention,
    average,
    kolmogorov_check,
    kolmogorov_subset,
    weak_norm,
    weighted_norm,
)
from sparselab.corpus import gen_function, gen_weight

import oracles as O
from conftest import indicator, rel_err

F = Fraction


def small_gridfns():
    return st.builds(
        lambda nums, den: GridFunction(2, nums, den),
        st.lists(st.integers(0, 40), min_size=12, max_size=12),
        st.integers(1, 9),
    )


class TestGridFunction:
    def test_common_denominator_is_reduced(self):
        f = GridFunction(2, [2, 4, 6, 8, 10, 12, 2, 4, 6, 8, 10, 12], 4)
        assert f.den == 2
        assert f.nums[0] == 1

    def test_prefix_sums(self):
        f = GridFunction(2, list(range(12)), 1)
        assert f.prefix[0] == 0
        assert f.prefix[-1] == sum(range(12))

    def test_avg_and_integral_are_exact(self):
        f = GridFunction(2, list(range(12)), 5)
        q = LatticeInterval(F(0), 1, 1, 2)
        cells = list(q.cells())
        assert f.avg(q) == F(sum(range(6, 12)), 6 * 5)
        assert f.integral(q) == f.avg(q) * q.width
        assert f.integral_cells(cells) == f.integral(q)

    def test_from_fractions_round_trip(self):
        vals = [F(1, 3), F(2, 5), F(0), F(7, 15)] * 3
        f = GridFunction.from_fractions(2, vals)
        assert f.fractions() == vals

    def test_json_round_trip(self):
        f = GridFunction.from_fractions(2, [F(k, 7) for k in range(12)])
        assert GridFunction.from_json(f.to_json()).fractions() == f.fractions()

    def test_malformed_json_rejected(self):
        with pytest.raises(MalformedInputError):
            GridFunction.from_json({"L": 2})
        with pytest.raises(MalformedInputError):
            GridFunction.from_json({"L": 2, "values": ["1/0"] * 12})
        with pytest.raises(MalformedInputError):
            GridFunction.from_json({"L": 2, "values": ["1/2"] * 5})

    def test_negative_values_rejected(self):
        with pytest.raises(ValueError):
            GridFunction(2, [-1] + [0] * 11, 1)
        with pytest.raises(MalformedInputError):
            GridFunction.from_json({"L": 2, "values": ["-1/2"] * 12})

    @given(small_gridfns())
    def test_max_min_agree_with_python(self, f):
        root = LatticeInterval.root(2)
        assert f.max_on(root) == max(f.fractions())
        assert f.min_on(root) == min(f.fractions())


class TestAverage:
    def test_p1_exact(self):
        f = GridFunction(2, list(range(12)), 3)
        root = LatticeInterval.root(2)
        assert average(f, 1, root) == F(sum(range(12)), 12 * 3)

    def test_p2_half_indicator(self):
        f = indicator(3, F(0), F(1, 2))
        got = average(f, 2, LatticeInterval.root(3))
        assert rel_err(got, math.sqrt(0.5)) < 1e-12

    def test_pinf_is_sup(self):
        f = GridFunction(2, [3] * 6 + [7] * 6, 2)
        assert average(f, math.inf, LatticeInterval.root(2)) == F(7, 2)

    @given(small_gridfns())
    def test_p_monotone(self, f):
        root = LatticeInterval.root(2)
        a1 = float(average(f, 1, root))
        a2 = float(average(f, 2, root))
        a4 = float(average(f, 4, root))
        assert a1 <= a2 * (1 + 1e-12) and a2 <= a4 * (1 + 1e-12)


class TestWeightedNorm:
    def test_conventions_differ_at_p2(self):
        f = indicator(3, F(0), F(1, 2))
        w = GridFunction(3, [2] * 24, 1)
        mult = weighted_norm(f, 2, w, NormConvention.MULTIPLIER)
        meas = weighted_norm(f, 2, w, NormConvention.MEASURE)
        assert rel_err(mult, 2 * math.sqrt(0.5)) < 1e-12
        assert rel_err(meas, 1.0) < 1e-12

    def test_conventions_coincide_at_p1_exactly(self):
        for idx in range(5):
            f = gen_function(3, 3, idx, density=0.7)
            w = gen_weight(3, 3, idx).density
            a = weighted_norm(f, 1, w, NormConvention.MULTIPLIER)
            b = weighted_norm(f, 1, w, NormConvention.MEASURE)
            assert a == b and isinstance(a, F)

    def test_matches_direct_sum(self):
        rng = random.Random(0)
        for _ in range(10):
            f = gen_function(rng.randrange(99), 3, 0, density=0.8)
            w = gen_weight(rng.randrange(99), 3, 1).density
            for conv in NormConvention:
                got = weighted_norm(f, 3, w, conv)
                want = O.brute_weighted_norm(f, 3, w, conv)
                assert rel_err(got, want) < 1e-11


class TestWeakNorm:
    def test_step_function_breakpoints(self):
        # plateaus 4, 2, 1 of Lebesgue masses 1/8, 1/4, 5/8
        f = GridFunction.from_fractions(
            3, [F(4)] * 3 + [F(2)] * 6 + [F(1)] * 15
        )
        assert weak_norm(f, 1) == F(1)

    def test_exact_at_p1_vs_oracle(self):
        for idx in range(8):
            f = gen_function(5, 3, idx, density=0.6)
            w = gen_weight(5, 3, idx)
            assert weak_norm(f, 1) == O.brute_weak_norm(f, 1)
            mu = w.measure
            assert weak_norm(f, 1, mu) == O.brute_weak_norm(f, 1, mu)
            got = weak_norm(f, 1, mu, NormConvention.MULTIPLIER)
            assert got == O.brute_weak_norm(f, 1, mu, NormConvention.MULTIPLIER)

    def test_weak_below_strong(self):
        for idx in range(8):
            f = gen_function(6, 3, idx, density=0.6)
            w = gen_weight(6, 3, idx)
            weak = weak_norm(f, 1, w.measure)
            strong = weighted_norm(f, 1, w.density, NormConvention.MEASURE)
            assert weak <= strong

    @given(small_gridfns(), st.integers(1, 50))
    @settings(max_examples=60)
    def test_scaling_is_exact(self, f, c):
        assert weak_norm(f.scaled(c), 1) == F(c) * weak_norm(f, 1)

    def test_chebyshev(self):
        # λ·μ{f ≥ λ} ≤ ‖f‖_{L¹} at every value breakpoint
        for idx in range(6):
            f = gen_function(9, 3, idx, density=0.7)
            lebesgue = F(1, f.n)
            total = sum(f.fractions()) * lebesgue
            for lam in set(f.fractions()):
                if lam == 0:
                    continue
                mass = sum(lebesgue for v in f.fractions() if v >= lam)
                assert lam * mass <= total


class TestKolmogorov:
    def test_constant_function_halves(self):
        f = GridFunction(3, [1] * 24, 1)
        mu = MeasureSpec(None)
        E = np.arange(24)
        rep = kolmogorov_check(f, mu, E, 1, F(1, 2))
        assert rep.passed
        assert rep.lhs == 1 and rep.rhs == 2

    def test_monotone_in_E(self):
        f = gen_function(2, 3, 0, density=0.9)
        mu = MeasureSpec(gen_weight(2, 3, 0).density)
        fulls = kolmogorov_check(f, mu, np.arange(24), 1, F(1, 2))
        halves = kolmogorov_check(f, mu, np.arange(12), 1, F(1, 2))
        assert fulls.passed and halves.passed
        assert float(halves.lhs) <= float(fulls.lhs) + 1e-12

    def test_subset_hand_instance(self):
        # f = 4·1_{[0,1/8)} + 1: weak norm 1, tail cut at γ = 2 keeps 7/8
        base = indicator(3, F(0), F(1, 8), 4)
        f = GridFunction(3, [n + base.den for n in base.nums], base.den)
        mu = MeasureSpec(None)
        E = np.arange(24)
        Ep, rep = kolmogorov_subset(f, mu, E, 1, 1)
        assert weak_norm(f, 1) == F(1)
        assert rep.gamma == F(2)
        assert sorted(int(c) for c in Ep) == list(range(3, 24))
        assert rep.measure_check.passed
        assert rep.forward.passed and rep.converse.passed

    def test_randomized_suite(self):
        rng = random.Random(3)
        for _ in range(40):
            seed = rng.randrange(10**6)
            f = gen_function(seed, 4, 0, density=0.8)
            w = gen_weight(seed, 4, 0)
            mu = w.measure
            E = np.arange(3 << 4)
            for p, theta in ((1, F(1, 2)), (2, F(1, 3)), (F(3, 2), F(3, 4))):
                assert kolmogorov_check(f, mu, E, p, theta).passed
            for p, q in ((1, 1), (2, 1), (2, F(3, 2))):
                _, rep = kolmogorov_subset(f, mu, E, p, q)
                assert rep.measure_check.passed
                assert rep.forward.passed and rep.converse.passed


def test_measure_spec_lebesgue_vs_weighted():
    w = gen_weight(1, 2, 0)
    mu = MeasureSpec(w.density)
    leb = MeasureSpec(None)
    assert leb.is_lebesgue and not mu.is_lebesgue
    assert leb.cell_mass(0, 2, 12) == F(1, 12)
    assert mu.cell_mass(3, 2, 12) == F(w.density.nums[3], w.density.den * 12)
    assert sum(mu.masses(2), F(0)) == mu.measure_cells(range(12), 2)
