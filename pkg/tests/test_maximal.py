import random
from fractions import Fraction

import numpy as np
import pytest

from sparselab import (
    Family,
    GridFunction,
    MaximalMode,
    ParameterError,
    Weight,
    bilinear_maximal,
    maximal,
    n_weak_check,
    weighted_n,
)
from sparselab.corpus import gen_function, gen_weight
from sparselab.maximal import exact_maximal_pairs

import oracles as O
from conftest import indicator

F = Fraction


def test_half_indicator_single_grid():
    f = indicator(3, F(0), F(1, 2))
    out = maximal(f, MaximalMode("dyadic", 1, F(0))).fractions()
    assert out[:12] == [F(1)] * 12
    assert out[12:] == [F(1, 2)] * 12


def test_mode_validation():
    with pytest.raises(ParameterError):
        MaximalMode("triadic", 1)
    with pytest.raises(ParameterError):
        MaximalMode("dyadic", 0)


class TestAgainstOracles:
    @pytest.mark.parametrize("idx", range(4))
    def test_exact_mode(self, idx):
        f = gen_function(31, 4, idx, density=0.7)
        assert maximal(f, MaximalMode("exact", 1)).fractions() == O.brute_exact_maximal(f)

    @pytest.mark.parametrize("idx", range(4))
    def test_dyadic_mode(self, idx):
        f = gen_function(37, 4, idx, density=0.7)
        assert maximal(f, MaximalMode("dyadic", 1)).fractions() == O.brute_dyadic_maximal(f)

    def test_single_grid(self):
        f = gen_function(41, 4, 0, density=0.8)
        got = maximal(f, MaximalMode("dyadic", 1, F(2, 3))).fractions()
        assert got == O.brute_dyadic_maximal(f, F(2, 3))

    def test_r_average_variants(self):
        f = gen_function(43, 3, 1, density=0.9)
        got = maximal(f, MaximalMode("dyadic", 2)).floats
        want = np.array(O.brute_maximal_r(f, 2, "dyadic"))
        assert np.allclose(got, want, rtol=1e-11)
        got = maximal(f, MaximalMode("exact", 2)).floats
        want = np.array(O.brute_maximal_r(f, 2, "exact"))
        assert np.allclose(got, want, rtol=1e-11)


class TestPointwiseOrder:
    def test_function_below_exact_maximal(self):
        for idx in range(5):
            f = gen_function(47, 4, idx, density=0.6)
            m = maximal(f, MaximalMode("exact", 1))
            assert all(a <= b for a, b in zip(f.fractions(), m.fractions()))

    def test_dyadic_below_exact(self):
        for idx in range(5):
            f = gen_function(53, 4, idx, density=0.6)
            d = maximal(f, MaximalMode("dyadic", 1)).fractions()
            e = maximal(f, MaximalMode("exact", 1)).fractions()
            assert all(a <= b for a, b in zip(d, e))

    def test_sublinear(self):
        f = gen_function(59, 3, 0, density=0.8)
        g = gen_function(59, 3, 1, density=0.8)
        fg = GridFunction(
            f.L,
            [a * g.den + b * f.den for a, b in zip(f.nums, g.nums)],
            f.den * g.den,
        )
        for kind in ("dyadic", "exact"):
            mf = maximal(f, MaximalMode(kind, 1)).fractions()
            mg = maximal(g, MaximalMode(kind, 1)).fractions()
            mfg = maximal(fg, MaximalMode(kind, 1)).fractions()
            assert all(c <= a + b for a, b, c in zip(mf, mg, mfg))


def test_exact_pairs_reconstruct_values():
    f = gen_function(61, 4, 2, density=0.7)
    pairs = exact_maximal_pairs(f.nums)
    vals = [F(int(s), int(ln) * f.den) for s, ln in pairs]
    assert vals == O.brute_exact_maximal(f)


class TestWeightedVariant:
    def test_constant_inputs(self):
        f = GridFunction.constant(3, 1)
        w = Weight(GridFunction.constant(3, 4))
        out = weighted_n(f, w, F(1, 2), F(0))
        assert np.allclose(out.floats, 0.5, rtol=1e-12)

    def test_theta_zero_is_plain_maximal(self):
        f = gen_function(67, 3, 0, density=0.8)
        w = gen_weight(67, 3, 0)
        got = weighted_n(f, w, 0, F(0))
        want = maximal(f, MaximalMode("dyadic", 1, F(0)))
        assert got.fractions() == want.fractions()

    @pytest.mark.parametrize("theta", [0, F(1, 4), F(1, 2), F(9, 10)])
    def test_oracle_agreement(self, theta):
        f = gen_function(71, 3, 1, density=0.8)
        w = gen_weight(71, 3, 1)
        got = weighted_n(f, w, theta, F(1, 3))
        want = O.brute_weighted_n(f, w, theta, F(1, 3))
        if theta == 0:
            assert got.fractions() == want
        else:
            assert np.allclose(got.floats, [float(x) for x in want], rtol=1e-11)

    @pytest.mark.parametrize("theta", [0, F(1, 4), F(1, 2), F(9, 10)])
    def test_weak_type_suite(self, theta):
        rng = random.Random(int(theta * 100))
        for _ in range(25):
            seed = rng.randrange(10**6)
            f = gen_function(seed, 4, 0, density=0.8)
            w = gen_weight(seed, 4, 0)
            rep = n_weak_check(f, w, theta, F(0))
            assert rep.passed, rep.to_json()


class TestBilinear:
    def test_unit_second_slot_degenerates(self):
        f = gen_function(73, 3, 0, density=0.8)
        ones = GridFunction.constant(3, 1)
        got = bilinear_maximal(f, ones, 1, 1, Family.DYADIC)
        want = maximal(f, MaximalMode("dyadic", 1))
        assert np.allclose(got.floats, want.floats, rtol=1e-12)

    def test_equal_slots_square_the_scalar_maximal(self):
        f = gen_function(79, 3, 1, density=0.9)
        got = bilinear_maximal(f, f, 1, 1, Family.DYADIC)
        m = maximal(f, MaximalMode("dyadic", 1))
        assert np.allclose(got.floats, m.floats**2, rtol=1e-12)

    def test_oracle_agreement_both_families(self):
        f = gen_function(83, 3, 0, density=0.8)
        g = gen_function(83, 3, 1, density=0.8)
        got = bilinear_maximal(f, g, 1, 1, Family.DYADIC)
        want = O.brute_bilinear_maximal(f, g, 1, 1, "dyadic-three-grids")
        assert np.allclose(got.floats, want, rtol=1e-11)
        got = bilinear_maximal(f, g, 2, 4, Family.ALL_INTERVALS)
        want = O.brute_bilinear_maximal(f, g, 2, 4, "all-lattice-intervals")
        assert np.allclose(got.floats, want, rtol=1e-11)
