import math
import random
from fractions import Fraction

import pytest

from sparselab import (
    CellSpan,
    Family,
    GridFunction,
    LatticeInterval,
    ParameterError,
    Weight,
    a1_constant,
    ap_constant,
    aprs_constant,
    fw_constant,
    generate_weight,
    limited_range_transform,
)
from sparselab._rat import INF
from sparselab.weights import parse_kind

import oracles as O
from conftest import ones_weight, rel_err

F = Fraction


class TestFlatness:
    def test_constant_weight_is_flat(self):
        for c in (1, 7, F(3, 5)):
            w = Weight(GridFunction.constant(4, c))
            for fam in Family:
                value, witness = a1_constant(w, fam)
                assert value == 1

    def test_scalar_invariance_exact(self):
        w = generate_weight("doubling-random", 11, 3)
        scaled = Weight(w.density.scaled(F(7, 3)))
        for fam in Family:
            assert a1_constant(w, fam)[0] == a1_constant(scaled, fam)[0]

    def test_two_step_frozen_values(self):
        # two-step profile, seed 3, L = 4: plateaus at 1 and 13
        w = generate_weight("two-step", 3, 4)
        assert sorted(set(w.density.nums)) == [1, 13] and w.density.den == 1
        value, witness = a1_constant(w, Family.DYADIC)
        assert value == 11
        assert isinstance(witness, LatticeInterval)
        assert w.density.avg(witness) == 11 * w.density.min_on(witness)
        value, witness = a1_constant(w, Family.ALL_INTERVALS)
        assert value == F(469, 37)
        assert isinstance(witness, CellSpan)

    def test_oracle_agreement_small(self):
        for idx, kind in enumerate(("two-step", "doubling-random", "random-a1")):
            w = generate_weight(kind, 20 + idx, 3)
            assert a1_constant(w, Family.DYADIC)[0] == O.brute_a1(w, "dyadic-three-grids")
            assert (
                a1_constant(w, Family.ALL_INTERVALS)[0]
                == O.brute_a1(w, "all-lattice-intervals")
            )

    def test_all_intervals_dominates_dyadic(self):
        for seed in range(6):
            w = generate_weight("doubling-random", seed, 4)
            assert a1_constant(w, Family.ALL_INTERVALS)[0] >= a1_constant(w, Family.DYADIC)[0]

    def test_never_below_one(self):
        for seed in range(6):
            w = generate_weight("two-step", seed, 3)
            assert a1_constant(w, Family.DYADIC)[0] >= 1


class TestMaximalAverage:
    def test_constant_weight(self):
        w = Weight(GridFunction.constant(4, 5))
        for mode in ("dyadic", "exact"):
            value, witness = fw_constant(w, mode)
            assert value == 1

    def test_two_step_frozen_values(self):
        w = generate_weight("two-step", 3, 4)
        assert fw_constant(w, "dyadic")[0] == F(8, 5)
        assert fw_constant(w, "exact")[0] == F(62921, 34650)

    def test_oracle_agreement_small(self):
        for seed in (2, 9, 17):
            w = generate_weight("doubling-random", seed, 3)
            assert fw_constant(w, "dyadic")[0] == O.brute_fw(w, "dyadic")
            assert fw_constant(w, "exact")[0] == O.brute_fw(w, "exact")

    def test_dyadic_below_exact(self):
        for seed in range(8):
            w = generate_weight("doubling-random", 40 + seed, 4)
            assert fw_constant(w, "dyadic")[0] <= fw_constant(w, "exact")[0]

    def test_scalar_invariance_exact(self):
        w = generate_weight("two-step", 5, 3)
        scaled = Weight(w.density.scaled(9))
        for mode in ("dyadic", "exact"):
            assert fw_constant(w, mode)[0] == fw_constant(scaled, mode)[0]


class TestLimitedRange:
    def test_trivial_class_reduces_to_flatness(self):
        # r = 1, s = ∞: the two-exponent constant collapses to [w]_p at p = 1
        w = generate_weight("two-step", 1, 3)
        v, _ = aprs_constant(w, 1, 1, INF, Family.DYADIC)
        assert rel_err(v, float(a1_constant(w, Family.DYADIC)[0])) < 1e-12

    def test_matches_p_constant_at_r1_sinf(self):
        w = generate_weight("doubling-random", 8, 3)
        for p in (F(3, 2), 2, 3):
            v, _ = aprs_constant(w, p, 1, INF, Family.DYADIC)
            assert rel_err(v, ap_constant(w, p, Family.DYADIC)[0]) < 1e-12

    def test_constant_weight_is_one(self):
        w = ones_weight(3)
        for (p, r, s) in ((2, 1, INF), (2, 1, 4), (3, 2, 8)):
            assert aprs_constant(w, p, r, s, Family.DYADIC)[0] == pytest.approx(1.0)

    def test_oracle_agreement_small(self):
        w = generate_weight("doubling-random", 23, 3)
        for (p, r, s) in ((2, 1, INF), (2, 1, 4), (3, 2, 8)):
            for fam, name in (
                (Family.DYADIC, "dyadic-three-grids"),
                (Family.ALL_INTERVALS, "all-lattice-intervals"),
            ):
                v, _ = aprs_constant(w, p, r, s, fam)
                assert rel_err(v, O.brute_aprs(w, p, r, s, name)) < 1e-11

    def test_frozen_two_step_value(self):
        w = generate_weight("two-step", 3, 4)
        v, _ = aprs_constant(w, 2, 1, INF, Family.DYADIC)
        assert rel_err(v, 6.538461538461538) < 1e-12

    def test_map_exponents(self):
        w = ones_weight(3)
        v, m = limited_range_transform(w, 1, 2)
        assert m.exponent == 2
        assert m.p_rs(F(4, 3)) == 2
        v, m = limited_range_transform(w, 1, INF)
        assert m.exponent == 1 and m.p_rs(3) == 3

    def test_rescaling_identity(self):
        # [w]_{p,(r,s)} = [v]_{p_rs}^{1/r−1/s} with v = w^{1/(1/r−1/s)}
        for seed in range(5):
            w = generate_weight("doubling-random", 60 + seed, 4)
            p, r, s = 3, 2, 4
            lhs, _ = aprs_constant(w, p, r, s, Family.DYADIC)
            v, m = limited_range_transform(w, r, s)
            rhs_base, _ = ap_constant(v, m.p_rs(p), Family.DYADIC)
            rhs = rhs_base ** (1.0 / float(r) - 1.0 / float(s))
            assert rel_err(lhs, rhs) < 1e-9

    def test_bad_ranges_rejected(self):
        w = ones_weight(3)
        with pytest.raises(ParameterError):
            limited_range_transform(w, 2, 2)
        with pytest.raises(ParameterError):
            aprs_constant(w, 2, 3, 2, Family.DYADIC)


class TestGeneration:
    def test_deterministic(self):
        for kind in ("constant", "two-step", "doubling-random"):
            a = generate_weight(kind, 5, 4)
            b = generate_weight(kind, 5, 4)
            assert a.density.nums == b.density.nums and a.density.den == b.density.den

    def test_positive_everywhere(self):
        for kind in ("two-step", "power", "random-a1", "doubling-random"):
            w = generate_weight(kind, 1, 4)
            assert min(w.density.nums) > 0

    def test_power_cells_match_closed_form(self):
        # cell [a,b) carries the exact mean of x^β: (b^{β+1}−a^{β+1})/((β+1)(b−a))
        beta = -0.5
        w = generate_weight("power", 0, 4, beta=beta)
        n = 48
        for i in (0, 1, 7, 40):
            a, b = i / n, (i + 1) / n
            want = (b**0.5 - a**0.5) * 2 / (b - a)
            assert abs(float(w.density.frac(i)) - want) <= 1.0 / 4096 + 1e-12

    def test_power_flatness_grows_with_resolution(self):
        vals = []
        for L in (3, 4, 5):
            w = generate_weight("power", 0, L, beta=-0.5)
            vals.append(a1_constant(w, Family.DYADIC)[0])
        assert vals[0] <= vals[1] <= vals[2]

    def test_random_a1_lands_near_target(self):
        w = generate_weight("random-a1", 42, 4, target=8)
        got = float(a1_constant(w, Family.DYADIC)[0])
        assert 7.2 <= got <= 8.8

    def test_parse_kind_forms(self):
        assert parse_kind("constant") == ("constant", {})
        kind, params = parse_kind("power(-0.5)")
        assert kind == "power" and math.isclose(float(params["beta"]), -0.5)
        kind, params = parse_kind("random-a1(8)")
        assert kind == "random-a1" and params["target"] == 8

    def test_parse_kind_rejects_unknown(self):
        with pytest.raises(ParameterError):
            parse_kind("cantor-dust")
        with pytest.raises(ParameterError):
            generate_weight("cantor-dust", 0, 3)

    def test_weight_requires_positivity(self):
        with pytest.raises(Exception):
            Weight(GridFunction(2, [0] * 12, 1))


def test_witness_attains_reported_value():
    rng = random.Random(6)
    for _ in range(5):
        w = generate_weight("doubling-random", rng.randrange(999), 3)
        value, q = a1_constant(w, Family.DYADIC)
        assert w.density.avg(q) == value * w.density.min_on(q)
        value, span = a1_constant(w, Family.ALL_INTERVALS)
        cells = w.density.nums[span.a : span.b]
        assert F(sum(cells), len(cells) * min(cells)) == value
