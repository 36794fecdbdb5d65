"""End-to-end verifier pipelines: reductions, theorem traces, reports."""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from conftest import indicator, ones_weight
from oracles import brute_sparse_form
from sparselab import GridFunction, CoefficientFamily, TheoremParams
from sparselab._rat import INF
from sparselab import corpus
from sparselab.errors import NormalizationError, ParameterError
from sparselab.gridfn import NormConvention, weighted_norm
from sparselab.pipelines import (
    calibration,
    extremal_search,
    log_sweep,
    normalize_for,
    prop31_check,
    prop32_check,
    reduction_construct_Eprime,
    search_csv,
    sweep_csv,
    thm_a_verify,
    thm_c_verify,
)
from sparselab.sparse import SparseCollection
from sparselab.weights import Weight, fw_constant

# Step sequence of the r = q = 1 route; the general-exponent verifier must
# reproduce it verbatim when specialized.
MAIN_ROUTE = [
    "normalization",
    "sparsity",
    "good-set",
    "exclusion",
    "layer-cake",
    "layers",
    "selection",
    "flatness",
    "holder-slices",
    "packing",
    "good-set-packing",
    "layer-geometric",
    "geometric-calibration",
    "exponent-policy",
    "assembly",
]

HIGH_Q_ROUTE = [
    "normalization",
    "sparsity",
    "good-set",
    "exclusion",
    "layer-cake",
    "layers",
    "selection",
    "flatness",
    "density-bound",
    "layer-membership",
    "geometric-series",
    "exponent-policy",
    "assembly",
]


def root_collection(L, eta=F(3, 4)):
    return SparseCollection(L, eta, {F(0): frozenset({(0, 0)})})


def quarter_chain(L=6):
    """Four nested intervals of widths 1, 1/4, 1/16, 1/64 — 3/4-sparse."""
    return SparseCollection(L, F(3, 4), {F(0): frozenset({(2 * t, 0) for t in range(4)})})


class TestTheoremParams:
    def test_flatness_exponent_is_exact(self):
        assert TheoremParams(1, INF, 1).theta == 0
        assert TheoremParams(1, 4, 1).theta == F(1, 4)
        assert TheoremParams(1, 2, 1).theta == F(1, 2)
        assert TheoremParams(3, 4, 1).theta == F(3, 4)
        assert TheoremParams(2, 8, 4).theta == F(1, 4)

    def test_sparsity_grade_matches_selection_budget(self):
        # eta = 1 - ((1-theta)/4)^(1/(1-theta)), exact when the budget is
        # rational, rounded to 32 dyadic places otherwise.
        assert TheoremParams(1, INF, 1).eta == F(3, 4)
        assert TheoremParams(1, 2, 1).eta == F(63, 64)
        assert TheoremParams(3, 4, 1).eta == 1 - F(1, 2**16)
        quarter = TheoremParams(1, 4, 1)
        assert quarter.eta.denominator <= 2**32
        assert float(1 - quarter.eta) == pytest.approx((F(3, 16)) ** (4 / 3), abs=2**-31)
        assert TheoremParams(2, 8, 4).eta == quarter.eta

    @pytest.mark.parametrize("r,s,q", [(1, 2, 4), (3, 2, 1), (0, 4, 1), (2, 2, 1)])
    def test_inadmissible_triples_are_rejected(self, r, s, q):
        with pytest.raises(ParameterError):
            TheoremParams(r, s, q)


class TestGoodSetReduction:
    def test_flat_data_keeps_everything(self):
        L, N = 5, 96
        w = ones_weight(L)
        f = normalize_for(GridFunction.constant(L, 1), w, 1)
        ep, rep = reduction_construct_Eprime(f, w, np.arange(N))
        assert ep.size == N
        assert rep.name == "good-set-reduction"
        assert rep.passed
        assert rep.lhs == F(0) and rep.rhs == F(1, 6)
        assert rep.extras["v_E"] == F(1) and rep.extras["v_Eprime"] == F(1)

    def test_retains_five_sixths_of_the_mass(self):
        for seed in range(8):
            w, f, S, E = corpus.thm_a_instance(seed, 5, 0, target=16)
            ep, rep = reduction_construct_Eprime(f, w, E)
            assert rep.passed
            v_e, v_ep = rep.extras["v_E"], rep.extras["v_Eprime"]
            assert float(v_ep) >= float(v_e) * (5 / 6) * (1 - 1e-9)
            assert np.isin(ep, E).all()

    def test_rejects_unnormalized_input(self):
        L = 5
        w = ones_weight(L)
        with pytest.raises(NormalizationError):
            reduction_construct_Eprime(GridFunction.constant(L, 2), w, np.arange(96))


class TestMainTheoremTrace:
    def test_flat_instance_runs_at_ratio_one(self):
        L, N = 6, 192
        w = ones_weight(L)
        f = normalize_for(GridFunction.constant(L, 1), w, 1)
        trace = thm_a_verify(w, f, root_collection(L), np.arange(N))
        assert trace.failing_steps() == []
        assert [s.name for s in trace.steps] == MAIN_ROUTE
        s = trace.summary
        assert s["gamma"] == 6.0
        assert s["t"] == 2.0 and s["t_prime"] == 2.0
        assert s["final_ratio"] == pytest.approx(1.0, rel=1e-12)
        assert s["C_star"] == pytest.approx(8 * math.sqrt(2), rel=1e-12)
        js = trace.to_json()
        assert js["summary"]["measures"] == {"v_E": "1/1", "v_Eprime": "1/1", "norm": "1/1"}

    def test_nested_chain_form_is_exact(self):
        # Unit mass on [0, 1/4) against the width-(1/4)^t chain: the form
        # telescopes to 1 + 1 + 1/4 + 1/16.
        L, N = 6, 192
        w = ones_weight(L)
        f = normalize_for(indicator(L, F(0), F(1, 4)), w, 1)
        S = quarter_chain(L)
        trace = thm_a_verify(w, f, S, np.arange(N))
        assert trace.failing_steps() == []
        assembly = trace.steps[-1]
        assert assembly.name == "assembly"
        assert assembly.lhs == F(37, 16)
        assert trace.summary["final_ratio"] == pytest.approx(2.3125, rel=1e-14)
        assert trace.summary["gamma"] == 6.0

    def test_form_agrees_with_direct_summation(self):
        L, N = 6, 192
        w = ones_weight(L)
        f = normalize_for(indicator(L, F(0), F(1, 4)), w, 1)
        S = quarter_chain(L)
        ep, _ = reduction_construct_Eprime(f, w, np.arange(N))
        assert brute_sparse_form(S, f, w, ep) == F(37, 16)

    def test_random_instances_trace_green(self):
        for seed in range(6):
            w, f, S, E = corpus.thm_a_instance(seed, 6, 0, target=24)
            trace = thm_a_verify(w, f, S, E)
            assert trace.failing_steps() == [], (seed, trace.failing_steps())

    def test_interpolation_exponent_policy(self):
        # t is chosen so fw^(1/t') stays under e, and never exceeds 2.
        for seed in range(6):
            w, f, S, E = corpus.thm_a_instance(seed, 6, 0, target=24)
            s = thm_a_verify(w, f, S, E).summary
            assert s["t"] <= 2.0 + 1e-15
            fw, _ = fw_constant(w, "dyadic")
            assert float(fw) ** (1.0 / s["t_prime"]) <= math.e + 1e-12


class TestGeneralExponentTrace:
    def test_specializes_to_the_main_route_exactly(self):
        L, N = 6, 192
        w = ones_weight(L)
        f = normalize_for(GridFunction.constant(L, 1), w, 1)
        for S, g in [
            (root_collection(L), f),
            (quarter_chain(L), normalize_for(indicator(L, F(0), F(1, 4)), w, 1)),
        ]:
            E = np.arange(N)
            a = thm_a_verify(w, g, S, E)
            c = thm_c_verify(w, TheoremParams(1, INF, 1), g, S, E)
            assert a.dumps() == c.dumps()

    def test_flat_instance_high_r(self):
        L, N = 5, 96
        w = ones_weight(L)
        f = normalize_for(GridFunction.constant(L, 1), w, 2)
        trace = thm_c_verify(w, TheoremParams(2, INF, 1), f, root_collection(L), np.arange(N))
        assert trace.failing_steps() == []
        assert [s.name for s in trace.steps] == MAIN_ROUTE

    @pytest.mark.parametrize("r,s,q", [(2, 4, 1), (2, 8, 4), (1, 4, 2)])
    def test_random_instances_trace_green(self, r, s, q):
        params = TheoremParams(r, s, q)
        route = HIGH_Q_ROUTE if q > r else MAIN_ROUTE
        for seed in range(4):
            w, f, S, E = corpus.thm_c_instance(seed, 5, 0, params, target=16)
            trace = thm_c_verify(w, params, f, S, E)
            assert trace.failing_steps() == [], (seed, trace.failing_steps())
            assert [s_.name for s_ in trace.steps] == route


class TestPowerOperatorWeakType:
    def test_flat_instance_halves_the_budget(self):
        L = 5
        w = ones_weight(L)
        rep = prop32_check(root_collection(L, F(1, 2)), GridFunction.constant(L, 1), 2.0, w, K=1.0)
        assert rep.passed
        assert rep.lhs == F(1) and rep.rhs == 2.0
        assert rep.extras["ratio"] == 0.5 and rep.extras["t_prime"] == 2.0

    def test_assert_mode_judges_report_mode_records(self):
        L = 5
        w = ones_weight(L)
        S = root_collection(L, F(1, 2))
        f = GridFunction.constant(L, 1)
        failing = prop32_check(S, f, 2.0, w, K=0.01, mode="assert")
        assert not failing.passed
        recorded = prop32_check(S, f, 2.0, w, K=0.01, mode="report")
        assert recorded.passed and recorded.extras["ratio"] > 1

    def test_rejects_bad_exponent_and_mode(self):
        L = 4
        w = ones_weight(L)
        S = root_collection(L, F(1, 2))
        f = GridFunction.constant(L, 1)
        with pytest.raises(ParameterError):
            prop32_check(S, f, 1.0, w)
        with pytest.raises(ParameterError):
            prop32_check(S, f, 2.0, w, mode="judge")

    def test_random_instances_within_packaged_constant(self):
        for i in range(10):
            S, f, t, w = corpus.prop32_instance(i, 5, i, target=16)
            rep = prop32_check(S, f, t, w, mode="assert")
            assert rep.passed, (i, rep.extras)

    def test_budget_scales_with_dual_exponent(self):
        S, f, _, w = corpus.prop32_instance(0, 5, 0, target=16)
        for t in (1.1, 1.25, 1.5, 2.0):
            rep = prop32_check(S, f, t, w, mode="assert")
            assert rep.passed
            assert rep.extras["t_prime"] == pytest.approx(t / (t - 1), rel=1e-15)


class TestExponentComparison:
    def test_equal_exponents_collapse_to_identity(self):
        L = 4
        S = root_collection(L, F(1, 2))
        a = CoefficientFamily({q: F(1) for q in S})
        rep = prop31_check(S, a, 2.0, 2.0, ones_weight(L), K=1.0)
        assert rep.lhs == rep.rhs
        assert rep.extras["ratio"] == 1.0 and rep.extras["factor"] == 1.0

    def test_equal_exponents_random(self):
        for i in range(5):
            S, a, _, _, w = corpus.prop31_instance(i, 5, i, target=16)
            rep = prop31_check(S, a, 1.5, 1.5, w, K=1.0)
            assert rep.extras["ratio"] == 1.0

    def test_random_instances_within_packaged_constant(self):
        for i in range(8):
            S, a, t1, t2, w = corpus.prop31_instance(i, 5, i, target=16)
            rep = prop31_check(S, a, t1, t2, w, mode="assert")
            assert rep.passed, (i, rep.extras)

    def test_rejects_disordered_exponents(self):
        L = 4
        S = root_collection(L, F(1, 2))
        a = CoefficientFamily({q: F(1) for q in S})
        with pytest.raises(ParameterError):
            prop31_check(S, a, 2.0, 1.5, ones_weight(L))


class TestCalibration:
    def test_packaged_constants(self):
        cal = calibration()
        assert cal["prop32_K"] == 1.0
        assert cal["prop31_K"] == pytest.approx(1.81466055662527, rel=1e-12)
        assert cal["thm_a_Cstar_max"] == pytest.approx(9.952634432547466, rel=1e-12)
        assert cal["thm_a_max_ratio"] == pytest.approx(0.4259417439478134, rel=1e-12)
        assert cal["corpus"] == {
            "seed": 0,
            "prop_instances": 300,
            "prop_L": 6,
            "thm_a_instances": 300,
            "thm_a_L": 8,
        }


class TestNormalization:
    def test_unit_exponent_is_exact(self):
        w = Weight(corpus.gen_weight(3, 5, 0).density)
        f = corpus.gen_function(3, 5, 0, density=0.8)
        g = normalize_for(f, w, 1)
        assert weighted_norm(g, 1, w.density, NormConvention.MULTIPLIER) == 1

    def test_square_exponent_within_float_tolerance(self):
        w = Weight(corpus.gen_weight(4, 5, 1).density)
        f = corpus.gen_function(4, 5, 1, density=0.8)
        g = normalize_for(f, w, 2)
        n = weighted_norm(g, 2, w.density, NormConvention.MULTIPLIER)
        assert float(n) == pytest.approx(1.0, rel=1e-12)


def small_S(seed, L, idx):
    return corpus.gen_sparse(seed, L, idx, target=8)


def small_f(seed, L, idx):
    return corpus.gen_function(seed, L, idx, density=0.9)


class TestLogSweep:
    def test_flat_family_row(self):
        rows = log_sweep(
            lambda eps, seed, L: Weight(GridFunction.constant(L, 1)),
            [0.0],
            small_S,
            small_f,
            L=4,
            trials=2,
        )
        (row,) = rows
        assert set(row) == {"eps", "a1", "fw_dyadic", "fw_exact", "measured", "bound"}
        assert row["a1"] == 1.0 and row["fw_dyadic"] == 1.0 and row["bound"] == 1.0

    def test_power_family_rows_and_determinism(self):
        args = ("power", [-0.001, -0.5], small_S, small_f)
        rows = log_sweep(*args, L=4, trials=2)
        assert len(rows) == 2
        assert rows[1]["fw_dyadic"] > rows[0]["fw_dyadic"] >= 1.0
        assert rows[1]["bound"] > rows[0]["bound"]
        csv = sweep_csv(rows)
        assert csv.startswith("eps,a1,fw_dyadic,fw_exact,measured,bound\n")
        assert csv == sweep_csv(log_sweep(*args, L=4, trials=2))


class TestExtremalSearch:
    def test_trajectory_shape_and_monotone_best(self):
        res = extremal_search("thm-a-ratio", seed=5, iters=6, L=4, max_members=8)
        assert res.objective == "thm-a-ratio"
        assert [it for it, _, _ in res.trajectory] == list(range(6))
        bests = [b for _, _, b in res.trajectory]
        assert bests == sorted(bests)
        assert res.best_value == bests[-1]
        assert all(b >= v or b == max(bests[: i + 1]) for i, (_, v, b) in enumerate(res.trajectory))

    def test_same_seed_reproduces(self):
        a = extremal_search("thm-a-ratio", seed=9, iters=4, L=4, max_members=8)
        b = extremal_search("thm-a-ratio", seed=9, iters=4, L=4, max_members=8)
        assert a.trajectory == b.trajectory

    def test_other_objectives_and_rejection(self):
        res = extremal_search("prop32-ratio", seed=1, iters=2, L=4, max_members=8)
        assert len(res.trajectory) == 2
        with pytest.raises(ParameterError):
            extremal_search("sharpest", seed=0, iters=1, L=4)

    def test_csv_round(self):
        res = extremal_search("thm-a-ratio", seed=2, iters=3, L=4, max_members=8)
        csv = search_csv(res.trajectory)
        lines = csv.strip().split("\n")
        assert lines[0] == "iter,value,best"
        assert len(lines) == 4
