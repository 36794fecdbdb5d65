import random
from fractions import Fraction

import pytest

from sparselab import (
    CellSpan,
    LatticeInterval,
    Resolution,
    SHIFTS,
    children,
    grid_intervals,
    one_third_cover,
)
from sparselab.lattice import ScaleExhaustedError, k_range

import oracles as O

F = Fraction


def test_shift_set():
    assert SHIFTS == (F(0), F(1, 3), F(2, 3))


def test_resolution_bounds():
    assert Resolution(4).cell_count == 48
    assert Resolution(4).cell_width == F(1, 48)
    with pytest.raises(ValueError):
        Resolution(-1)


class TestInterval:
    def test_root_geometry(self, root3):
        assert root3.start == 0 and root3.end == 1
        assert root3.width == 1
        assert root3.n_cells == 24
        assert root3.start_index == 0 and root3.end_index == 24

    def test_children_bisect_unshifted(self, root3):
        left, right = children(root3)
        assert (left.start, left.end) == (F(0), F(1, 2))
        assert (right.start, right.end) == (F(1, 2), F(1))
        assert left.parent() == root3 and right.parent() == root3

    def test_children_bisect_shifted(self):
        q = LatticeInterval(F(1, 3), 1, 0, 4)
        assert (q.start, q.end) == (F(1, 3), F(5, 6))
        left, right = children(q)
        assert (left.start, left.end) == (F(1, 3), F(7, 12))
        assert (right.start, right.end) == (F(7, 12), F(5, 6))

    def test_children_at_bottom_scale_exhausted(self):
        q = LatticeInterval(F(0), 3, 5, 3)
        with pytest.raises(ScaleExhaustedError):
            children(q)

    def test_cells_partition_under_children(self):
        q = LatticeInterval(F(2, 3), 2, -1, 5)
        left, right = children(q)
        assert list(left.cells()) + list(right.cells()) == list(q.cells())

    def test_contains_and_point_lookup(self, root3):
        sub = LatticeInterval(F(0), 2, 1, 3)
        assert root3.contains(sub) and not sub.contains(root3)
        assert LatticeInterval.containing_point(F(0), 2, F(3, 8), 3) == sub
        assert LatticeInterval.containing_point(F(0), 2, F(1, 2), 3) != sub
        assert sub.contains_cell(6) and not sub.contains_cell(12)

    def test_out_of_domain_k_rejected(self):
        with pytest.raises(ValueError):
            LatticeInterval(F(0), 1, 2, 3)
        with pytest.raises(ValueError):
            LatticeInterval(F(1, 3), 0, 0, 3)  # no scale-0 member off-grid

    def test_json_round_trip(self):
        q = LatticeInterval(F(1, 3), 3, -2, 5)
        assert LatticeInterval.from_json(q.to_json(), 5) == q


@pytest.mark.parametrize("alpha", SHIFTS)
@pytest.mark.parametrize("j", range(7))
def test_k_range_matches_direct_filter(alpha, j):
    assert list(k_range(alpha, j)) == O.brute_k_range(alpha, j)


@pytest.mark.parametrize("alpha", SHIFTS)
def test_grid_is_disjoint_at_each_scale(alpha):
    L = 5
    for j in range(L + 1):
        seen = set()
        for q in grid_intervals(L, alpha, j_min=j, j_max=j):
            cells = set(q.cells())
            assert not (cells & seen)
            seen |= cells


def test_grid_intervals_order_is_coarse_first():
    qs = list(grid_intervals(4, F(1, 3)))
    js = [q.j for q in qs]
    assert js == sorted(js)
    assert qs == list(grid_intervals(4, F(1, 3)))  # deterministic


class TestOneThirdCover:
    def test_shifted_interval_needs_shifted_grid(self):
        alpha, q = one_third_cover(F(1, 3), F(2, 3), 4)
        assert alpha == F(1, 3)
        assert (q.start, q.end) == (F(1, 3), F(5, 6))

    def test_centered_interval_takes_root(self):
        alpha, q = one_third_cover(F(1, 4), F(3, 4), 4)
        assert (q.start, q.end) == (F(0), F(1))

    def test_grid_member_covers_itself(self):
        alpha, q = one_third_cover(F(0), F(1, 2), 4)
        assert alpha == F(0) and (q.start, q.end) == (F(0), F(1, 2))

    def test_rejects_off_domain_and_off_lattice_inputs(self):
        with pytest.raises(ValueError):
            one_third_cover(F(-1, 4), F(1, 4), 3)
        with pytest.raises(ValueError):
            one_third_cover(F(0), F(1, 5), 3)

    def test_every_lattice_interval_has_a_cover(self):
        # the 6×-cover guarantee leaves no uncovered interval on this domain
        n = 3 << 3
        for a in range(n):
            for b in range(a + 1, n + 1):
                one_third_cover(F(a, n), F(b, n), 3)

    def test_cover_law_randomized(self):
        # width ≤ 6·|target| over 1000 random lattice intervals of width ≤ 1/8
        rng = random.Random(1)
        L, n = 6, 3 << 6
        for _ in range(1000):
            a = rng.randrange(0, n - 1)
            b = rng.randrange(a + 1, min(a + n // 8, n) + 1)
            start, end = F(a, n), F(b, n)
            alpha, q = one_third_cover(start, end, L)
            assert q.start <= start and end <= q.end
            assert q.width <= 6 * (end - start)

    def test_matches_exhaustive_minimum(self):
        rng = random.Random(2)
        L, n = 4, 48
        for _ in range(80):
            a = rng.randrange(0, n - 1)
            b = rng.randrange(a + 1, min(a + n // 8, n) + 1)
            got = one_third_cover(F(a, n), F(b, n), L)
            assert got == O.brute_one_third_cover(F(a, n), F(b, n), L)


def test_cell_span_length():
    s = CellSpan(3, 17, 4)
    assert s.b - s.a == 14
    assert s.L == 4
