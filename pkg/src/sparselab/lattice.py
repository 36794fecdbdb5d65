"""Exact geometry of shifted dyadic grids on the unit interval.

The working domain is ``[0, 1)`` at a finite resolution ``L``: it is tiled by
``3·2^L`` *cells* of width ``1/(3·2^L)``.  Three dyadic grids live on top of
this lattice, one per shift ``alpha ∈ {0, 1/3, 2/3}``; the grid interval of
shift ``alpha`` at scale ``j`` and translation ``k`` is

    [ k·2^-j + alpha,  (k+1)·2^-j + alpha )

so it has length ``2^-j`` exactly and, for ``j ≤ L``, its endpoints are
lattice points (the factor 3 in the cell count exists precisely to absorb the
thirds).  Intervals that stick out of ``[0, 1)`` are not part of the lattice:
in particular the shifted grids have no scale-0 member.

The classical covering fact that makes three shifts enough: any interval with
lattice endpoints is contained in a grid interval of one of the three shifts
of at most six times its length (`one_third_cover`), because at every scale
the three shifted lattices of endpoints are pairwise ``2^-j/3`` separated.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

__all__ = [
    "SHIFTS",
    "Resolution",
    "LatticeInterval",
    "LatticeError",
    "ScaleExhaustedError",
    "NoCoverError",
    "CellSpan",
    "children",
    "one_third_cover",
    "grid_intervals",
    "k_range",
    "shift_to_str",
    "shift_from_str",
]

#: The three admissible grid shifts, in tie-break order.
SHIFTS: tuple[Fraction, ...] = (Fraction(0), Fraction(1, 3), Fraction(2, 3))

_SHIFT_STR = {Fraction(0): "0", Fraction(1, 3): "1/3", Fraction(2, 3): "2/3"}


def shift_to_str(alpha: Fraction) -> str:
    return _SHIFT_STR[Fraction(alpha)]


def shift_from_str(s: str) -> Fraction:
    alpha = Fraction(s)
    if alpha not in _SHIFT_STR:
        raise ValueError(f"not a grid shift: {s!r}")
    return alpha


class LatticeError(Exception):
    """Base class for lattice-domain errors."""


class ScaleExhaustedError(LatticeError):
    """Raised when bisecting an interval already at the finest scale."""


class NoCoverError(LatticeError):
    """Raised when no in-domain grid interval of ≤ 6× length covers the input."""


@dataclass(frozen=True, slots=True)
class Resolution:
    """Finest dyadic scale; fixes the cell lattice {k/(3·2^L)}."""

    L: int

    def __post_init__(self) -> None:
        if self.L < 0:
            raise ValueError("resolution L must be >= 0")

    @property
    def cell_count(self) -> int:
        return 3 << self.L

    @property
    def cell_width(self) -> Fraction:
        return Fraction(1, self.cell_count)


def k_range(alpha: Fraction, j: int) -> range:
    """Translations k for which the (alpha, j, k) interval lies inside [0, 1).

    Start ``k·2^-j + alpha ≥ 0`` gives the lower end; end ``≤ 1`` the upper.
    For alpha = 0 this is simply range(2^j); the shifted grids lose a sliver
    at each boundary (and all of scale 0).
    """
    t = int(3 * Fraction(alpha))  # 0, 1, 2
    if t == 0:
        return range(0, 1 << j)
    # ceil(-t·2^j / 3) .. floor((3-t)·2^j / 3) - 1, inclusive
    lo = -((t << j) // 3)  # ceil of a negative fraction
    hi = ((3 - t) << j) // 3 - 1
    return range(lo, hi + 1)


@dataclass(frozen=True, slots=True)
class LatticeInterval:
    """A grid interval [k·2^-j + alpha, (k+1)·2^-j + alpha) at resolution L.

    Endpoints are exact: `start_index`/`end_index` are integers over the
    denominator 3·2^L, and the half-open cell range `cells()` is what every
    integral/measure computation consumes.
    """

    alpha: Fraction
    j: int
    k: int
    L: int

    def __post_init__(self) -> None:
        if Fraction(self.alpha) not in _SHIFT_STR:
            raise ValueError(f"not a grid shift: {self.alpha!r}")
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if not 0 <= self.j <= self.L:
            raise ValueError(f"scale j={self.j} outside 0..L={self.L}")
        if self.start_index < 0 or self.end_index > (3 << self.L):
            raise ValueError(
                f"interval (alpha={self.alpha}, j={self.j}, k={self.k}) "
                f"not inside [0,1)"
            )

    # -- exact geometry ----------------------------------------------------

    @property
    def start(self) -> Fraction:
        return Fraction(self.k, 1 << self.j) + self.alpha

    @property
    def end(self) -> Fraction:
        return self.start + self.width

    @property
    def width(self) -> Fraction:
        return Fraction(1, 1 << self.j)

    @property
    def start_index(self) -> int:
        t = int(3 * self.alpha)
        return 3 * self.k * (1 << (self.L - self.j)) + t * (1 << self.L)

    @property
    def end_index(self) -> int:
        return self.start_index + self.n_cells

    @property
    def n_cells(self) -> int:
        return 3 << (self.L - self.j)

    def cells(self) -> range:
        """Indices of the lattice cells tiling this interval."""
        return range(self.start_index, self.end_index)

    # -- tree structure ----------------------------------------------------

    def children(self) -> tuple["LatticeInterval", "LatticeInterval"]:
        if self.j >= self.L:
            raise ScaleExhaustedError(
                f"cannot bisect a scale-{self.j} interval at resolution L={self.L}"
            )
        left = LatticeInterval(self.alpha, self.j + 1, 2 * self.k, self.L)
        right = LatticeInterval(self.alpha, self.j + 1, 2 * self.k + 1, self.L)
        return left, right

    def parent(self) -> "LatticeInterval":
        if self.j == 0:
            raise LatticeError("scale-0 interval has no parent")
        return LatticeInterval(self.alpha, self.j - 1, self.k // 2, self.L)

    def contains(self, other: "LatticeInterval") -> bool:
        return (
            self.start_index <= other.start_index
            and other.end_index <= self.end_index
        )

    def contains_cell(self, i: int) -> bool:
        return self.start_index <= i < self.end_index

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {"alpha": shift_to_str(self.alpha), "j": self.j, "k": self.k}

    @classmethod
    def from_json(cls, obj: dict, L: int) -> "LatticeInterval":
        return cls(shift_from_str(obj["alpha"]), int(obj["j"]), int(obj["k"]), L)

    @classmethod
    def containing_point(
        cls, alpha: Fraction, j: int, x: Fraction, L: int
    ) -> "LatticeInterval":
        """The grid-(alpha, j) interval whose half-open span contains x."""
        k = (Fraction(x) - Fraction(alpha)) * (1 << j)
        return cls(alpha, j, _floor(k), L)

    @classmethod
    def root(cls, L: int) -> "LatticeInterval":
        return cls(Fraction(0), 0, 0, L)

    def __repr__(self) -> str:  # compact, math-style
        return f"[{self.start}, {self.end})@{shift_to_str(self.alpha)}"


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def children(Q: LatticeInterval) -> tuple[LatticeInterval, LatticeInterval]:
    """The two half-intervals of Q in its own grid (module-level alias)."""
    return Q.children()


@dataclass(frozen=True, slots=True)
class CellSpan:
    """An arbitrary lattice-endpoint interval [a, b) given by cell indices.

    Not necessarily a grid interval of any shift; this is the witness type
    for suprema taken over *all* lattice intervals.
    """

    a: int
    b: int
    L: int

    def __post_init__(self) -> None:
        if not 0 <= self.a < self.b <= (3 << self.L):
            raise ValueError(f"bad cell span [{self.a}, {self.b}) at L={self.L}")

    @property
    def start(self) -> Fraction:
        return Fraction(self.a, 3 << self.L)

    @property
    def end(self) -> Fraction:
        return Fraction(self.b, 3 << self.L)

    @property
    def width(self) -> Fraction:
        return Fraction(self.b - self.a, 3 << self.L)

    @property
    def start_index(self) -> int:
        return self.a

    @property
    def end_index(self) -> int:
        return self.b

    @property
    def n_cells(self) -> int:
        return self.b - self.a

    def cells(self) -> range:
        return range(self.a, self.b)

    def to_json(self) -> dict:
        return {"cells": [self.a, self.b]}

    def __repr__(self) -> str:
        return f"[{self.start}, {self.end})*"


def grid_intervals(
    L: int, alpha: Fraction | None = None, j_min: int = 0, j_max: int | None = None
) -> Iterator[LatticeInterval]:
    """Enumerate every in-domain grid interval, coarse scales first.

    Restricted to one shift when `alpha` is given.  Order is deterministic:
    (j, k) within a shift, shifts in SHIFTS order when iterating all three.
    """
    shifts = SHIFTS if alpha is None else (Fraction(alpha),)
    top = L if j_max is None else min(j_max, L)
    for a in shifts:
        for j in range(j_min, top + 1):
            for k in k_range(a, j):
                yield LatticeInterval(a, j, k, L)


def one_third_cover(
    start: Fraction, end: Fraction, L: int
) -> tuple[Fraction, LatticeInterval]:
    """Smallest in-domain grid interval covering [start, end) within 6× length.

    Returns ``(alpha, cover)``.  Candidates are scanned over all three shifts
    at every scale whose length is between |Q| and 6|Q|; ties are broken by
    smaller length first, then by shift order 0 < 1/3 < 2/3.  Raises
    `NoCoverError` when every admissible candidate protrudes out of [0, 1) —
    a truncated-domain artifact, surfaced rather than patched.
    """
    start, end = Fraction(start), Fraction(end)
    if not (0 <= start < end <= 1):
        raise ValueError("need 0 <= start < end <= 1")
    n = 3 << L
    if (start * n).denominator != 1 or (end * n).denominator != 1:
        raise ValueError("endpoints must be lattice points k/(3·2^L)")
    length = end - start

    best: tuple[Fraction, LatticeInterval] | None = None
    for j in range(L + 1):
        w = Fraction(1, 1 << j)
        if w < length:
            break  # finer scales cannot cover
        if w > 6 * length:
            continue
        for a in SHIFTS:
            k = _floor((start - a) * (1 << j))
            if k not in k_range(a, j):
                continue
            cand = LatticeInterval(a, j, k, L)
            if cand.start <= start and end <= cand.end:
                if best is None or cand.width < best[1].width:
                    best = (a, cand)
                # equal widths: first shift in SHIFTS order wins; since we
                # scan shifts in order, only a strictly smaller width replaces
    if best is None:
        raise NoCoverError(
            f"no in-domain grid interval of length <= 6·{length} covers "
            f"[{start}, {end})"
        )
    return best
