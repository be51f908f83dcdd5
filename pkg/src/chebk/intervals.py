"""Finite unions of compact real intervals and their affine normalization."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    DegenerateInterval,
    EmptySet,
    OverlappingIntervals,
    UnorderedIntervals,
)


def parse_scalar(value) -> float:
    """Parse a float, int, decimal string or ``"p/q"`` rational string."""
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    raise TypeError(f"cannot interpret {value!r} as a real scalar")


@dataclass(frozen=True)
class AffineMap:
    """The map ``x -> scale * x + shift`` (scale > 0)."""

    scale: float
    shift: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("affine map needs a positive scale")

    def __call__(self, x):
        return self.scale * x + self.shift

    def inverse(self, u):
        return (u - self.shift) / self.scale

    @property
    def is_identity(self) -> bool:
        return self.scale == 1.0 and self.shift == 0.0


@dataclass(frozen=True)
class IntervalUnion:
    """K = [a_1, b_1] u ... u [a_L, b_L] with a_1 < b_1 < a_2 < ... < b_L.

    Construct through :func:`validate` (or ``IntervalUnion.from_pairs``) so
    the ordering invariants are checked.
    """

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        _check(self.intervals)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence]) -> "IntervalUnion":
        return validate(pairs)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __getitem__(self, i):
        return self.intervals[i]

    @property
    def L(self) -> int:
        return len(self.intervals)

    @property
    def hull(self) -> tuple[float, float]:
        return self.intervals[0][0], self.intervals[-1][1]

    @property
    def lengths(self) -> list[float]:
        return [b - a for a, b in self.intervals]

    @property
    def total_length(self) -> float:
        return float(sum(self.lengths))

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return any(a - tol <= x <= b + tol for a, b in self.intervals)

    def is_normalized(self) -> bool:
        return self.intervals[0][0] == -1.0 and self.intervals[-1][1] == 1.0

    def mapped(self, f: AffineMap) -> "IntervalUnion":
        return IntervalUnion(tuple((f(a), f(b)) for a, b in self.intervals))

    def gaps(self) -> list[tuple[float, float]]:
        return gaps(self)

    def as_lists(self) -> list[list[float]]:
        return [[a, b] for a, b in self.intervals]


def _check(intervals) -> None:
    if len(intervals) == 0:
        raise EmptySet("an interval union needs at least one interval")
    for a, b in intervals:
        if a == b:
            raise DegenerateInterval(f"degenerate interval [{a}, {b}]")
        if not a < b:
            raise UnorderedIntervals(f"interval [{a}, {b}] has a > b")
    for (a0, b0), (a1, b1) in zip(intervals, intervals[1:]):
        if not b0 < a1:
            raise OverlappingIntervals(
                f"intervals [{a0}, {b0}] and [{a1}, {b1}] overlap or touch")


def validate(raw: Iterable[Sequence]) -> IntervalUnion:
    """Build an :class:`IntervalUnion` from raw endpoint pairs.

    Pairs are sorted by left endpoint; overlapping or touching intervals are
    an error (they are never merged).
    """
    pairs = []
    for item in raw:
        if len(item) != 2:
            raise ValueError(f"interval {item!r} is not a pair")
        a, b = parse_scalar(item[0]), parse_scalar(item[1])
        if a == b:
            raise DegenerateInterval(f"degenerate interval [{a}, {b}]")
        if a > b:
            raise UnorderedIntervals(f"interval [{a}, {b}] has a > b")
        pairs.append((a, b))
    if not pairs:
        raise EmptySet("an interval union needs at least one interval")
    pairs.sort()
    return IntervalUnion(tuple(pairs))


def normalize(K: IntervalUnion) -> tuple[IntervalUnion, AffineMap]:
    """Map the convex hull of K onto [-1, 1].

    Returns the normalized set and the raw -> normalized map. The outer
    endpoints of the result are exactly -1 and 1.
    """
    lo, hi = K.hull
    if lo == -1.0 and hi == 1.0:
        return K, AffineMap(1.0, 0.0)
    scale = 2.0 / (hi - lo)
    shift = -(hi + lo) / (hi - lo)
    f = AffineMap(scale, shift)
    mapped = [[f(a), f(b)] for a, b in K.intervals]
    mapped[0][0] = -1.0
    mapped[-1][1] = 1.0
    return IntervalUnion(tuple((a, b) for a, b in mapped)), f


def denormalize(K: IntervalUnion, f: AffineMap) -> IntervalUnion:
    """Inverse of :func:`normalize`."""
    return IntervalUnion(tuple((f.inverse(a), f.inverse(b)) for a, b in K))


def gaps(K: IntervalUnion) -> list[tuple[float, float]]:
    """Open gaps (b_l, a_{l+1}) between consecutive intervals."""
    return [(b0, a1) for (_, b0), (a1, _) in zip(K.intervals, K.intervals[1:])]


K1 = validate([(-1, -0.5), (-0.2, 0.2), (0.5, 1)])
K2 = validate([(-1, -0.5), (0.1, 0.2), ("2/3", 1)])
