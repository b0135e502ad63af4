"""Locally compact ultrametric spaces: Q_p^n under the max-norm and finite discrete spaces.

Points of ``QpSpace`` are tuples of exact rationals, points of
``FiniteDiscreteSpace`` are string labels. Distances are reported as
exponents: ``d(x, y) = p**-e`` in Q_p^n, and in a discrete space ``INF``
means equal while ``0`` means distinct.

A ``Ball`` of radius exponent ``gamma`` is the clopen set
``{y : d(center, y) <= p**-gamma}``. Its center is stored in canonical form
(digits at exponents ``>= gamma`` removed), so dataclass equality is set
equality.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .exact_numbers import (
    INF,
    int_valuation,
    digit_truncate,
    format_rational,
    parse_rational,
    require_prime,
    valuation,
)

Point = Union[tuple, str]


class DimensionMismatch(ValueError):
    pass


class NotSplittable(ValueError):
    pass


class MixedSpaces(ValueError):
    pass


class Relation(enum.Enum):
    DISJOINT = "disjoint"
    EQUAL = "equal"
    FIRST_INSIDE_SECOND = "first_inside_second"
    SECOND_INSIDE_FIRST = "second_inside_first"

    def swapped(self) -> "Relation":
        if self is Relation.FIRST_INSIDE_SECOND:
            return Relation.SECOND_INSIDE_FIRST
        if self is Relation.SECOND_INSIDE_FIRST:
            return Relation.FIRST_INSIDE_SECOND
        return self


def _valuation_of_difference(p: int, a: Fraction, b: Fraction):
    # same as valuation(p, a - b) without normalising the intermediate fraction
    num = a.numerator * b.denominator - b.numerator * a.denominator
    if num == 0:
        return INF
    return int_valuation(p, num) - int_valuation(p, a.denominator) - int_valuation(p, b.denominator)


@dataclass(frozen=True)
class QpSpace:
    p: int
    n: int = 1

    def __post_init__(self):
        require_prime(self.p)
        if self.n < 1:
            raise ValueError("dimension must be at least 1")

    @property
    def branching(self) -> int:
        return self.p**self.n

    def point(self, *coords) -> tuple:
        if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
            coords = tuple(coords[0])
        x = tuple(Fraction(c) for c in coords)
        self.check_point(x)
        return x

    def check_point(self, x) -> None:
        if not isinstance(x, tuple) or len(x) != self.n:
            raise DimensionMismatch(f"expected a point with {self.n} coordinates, got {x!r}")

    def distance_exp(self, x, y):
        self.check_point(x)
        self.check_point(y)
        return min(_valuation_of_difference(self.p, a, b) for a, b in zip(x, y))

    def canonical_center(self, center, gamma: int) -> tuple:
        return tuple(digit_truncate(self.p, c, gamma) for c in center)

    def center_key(self, center, gamma: int) -> tuple:
        # digit strings read from exponent gamma-1 downwards; trailing zeros dropped
        key = []
        for c in center:
            if c == 0:
                key.append(())
                continue
            v = valuation(self.p, c)
            # a canonical center is p^v times an integer below p^(gamma - v)
            n = int(c / Fraction(self.p) ** v)
            out = []
            for _ in range(gamma - v):
                n, d = divmod(n, self.p)
                out.append(d)
            key.append(tuple(reversed(out)))
        return tuple(key)

    def to_json(self) -> dict:
        return {"kind": "qp", "p": self.p, "n": self.n}


@dataclass(frozen=True)
class FiniteDiscreteSpace:
    points: tuple

    def __post_init__(self):
        pts = tuple(str(x) for x in self.points)
        if not pts:
            raise ValueError("a finite discrete space needs at least one point")
        if len(set(pts)) != len(pts):
            raise ValueError("point labels must be distinct")
        object.__setattr__(self, "points", pts)

    @property
    def branching(self) -> int:
        return len(self.points)

    def point(self, label) -> str:
        self.check_point(label)
        return label

    def check_point(self, x) -> None:
        if x not in self.points:
            raise DimensionMismatch(f"{x!r} is not a point of {self.points!r}")

    def distance_exp(self, x, y):
        self.check_point(x)
        self.check_point(y)
        return INF if x == y else 0

    def canonical_center(self, center, gamma: int):
        if gamma <= 0 or len(self.points) == 1:
            return self.points[0]
        return center

    def center_key(self, center, gamma: int) -> tuple:
        return (self.points.index(center),)

    def to_json(self) -> dict:
        return {"kind": "discrete", "points": list(self.points)}


Space = Union[QpSpace, FiniteDiscreteSpace]


def space_from_json(obj: dict) -> Space:
    if obj.get("kind") == "qp":
        return QpSpace(int(obj["p"]), int(obj.get("n", 1)))
    if obj.get("kind") == "discrete":
        return FiniteDiscreteSpace(tuple(obj["points"]))
    raise ValueError(f"unknown space kind {obj.get('kind')!r}")


@dataclass(frozen=True)
class Ball:
    space: Space = field(repr=False)
    center: Point
    gamma: int

    def __post_init__(self):
        space = self.space
        space.check_point(self.center)
        gamma = int(self.gamma)
        if isinstance(space, FiniteDiscreteSpace):
            gamma = 0 if gamma <= 0 or len(space.points) == 1 else 1
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "center", space.canonical_center(self.center, gamma))

    @classmethod
    def trusted(cls, space: Space, center: Point, gamma: int) -> "Ball":
        """A ball whose ``center`` is already canonical for ``gamma``; nothing is rechecked."""
        b = object.__new__(cls)
        object.__setattr__(b, "space", space)
        object.__setattr__(b, "center", center)
        object.__setattr__(b, "gamma", gamma)
        return b

    def __contains__(self, x) -> bool:
        return in_ball(x, self)

    def sort_key(self) -> tuple:
        return (self.gamma, self.space.center_key(self.center, self.gamma))

    def parent(self) -> "Ball":
        if isinstance(self.space, FiniteDiscreteSpace) and self.gamma == 0:
            raise NotSplittable("the whole discrete space has no parent ball")
        return Ball(self.space, self.center, self.gamma - 1)

    def to_json(self) -> dict:
        if isinstance(self.space, FiniteDiscreteSpace):
            return {"center": self.center, "gamma": self.gamma}
        return {"center": [format_rational(c) for c in self.center], "gamma": self.gamma}


def distance_exp(s: Space, x, y):
    """Exponent ``e`` with ``d(x, y) = p**-e``; ``INF`` iff ``x == y``."""
    return s.distance_exp(x, y)


def in_ball(x, b: Ball) -> bool:
    s = b.space
    if isinstance(s, FiniteDiscreteSpace):
        return s.distance_exp(b.center, x) >= b.gamma
    s.check_point(x)
    p, gamma = s.p, b.gamma
    for c, y in zip(b.center, x):
        num = c.numerator * y.denominator - y.numerator * c.denominator
        if num == 0:
            continue
        need = gamma
        for d in (c.denominator, y.denominator):
            while d % p == 0:
                d //= p
                need += 1
        if need > 0 and num % p**need:
            return False
    return True


def split_ball(b: Ball) -> list[Ball]:
    """The children of ``b`` one radius step down; they partition ``b``."""
    s = b.space
    if isinstance(s, FiniteDiscreteSpace):
        if b.gamma >= 1 or len(s.points) == 1:
            raise NotSplittable(f"singleton ball {b.center!r} cannot be split")
        return [Ball(s, label, 1) for label in s.points]
    step = Fraction(s.p) ** b.gamma
    children = []
    for offsets in itertools.product(range(s.p), repeat=s.n):
        center = tuple(c + j * step for c, j in zip(b.center, offsets))
        children.append(Ball(s, center, b.gamma + 1))
    return children


def ball_relation(a: Ball, b: Ball) -> Relation:
    if a.space != b.space:
        raise MixedSpaces("balls live in different spaces")
    if a.gamma >= b.gamma:
        if in_ball(a.center, b):
            return Relation.EQUAL if a.gamma == b.gamma else Relation.FIRST_INSIDE_SECOND
        return Relation.DISJOINT
    if in_ball(b.center, a):
        return Relation.SECOND_INSIDE_FIRST
    return Relation.DISJOINT


def ball_from_json(space: Space, obj: dict) -> Ball:
    if isinstance(space, FiniteDiscreteSpace):
        return Ball(space, obj["center"], int(obj["gamma"]))
    center = obj["center"]
    if isinstance(center, str):
        center = [center]
    return Ball(space, tuple(parse_rational(c, space.p) for c in center), int(obj["gamma"]))
