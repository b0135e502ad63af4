"""Generalized numbers and generalized points as closed-form sequences, with verdicts.

A ``ScalarFamily`` or ``PointFamily`` lists its first terms explicitly and
describes every later term by an exponential polynomial in ``p**k``.
Questions about the equivalence class (is it zero, are two equal, is a
point family eventually inside a compact set) are answered by ``Proved``,
``Refuted`` or ``Unknown``, never by a bare boolean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Union

from .eventual import INF, Affine, ExpPoly, Horizon, nonzero_from_exact, valuation_exp
from .exact_numbers import (
    RATIONAL,
    MixedRings,
    Ring,
    format_rational,
    parse_rational,
    ring_from_json,
    valuation,
)
from .sequences import IntegerMap
from .spaces import Ball, FiniteDiscreteSpace, MixedSpaces, QpSpace, Space

DEFAULT_BOUND = 200


# ---------------------------------------------------------------------------
# scalar families

@dataclass(frozen=True)
class ScalarFamily:
    """``k -> prefix[k-1]`` for ``k <= len(prefix)``, else ``tail.at(k)``."""

    ring: Ring
    prefix: tuple
    tail: ExpPoly

    def at(self, k: int):
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        return self.tail.at(k)

    @property
    def kind(self) -> str:
        if self.tail.is_zero():
            return "zero"
        if self.tail.is_constant():
            return "constant"
        if len(self.tail.terms) == 1:
            return "monomial"
        return "exp_poly"

    def to_json(self) -> dict:
        fmt = self.ring.format
        tail: dict[str, Any] = {"kind": self.kind}
        if self.kind == "constant":
            tail["value"] = fmt(self.tail.terms[0][1])
        elif self.kind == "monomial":
            unit, exp = _monomial_parts(self.tail)
            tail["unit"] = fmt(unit)
            tail["exp"] = {"tail": [exp.slope, exp.offset]}
        elif self.kind == "exp_poly":
            tail["terms"] = self.tail.to_json()
        tail["text"] = self.tail.text()
        return {"ring": self.ring.to_json(), "prefix": [fmt(v) for v in self.prefix], "tail": tail}


def _monomial_parts(P: ExpPoly):
    (slope, c), = P.terms
    if P.ring == RATIONAL:
        v = valuation(P.p, c)
        return c / Fraction(P.p) ** v, Affine(slope, v)
    return c, Affine(slope, 0)


def scalar_from_json(p: Optional[int], obj: dict) -> ScalarFamily:
    ring = ring_from_json(obj["ring"])
    prefix = tuple(ring.parse(str(v)) for v in obj.get("prefix", []))
    tail = obj.get("tail", {"kind": "zero"})
    kind = tail.get("kind")
    if kind == "zero":
        poly = ExpPoly.zero(p, ring)
    elif kind == "constant":
        poly = ExpPoly.constant(p, ring, ring.parse(str(tail["value"])))
    elif kind == "monomial":
        slope, offset = tail["exp"]["tail"]
        poly = ExpPoly.monomial(p, ring, ring.parse(str(tail["unit"])), Affine(slope, offset))
    elif kind == "exp_poly":
        poly = ExpPoly.from_json(p, ring, tail["terms"])
    else:
        raise ValueError(f"unknown scalar tail kind {kind!r}")
    return ScalarFamily(ring, prefix, poly)


# ---------------------------------------------------------------------------
# point families

@dataclass(frozen=True)
class PointFamily:
    """A sequence of points: explicit prefix, then a closed-form tail.

    Over Q_p^n the tail gives each coordinate as a rational exponential
    polynomial in ``p**k``; over a finite discrete space it is a fixed label.
    """

    space: Space
    prefix: tuple
    tail: Any

    def at(self, k: int):
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        if isinstance(self.space, FiniteDiscreteSpace):
            return self.tail
        return tuple(c.at(k) for c in self.tail)

    @property
    def kind(self) -> str:
        if isinstance(self.space, FiniteDiscreteSpace) or all(c.is_constant() for c in self.tail):
            return "constant"
        if all(len(c.terms) <= 1 for c in self.tail):
            return "monomial"
        return "exp_poly"

    def to_json(self) -> dict:
        if isinstance(self.space, FiniteDiscreteSpace):
            return {"prefix": list(self.prefix), "tail": {"kind": "constant", "point": self.tail}}
        prefix = [[format_rational(c) for c in x] for x in self.prefix]
        kind = self.kind
        if kind == "constant":
            tail = {"kind": kind, "point": [format_rational(c.at(1)) for c in self.tail]}
        elif kind == "monomial":
            coords = []
            for c in self.tail:
                if c.is_zero():
                    coords.append({"base": "0", "exp": [0, 0]})
                elif c.is_constant():
                    coords.append({"base": format_rational(c.terms[0][1]), "exp": [0, 0]})
                else:
                    unit, exp = _monomial_parts(c)
                    coords.append({"base": format_rational(unit), "exp": [exp.slope, exp.offset]})
            tail = {"kind": kind, "coords": coords}
        else:
            tail = {"kind": kind, "coords": [c.to_json() for c in self.tail]}
        tail["text"] = [c.text() for c in self.tail]
        return {"prefix": prefix, "tail": tail}


def constant_point(space: Space, x) -> PointFamily:
    if isinstance(space, FiniteDiscreteSpace):
        return PointFamily(space, (), space.point(x))
    x = space.point(x)
    return PointFamily(space, (), tuple(ExpPoly.constant(space.p, RATIONAL, c) for c in x))


def monomial_point(space: QpSpace, bases, exponent: Affine, prefix=()) -> PointFamily:
    """``k -> bases * p**exponent(k)``, coordinatewise."""
    bases = space.point(bases)
    tail = tuple(ExpPoly.monomial(space.p, RATIONAL, b, exponent) for b in bases)
    return PointFamily(space, tuple(space.point(x) for x in prefix), tail)


def point_family_from_json(space: Space, obj: dict) -> PointFamily:
    if isinstance(space, FiniteDiscreteSpace):
        return PointFamily(space, tuple(obj.get("prefix", [])), obj["tail"]["point"])
    p = space.p

    def coords_of(x):
        if isinstance(x, str):
            x = [x]
        return space.point(tuple(parse_rational(str(c), p) for c in x))

    prefix = tuple(coords_of(x) for x in obj.get("prefix", []))
    tail = obj["tail"]
    kind = tail.get("kind")
    if kind == "constant":
        polys = tuple(ExpPoly.constant(p, RATIONAL, c) for c in coords_of(tail["point"]))
    elif kind == "monomial":
        polys = tuple(
            ExpPoly.monomial(p, RATIONAL, parse_rational(str(c["base"]), p), Affine(*c["exp"]))
            for c in tail["coords"]
        )
    elif kind == "exp_poly":
        polys = tuple(ExpPoly.from_json(p, RATIONAL, c) for c in tail["coords"])
    else:
        raise ValueError(f"unknown point tail kind {kind!r}")
    if len(polys) != space.n:
        raise ValueError("point family dimension does not match the space")
    return PointFamily(space, prefix, polys)


# ---------------------------------------------------------------------------
# verdicts

@dataclass(frozen=True)
class Schedule:
    """Infinitely many indices ``indices(1) < indices(2) < ...``, optionally with witness points.

    The witness for scheduled index ``k`` is ``points.at(k)``.
    """

    indices: IntegerMap
    points: Optional[PointFamily] = None

    def __post_init__(self):
        m = self.indices
        values = [m(i) for i in range(1, m.start + 1)]
        if m.slope < 1 or any(a >= b for a, b in zip(values, values[1:])) or values[0] < 1:
            raise ValueError("schedule indices must be strictly increasing and positive")

    @classmethod
    def from_index(cls, start: int, points: Optional[PointFamily] = None) -> "Schedule":
        """Every index ``k >= start``."""
        return cls(IntegerMap.affine(1, start - 1), points)

    def first(self, count: int) -> list[int]:
        return [self.indices(i) for i in range(1, count + 1)]

    def to_json(self) -> dict:
        return {
            "indices": self.indices.to_json(),
            "first": self.first(5),
            "points": None if self.points is None else self.points.to_json(),
        }


@dataclass(frozen=True)
class Proved:
    N: int
    certificate: dict = field(default_factory=dict)
    ball: Optional[Ball] = None

    def to_json(self) -> dict:
        out = {"verdict": "proved", "N": self.N, "certificate": self.certificate}
        if self.ball is not None:
            out["ball"] = self.ball.to_json()
        return out


@dataclass(frozen=True)
class Refuted:
    schedule: Schedule
    certificate: dict = field(default_factory=dict)
    ball: Optional[Ball] = None

    def to_json(self) -> dict:
        out = {"verdict": "refuted", "schedule": self.schedule.to_json()}
        if self.certificate:
            out["certificate"] = self.certificate
        if self.ball is not None:
            out["ball"] = self.ball.to_json()
        return out


@dataclass(frozen=True)
class Unknown:
    checked_up_to: int
    reason: str = ""

    def to_json(self) -> dict:
        out = {"verdict": "unknown", "checked_up_to": self.checked_up_to}
        if self.reason:
            out["reason"] = self.reason
        return out


Verdict = Union[Proved, Refuted, Unknown]


# ---------------------------------------------------------------------------
# decisions

def scalar_is_zero(s: ScalarFamily) -> Verdict:
    """Is ``s`` eventually zero, i.e. zero as a generalized number?"""
    T = len(s.prefix)
    if s.tail.is_zero():
        last = max((k for k in range(1, T + 1) if s.at(k)), default=0)
        return Proved(last + 1, {"reason": "tail vanishes identically", "prefix_length": T})
    start = nonzero_from_exact(s.tail, T + 1)
    while start > 1 and s.at(start - 1):
        start -= 1
    return Refuted(Schedule.from_index(start), {"tail": s.tail.text()})


def _difference(s: ScalarFamily, t: ScalarFamily) -> ScalarFamily:
    if s.ring != t.ring:
        raise MixedRings(f"{s.ring!r} vs {t.ring!r}")
    T = max(len(s.prefix), len(t.prefix))
    prefix = tuple(s.at(k) - t.at(k) for k in range(1, T + 1))
    return ScalarFamily(s.ring, prefix, s.tail - t.tail)


def scalar_equal(s: ScalarFamily, t: ScalarFamily) -> Verdict:
    return scalar_is_zero(_difference(s, t))


def gpoint_equiv(X: PointFamily, Y: PointFamily) -> Verdict:
    """Eventual equality of two point sequences."""
    if X.space != Y.space:
        raise MixedSpaces("point families live on different spaces")
    T = max(len(X.prefix), len(Y.prefix))
    if isinstance(X.space, FiniteDiscreteSpace):
        if X.tail == Y.tail:
            last = max((k for k in range(1, T + 1) if X.at(k) != Y.at(k)), default=0)
            return Proved(last + 1, {"reason": "tails coincide"})
        return Refuted(Schedule.from_index(T + 1))
    diffs = [x - y for x, y in zip(X.tail, Y.tail)]
    if all(d.is_zero() for d in diffs):
        last = max((k for k in range(1, T + 1) if X.at(k) != Y.at(k)), default=0)
        return Proved(last + 1, {"reason": "tails coincide"})
    nonzero = next(d for d in diffs if not d.is_zero())
    start = nonzero_from_exact(nonzero, T + 1)
    while start > 1 and X.at(start - 1) != Y.at(start - 1):
        start -= 1
    return Refuted(Schedule.from_index(start))


def compact_ball(X: PointFamily) -> Optional[Ball]:
    """A ball containing every point of ``X``, or ``None`` if the tail is unbounded."""
    space = X.space
    if isinstance(space, FiniteDiscreteSpace):
        return Ball(space, space.points[0], 0)
    hz = Horizon(len(X.prefix) + 1)
    tails = [valuation_exp(c, hz) for c in X.tail]
    if any(v != INF and v.slope < 0 for v in tails):
        return None
    # beyond the horizon every coordinate valuation is non-decreasing
    lows = [0]
    for k in range(1, hz.start + 1):
        lows.extend(valuation(space.p, c) for c in X.at(k) if c != 0)
    gamma = min(lows)
    return Ball(space, (Fraction(0),) * space.n, gamma)


def is_compactly_supported(X: PointFamily) -> Verdict:
    ball = compact_ball(X)
    if ball is None:
        hz = Horizon(len(X.prefix) + 1)
        for c in X.tail:
            valuation_exp(c, hz)
        return Refuted(Schedule.from_index(hz.start), {"reason": "a coordinate's norm grows without bound"})
    return Proved(1, {"ball": ball.to_json()}, ball)
