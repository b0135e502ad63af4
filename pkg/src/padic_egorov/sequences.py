"""Sequences k -> StepFunction given as small symbolic ASTs.

Indices start at 1. Exponent schedules are ``IntegerMap``s: an explicit
table for the first indices followed by an affine tail, which keeps every
question about the tail decidable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Union

from .eventual import (
    Affine,
    ExpPoly,
    Horizon,
    SymBall,
    settle,
    sym_constant_point,
    sym_point_at,
    sym_relation,
)
from .exact_numbers import RATIONAL, IntModRing, Ring, format_rational, parse_rational, ring_from_json
from .spaces import Ball, FiniteDiscreteSpace, MixedSpaces, QpSpace, Relation, Space, in_ball, space_from_json
from .step_functions import NotSupported, StepFunction, add, char_fn, mul, neg


class IndexZero(ValueError):
    pass


class NotSeparable(ValueError):
    """Raised when a family leaves the fragment in which tail questions are decidable."""


@dataclass(frozen=True)
class IntegerMap:
    """``k -> table[k-1]`` for ``k <= len(table)``, else ``slope*k + offset``."""

    table: tuple = ()
    slope: int = 0
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(int(v) for v in self.table))

    @classmethod
    def affine(cls, slope: int, offset: int = 0) -> "IntegerMap":
        return cls((), slope, offset)

    def __call__(self, k: int) -> int:
        if k < 1:
            raise IndexZero("indices start at 1")
        if k <= len(self.table):
            return self.table[k - 1]
        return self.slope * k + self.offset

    @property
    def start(self) -> int:
        """First index governed by the affine tail."""
        return len(self.table) + 1

    @property
    def tail(self) -> Affine:
        return Affine(self.slope, self.offset)

    def to_json(self) -> dict:
        out = {"tail": [self.slope, self.offset]}
        if self.table:
            out["table"] = list(self.table)
        return out

    @classmethod
    def from_json(cls, obj) -> "IntegerMap":
        if isinstance(obj, int):
            return cls((), 0, obj)
        slope, offset = obj.get("tail", [0, 0])
        return cls(tuple(obj.get("table", ())), int(slope), int(offset))

    def text(self) -> str:
        tail = self.tail.text()
        if not self.table:
            return tail
        return f"[{', '.join(map(str, self.table))}] then {tail}"


def integer_map_eval(m: IntegerMap, k: int) -> int:
    return m(k)


def eventual_comparison(m1: IntegerMap, m2: IntegerMap) -> tuple[bool, int]:
    """Eventual truth of ``m1(k) > m2(k)`` and the least index from which it never changes."""
    sign, start = settle(m1.slope - m2.slope, m1.offset - m2.offset)
    start = max(start, m1.start, m2.start)
    value = sign > 0
    while start > 1 and (m1(start - 1) > m2(start - 1)) == value:
        start -= 1
    return value, start


@dataclass(frozen=True)
class PhiReport:
    monotone: bool
    divergent: bool
    infinitely_often_above_identity: bool

    @property
    def ok(self) -> bool:
        return self.monotone and self.divergent and self.infinitely_often_above_identity

    def failures(self) -> list[str]:
        out = []
        if not self.monotone:
            out.append("not non-decreasing")
        if not self.divergent:
            out.append("does not tend to infinity")
        if not self.infinitely_often_above_identity:
            out.append("phi(k) > k holds only finitely often")
        return out


def validate_phi(m: IntegerMap) -> PhiReport:
    """Check that ``m`` is non-decreasing, unbounded, and exceeds ``k`` infinitely often."""
    values = [m(k) for k in range(1, m.start + 1)]
    monotone = all(a <= b for a, b in zip(values, values[1:])) and m.slope >= 0
    divergent = m.slope >= 1
    above = m.slope >= 2 or (m.slope == 1 and m.offset >= 1)
    return PhiReport(monotone, divergent, above)


# ---------------------------------------------------------------------------
# family ASTs

@dataclass(frozen=True)
class Constant:
    f: StepFunction

    @property
    def space(self) -> Space:
        return self.f.space

    @property
    def ring(self) -> Ring:
        return self.f.ring


@dataclass(frozen=True)
class ExplicitThen:
    """Explicit terms for ``k <= len(prefix)``, then ``tail`` at the same index."""

    prefix: tuple
    tail: "SequenceFamily"

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        for f in self.prefix:
            if f.space != self.tail.space:
                raise MixedSpaces("prefix term on a different space")
            if f.ring != self.tail.ring:
                raise TypeError("prefix term over a different ring")

    @property
    def space(self) -> Space:
        return self.tail.space

    @property
    def ring(self) -> Ring:
        return self.tail.ring


@dataclass(frozen=True)
class MonomialIndicator:
    """``k -> unit * p**coeff_exp(k) * indicator of Ball(offset + base * p**center_exp(k), radius_exp(k))``.

    ``center_exp=None`` fixes the center at ``center_offset + center_base``.
    """

    space: QpSpace
    ring: Ring
    unit: object
    coeff_exp: IntegerMap
    center_base: tuple
    center_exp: Optional[IntegerMap]
    radius_exp: IntegerMap
    center_offset: tuple = None

    def __post_init__(self):
        if not isinstance(self.space, QpSpace):
            raise NotSupported("monomial indicators need a p-adic space")
        if isinstance(self.ring, IntModRing):
            raise NotSupported("monomial indicators take rational or Gaussian coefficients")
        unit = self.unit if self.ring.contains(self.unit) else self.ring.scalar(self.unit)
        if not unit:
            raise ValueError("monomial indicator with zero coefficient unit")
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "center_base", self.space.point(self.center_base))
        offset = self.center_offset
        if offset is None:
            offset = (0,) * self.space.n
        object.__setattr__(self, "center_offset", self.space.point(offset))

    def coefficient(self, k: int):
        return self.unit * self.ring.scalar(Fraction(self.space.p) ** self.coeff_exp(k))

    def center(self, k: int) -> tuple:
        if self.center_exp is None:
            scale = 1
        else:
            scale = Fraction(self.space.p) ** self.center_exp(k)
        return tuple(o + b * scale for o, b in zip(self.center_offset, self.center_base))

    def ball(self, k: int) -> Ball:
        return Ball(self.space, self.center(k), self.radius_exp(k))

    @property
    def start(self) -> int:
        maps = [self.coeff_exp, self.radius_exp]
        if self.center_exp is not None:
            maps.append(self.center_exp)
        return max(m.start for m in maps)


@dataclass(frozen=True)
class Sum:
    left: "SequenceFamily"
    right: "SequenceFamily"

    def __post_init__(self):
        _check_same(self.left, self.right)

    @property
    def space(self) -> Space:
        return self.left.space

    @property
    def ring(self) -> Ring:
        return self.left.ring


@dataclass(frozen=True)
class Prod:
    left: "SequenceFamily"
    right: "SequenceFamily"

    def __post_init__(self):
        _check_same(self.left, self.right)

    @property
    def space(self) -> Space:
        return self.left.space

    @property
    def ring(self) -> Ring:
        return self.left.ring


@dataclass(frozen=True)
class Neg:
    arg: "SequenceFamily"

    @property
    def space(self) -> Space:
        return self.arg.space

    @property
    def ring(self) -> Ring:
        return self.arg.ring


SequenceFamily = Union[Constant, ExplicitThen, MonomialIndicator, Sum, Prod, Neg]


def _check_same(a, b) -> None:
    if a.space != b.space:
        raise MixedSpaces("families live on different spaces")
    if a.ring != b.ring:
        raise TypeError(f"families over different rings: {a.ring!r} vs {b.ring!r}")


def zero_family(space: Space, ring: Ring = RATIONAL) -> Constant:
    return Constant(StepFunction.zero(space, ring))


def difference(u: SequenceFamily, v: SequenceFamily) -> Sum:
    return Sum(u, Neg(v))


def nth(F: SequenceFamily, k: int) -> StepFunction:
    """The k-th term of the family (k >= 1)."""
    if k < 1:
        raise IndexZero("indices start at 1")
    if isinstance(F, Constant):
        return F.f
    if isinstance(F, ExplicitThen):
        if k <= len(F.prefix):
            return F.prefix[k - 1]
        return nth(F.tail, k)
    if isinstance(F, MonomialIndicator):
        return char_fn(F.ball(k), F.coefficient(k), F.ring)
    if isinstance(F, Sum):
        return add(nth(F.left, k), nth(F.right, k))
    if isinstance(F, Prod):
        return mul(nth(F.left, k), nth(F.right, k))
    if isinstance(F, Neg):
        return neg(nth(F.arg, k))
    raise TypeError(f"not a sequence family: {F!r}")


def term_value(F: SequenceFamily, k: int, x):
    """``nth(F, k)(x)`` by walking the tree, without building any step function."""
    if k < 1:
        raise IndexZero("indices start at 1")
    if isinstance(F, Constant):
        return F.f(x)
    if isinstance(F, ExplicitThen):
        if k <= len(F.prefix):
            return F.prefix[k - 1](x)
        return term_value(F.tail, k, x)
    if isinstance(F, MonomialIndicator):
        F.space.check_point(x)
        return F.coefficient(k) if in_ball(x, F.ball(k)) else F.ring.zero
    if isinstance(F, Sum):
        return term_value(F.left, k, x) + term_value(F.right, k, x)
    if isinstance(F, Prod):
        return term_value(F.left, k, x) * term_value(F.right, k, x)
    if isinstance(F, Neg):
        return -term_value(F.arg, k, x)
    raise TypeError(f"not a sequence family: {F!r}")


# ---------------------------------------------------------------------------
# normal form

@dataclass(frozen=True)
class TailTerm:
    coeff: ExpPoly
    ball: SymBall

    def at(self, space: QpSpace, k: int) -> StepFunction:
        return char_fn(self.ball.at(space, k), self.coeff.at(k), self.coeff.ring)


@dataclass(frozen=True)
class NormalFamily:
    """Terms of ``source`` for ``k < start`` and a closed form valid for every ``k >= start``.

    Over Q_p^n the closed form is a list of tail terms whose balls are
    pairwise distinct for all ``k >= start``; over a finite discrete space the
    family is constant from ``start`` on and the closed form is ``tail_function``.
    Early terms are computed from ``source`` only when asked for.
    """

    space: Space
    ring: Ring
    start: int
    source: Any = field(repr=False)
    terms: tuple = ()
    tail_function: Optional[StepFunction] = None

    @property
    def prefix(self) -> tuple:
        return tuple(nth(self.source, k) for k in range(1, self.start))

    def value_at(self, k: int, x):
        """``nth(k)(x)`` without assembling the step function."""
        if k < self.start:
            return term_value(self.source, k, x)
        if self.tail_function is not None:
            return self.tail_function(x)
        total = self.ring.zero
        for t in self.terms:
            if in_ball(x, t.ball.at(self.space, k)):
                total = total + t.coeff.at(k)
        return total

    def nth(self, k: int) -> StepFunction:
        if k < 1:
            raise IndexZero("indices start at 1")
        if k < self.start:
            return nth(self.source, k)
        if self.tail_function is not None:
            return self.tail_function
        total = StepFunction.zero(self.space, self.ring)
        for t in self.terms:
            total = add(total, t.at(self.space, k))
        return total


@dataclass
class _Draft:
    start: int
    terms: list = field(default_factory=list)
    tail_function: Optional[StepFunction] = None


def _merge_terms(terms, hz: Horizon) -> list:
    out: list = []
    for t in terms:
        for i, r in enumerate(out):
            if sym_relation(t.ball, r.ball, hz) is Relation.EQUAL:
                out[i] = TailTerm(r.coeff + t.coeff, r.ball)
                break
        else:
            out.append(t)
    return [t for t in out if not t.coeff.is_zero()]


def _draft(F: SequenceFamily) -> _Draft:
    space = F.space
    ring = F.ring
    discrete = isinstance(space, FiniteDiscreteSpace)
    if isinstance(F, Constant):
        if discrete:
            return _Draft(1, tail_function=F.f)
        p = space.p
        terms = [
            TailTerm(ExpPoly.constant(p, ring, v), SymBall(sym_constant_point(p, b.center), Affine(0, b.gamma)))
            for b, v in F.f.pieces
        ]
        return _Draft(1, terms)
    if isinstance(F, ExplicitThen):
        d = _draft(F.tail)
        d.start = max(d.start, len(F.prefix) + 1)
        return d
    if isinstance(F, MonomialIndicator):
        p = space.p
        coeff = ExpPoly.monomial(p, ring, F.unit, F.coeff_exp.tail)
        if F.center_exp is None:
            center = sym_constant_point(p, F.center(1))
        else:
            center = tuple(
                ExpPoly.constant(p, RATIONAL, o) + ExpPoly.monomial(p, RATIONAL, b, F.center_exp.tail)
                for o, b in zip(F.center_offset, F.center_base)
            )
        return _Draft(F.start, [TailTerm(coeff, SymBall(center, F.radius_exp.tail))])
    if isinstance(F, Neg):
        d = _draft(F.arg)
        if discrete:
            return _Draft(d.start, tail_function=neg(d.tail_function))
        return _Draft(d.start, [TailTerm(-t.coeff, t.ball) for t in d.terms])
    if isinstance(F, (Sum, Prod)):
        a, b = _draft(F.left), _draft(F.right)
        start = max(a.start, b.start)
        if discrete:
            op = add if isinstance(F, Sum) else mul
            return _Draft(start, tail_function=op(a.tail_function, b.tail_function))
        hz = Horizon(start)
        if isinstance(F, Sum):
            terms = _merge_terms(a.terms + b.terms, hz)
        else:
            products = []
            for s in a.terms:
                for t in b.terms:
                    rel = sym_relation(s.ball, t.ball, hz)
                    if rel is Relation.DISJOINT:
                        continue
                    ball = t.ball if rel is Relation.SECOND_INSIDE_FIRST else s.ball
                    products.append(TailTerm(s.coeff * t.coeff, ball))
            terms = _merge_terms(products, hz)
        return _Draft(hz.start, terms)
    raise TypeError(f"not a sequence family: {F!r}")


def normalize_family(F: SequenceFamily) -> NormalFamily:
    """Rewrite ``F`` as explicit prefix terms plus tail terms with pairwise distinct balls."""
    d = _draft(F)
    return NormalFamily(F.space, F.ring, d.start, F, tuple(d.terms), d.tail_function)


# ---------------------------------------------------------------------------
# JSON codec

def _step_function_from_json(obj: dict, space: Space, ring: Ring) -> StepFunction:
    obj = dict(obj)
    obj.setdefault("space", space.to_json())
    obj.setdefault("ring", ring.to_json())
    return StepFunction.from_json(obj)


def _fold(kind, parts):
    out = parts[0]
    for part in parts[1:]:
        out = kind(out, part)
    return out


def family_from_json(obj: dict, space: Optional[Space] = None, ring: Optional[Ring] = None) -> SequenceFamily:
    """Decode a tagged family AST; ``space`` and ``ring`` fill in what the JSON leaves out."""
    if "space" in obj:
        space = space_from_json(obj["space"])
    if "ring" in obj:
        ring = ring_from_json(obj["ring"])
    if ring is None:
        ring = RATIONAL
    if space is None:
        raise ValueError("family JSON needs a space (or a prime supplied by the caller)")
    kind = obj.get("kind")
    if kind == "monomial_indicator":
        p = space.p
        coeff = obj.get("coeff", {})
        center = obj.get("center", {})

        def coords(value):
            value = value if isinstance(value, list) else [value] * space.n
            return tuple(parse_rational(str(c), p) for c in value)

        return MonomialIndicator(
            space,
            ring,
            ring.parse(str(coeff.get("unit", "1"))),
            IntegerMap.from_json(coeff.get("exp", 0)),
            coords(center.get("base", "0")),
            IntegerMap.from_json(center["exp"]) if "exp" in center else None,
            IntegerMap.from_json(obj["radius_exp"]),
            coords(center["offset"]) if "offset" in center else None,
        )
    if kind == "constant":
        return Constant(_step_function_from_json(obj.get("function", {}), space, ring))
    if kind == "explicit_then":
        prefix = tuple(_step_function_from_json(f, space, ring) for f in obj.get("prefix", []))
        return ExplicitThen(prefix, family_from_json(obj["tail"], space, ring))
    if kind in ("sum", "prod"):
        parts = [family_from_json(a, space, ring) for a in obj["args"]]
        if not parts:
            raise ValueError(f"{kind} needs at least one argument")
        return _fold(Sum if kind == "sum" else Prod, parts)
    if kind == "neg":
        return Neg(family_from_json(obj["arg"], space, ring))
    raise ValueError(f"unknown family kind {kind!r}")


def family_to_json(F: SequenceFamily) -> dict:
    """Tagged AST; the root also records the space and ring so the document stands alone."""
    out = _node_json(F)
    out["space"] = F.space.to_json()
    out["ring"] = F.ring.to_json()
    return out


def _node_json(F: SequenceFamily) -> dict:
    if isinstance(F, MonomialIndicator):
        center: dict = {"base": [format_rational(c) for c in F.center_base]}
        if F.center_exp is not None:
            center["exp"] = F.center_exp.to_json()
        if any(F.center_offset):
            center["offset"] = [format_rational(c) for c in F.center_offset]
        return {
            "kind": "monomial_indicator",
            "coeff": {"unit": F.ring.format(F.unit), "exp": F.coeff_exp.to_json()},
            "center": center,
            "radius_exp": F.radius_exp.to_json(),
        }
    if isinstance(F, Constant):
        return {"kind": "constant", "function": F.f.to_json()}
    if isinstance(F, ExplicitThen):
        return {"kind": "explicit_then", "prefix": [f.to_json() for f in F.prefix], "tail": _node_json(F.tail)}
    if isinstance(F, Sum):
        return {"kind": "sum", "args": [_node_json(F.left), _node_json(F.right)]}
    if isinstance(F, Prod):
        return {"kind": "prod", "args": [_node_json(F.left), _node_json(F.right)]}
    if isinstance(F, Neg):
        return {"kind": "neg", "arg": _node_json(F.arg)}
    raise TypeError(f"not a sequence family: {F!r}")
