"""Eventual behaviour of index-dependent exact data.

Every symbolic quantity in the package is, past a finite prefix, either an
affine map ``k -> a*k + b`` or an exponential polynomial
``k -> sum(c_j * p**(s_j * k))``. Any comparison between such quantities
(valuations, ball membership, ball nesting, digits) stops changing after an
index that can be computed exactly. The helpers here return eventual values
and push that index into a ``Horizon``: the caller may rely on every answer
for all ``k >= horizon.start``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .exact_numbers import (
    GAUSSIAN,
    INF,
    RATIONAL,
    GaussianRational,
    Ring,
    format_rational,
    residue_mod,
    unit_part,
    valuation,
)
from .spaces import Ball, QpSpace, Relation


class NotEventuallyIntegral(ValueError):
    pass


@dataclass(frozen=True)
class Affine:
    slope: int
    offset: int

    def __call__(self, k: int) -> int:
        return self.slope * k + self.offset

    def __add__(self, c: int) -> "Affine":
        return Affine(self.slope, self.offset + c)

    def __sub__(self, other: "Affine") -> "Affine":
        return Affine(self.slope - other.slope, self.offset - other.offset)

    def text(self, var: str = "k") -> str:
        if self.slope == 0:
            return str(self.offset)
        head = var if self.slope == 1 else ("-" + var if self.slope == -1 else f"{self.slope}{var}")
        if self.offset == 0:
            return head
        sign = "+" if self.offset > 0 else "-"
        return f"{head}{sign}{abs(self.offset)}"


def settle(slope: int, offset) -> tuple[int, int]:
    """Sign of ``slope*k + offset`` for large k and the first index from which it holds."""
    if slope == 0:
        return (offset > 0) - (offset < 0), 1
    root = Fraction(-offset) / slope
    start = math.floor(root) + 1
    return (1 if slope > 0 else -1), max(1, start)


class Horizon:
    """Running index from which all eventual answers computed so far are valid."""

    def __init__(self, start: int = 1):
        self.start = max(1, start)

    def bump(self, k: int) -> None:
        if k > self.start:
            self.start = k

    def __repr__(self):
        return f"Horizon({self.start})"


# ---------------------------------------------------------------------------
# exponential polynomials in p**k

@dataclass(frozen=True)
class ExpPoly:
    """The sequence ``k -> sum(coeff * p**(slope * k))`` with coefficients in ``ring``."""

    p: int | None
    ring: Ring
    terms: tuple = ()

    @classmethod
    def make(cls, p, ring: Ring, mapping) -> "ExpPoly":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        merged: dict = {}
        for slope, c in items:
            merged[slope] = merged[slope] + c if slope in merged else c
        terms = tuple(sorted((s, c) for s, c in merged.items() if c))
        if p is None and any(s != 0 for s, _ in terms):
            raise ValueError("a nonconstant exponential polynomial needs a prime")
        return cls(p, ring, terms)

    @classmethod
    def zero(cls, p, ring: Ring) -> "ExpPoly":
        return cls(p, ring, ())

    @classmethod
    def constant(cls, p, ring: Ring, c) -> "ExpPoly":
        return cls.make(p, ring, {0: ring.scalar(c) if not ring.contains(c) else c})

    @classmethod
    def monomial(cls, p, ring: Ring, unit, exponent: Affine) -> "ExpPoly":
        """``unit * p**exponent(k)``."""
        if not ring.contains(unit):
            unit = ring.scalar(unit)
        return cls.make(p, ring, {exponent.slope: unit * ring.scalar(Fraction(p) ** exponent.offset)})

    def _coerce(self, other: "ExpPoly") -> None:
        if self.ring != other.ring:
            raise TypeError(f"{self.ring!r} vs {other.ring!r}")

    def _prime(self, other: "ExpPoly"):
        return self.p if self.p is not None else other.p

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        self._coerce(other)
        return ExpPoly.make(self._prime(other), self.ring, list(self.terms) + list(other.terms))

    def __neg__(self) -> "ExpPoly":
        return ExpPoly(self.p, self.ring, tuple((s, -c) for s, c in self.terms))

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + (-other)

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        self._coerce(other)
        prods = [(s1 + s2, c1 * c2) for (s1, c1), (s2, c2) in itertools.product(self.terms, other.terms)]
        return ExpPoly.make(self._prime(other), self.ring, prods)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(s == 0 for s, _ in self.terms)

    def at(self, k: int):
        total = self.ring.zero
        for s, c in self.terms:
            if s != 0:
                e = s * k
                c = c * self.p**e if self.ring == RATIONAL and e >= 0 else c * self.ring.scalar(Fraction(self.p) ** e)
            total = total + c
        return total

    def real_imag(self) -> tuple["ExpPoly", "ExpPoly"]:
        if self.ring != GAUSSIAN:
            raise TypeError("real_imag needs Gaussian coefficients")
        re = ExpPoly.make(self.p, RATIONAL, [(s, c.re) for s, c in self.terms])
        im = ExpPoly.make(self.p, RATIONAL, [(s, c.im) for s, c in self.terms])
        return re, im

    def to_json(self) -> list:
        return [[s, self.ring.format(c)] for s, c in self.terms]

    @classmethod
    def from_json(cls, p, ring: Ring, obj) -> "ExpPoly":
        return cls.make(p, ring, [(int(s), ring.parse(str(c))) for s, c in obj])

    def text(self) -> str:
        if not self.terms:
            return "0"
        parts = [_term_text(self.p, self.ring, s, c) for s, c in self.terms]
        out = parts[0]
        for part in parts[1:]:
            out += " - " + part[1:] if part.startswith("-") else " + " + part
        return out


def _term_text(p, ring: Ring, slope: int, c) -> str:
    if slope == 0:
        return ring.format(c)
    exponent = 0
    unit = c
    if ring == RATIONAL:
        exponent = valuation(p, c)
        unit = unit_part(p, c)
    elif isinstance(c, GaussianRational) and c.im == 0:
        exponent = valuation(p, c.re)
        unit = GaussianRational(unit_part(p, c.re), 0)
    power = Affine(slope, exponent).text()
    power = f"p^{power}" if power in ("k",) else f"p^({power})"
    if ring == RATIONAL:
        if unit == 1:
            return power
        if unit == -1:
            return "-" + power
        return f"{format_rational(unit)}*{power}"
    if isinstance(unit, GaussianRational) and unit.im == 0:
        if unit.re == 1:
            return power
        if unit.re == -1:
            return "-" + power
        return f"{format_rational(unit.re)}*{power}"
    return f"({ring.format(unit)})*{power}"


def valuation_exp(P: ExpPoly, hz: Horizon):
    """Eventual p-adic valuation of a rational exponential polynomial: an ``Affine`` or ``INF``."""
    if P.ring != RATIONAL:
        raise TypeError("valuations are taken of rational sequences only")
    if P.is_zero():
        return INF
    s0, c0 = P.terms[0]
    v0 = valuation(P.p, c0)
    for s, c in P.terms[1:]:
        # need (s - s0) k + v(c) - v0 > 0
        _, start = settle(s - s0, valuation(P.p, c) - v0)
        hz.bump(start)
    return Affine(s0, v0)


def nonzero_from(P: ExpPoly) -> int | None:
    """An index from which ``P(k) != 0`` for every k; ``None`` if ``P`` vanishes identically."""
    if P.is_zero():
        return None
    if P.ring == RATIONAL:
        hz = Horizon()
        valuation_exp(P, hz)
        return hz.start
    if P.ring == GAUSSIAN:
        starts = [nonzero_from(part) for part in P.real_imag()]
        return min(s for s in starts if s is not None)
    if P.is_constant():
        return 1
    raise TypeError(f"cannot bound zeros of {P!r}")


def nonzero_from_exact(P: ExpPoly, lo: int = 1) -> int | None:
    """Smallest ``s >= lo`` with ``P(k) != 0`` for all ``k >= s``."""
    s = nonzero_from(P)
    if s is None:
        return None
    s = max(s, lo)
    while s - 1 >= lo and P.at(s - 1):
        s -= 1
    return s


def affine_cmp(a, b, hz: Horizon) -> int:
    """Eventual sign of ``a(k) - b(k)``; either side may be ``INF``."""
    if a == INF or b == INF:
        if a == b:
            return 0
        return 1 if a == INF else -1
    sign, start = settle(a.slope - b.slope, a.offset - b.offset)
    hz.bump(start)
    return sign


def eventual_min(values, hz: Horizon):
    finite = [v for v in values if v != INF]
    if not finite:
        return INF
    best = min(finite, key=lambda a: (a.slope, a.offset))
    for other in finite:
        affine_cmp(other, best, hz)
    return best


# ---------------------------------------------------------------------------
# symbolic points and balls in Q_p^n

SymPoint = tuple  # tuple of rational ExpPoly, one per coordinate


def sym_constant_point(p: int, x) -> SymPoint:
    return tuple(ExpPoly.constant(p, RATIONAL, Fraction(c)) for c in x)


def sym_point_at(X: SymPoint, k: int) -> tuple:
    return tuple(c.at(k) for c in X)


@dataclass(frozen=True)
class SymBall:
    center: SymPoint
    radius: Affine

    def at(self, space: QpSpace, k: int) -> Ball:
        return Ball(space, sym_point_at(self.center, k), self.radius(k))


def sym_distance(X: SymPoint, Y: SymPoint, hz: Horizon):
    return eventual_min([valuation_exp(x - y, hz) for x, y in zip(X, Y)], hz)


def sym_member(X: SymPoint, B: SymBall, hz: Horizon) -> bool:
    return affine_cmp(sym_distance(X, B.center, hz), B.radius, hz) >= 0


def sym_relation(A: SymBall, B: SymBall, hz: Horizon) -> Relation:
    c = affine_cmp(A.radius, B.radius, hz)
    if c >= 0:
        if sym_member(A.center, B, hz):
            return Relation.EQUAL if c == 0 else Relation.FIRST_INSIDE_SECOND
        return Relation.DISJOINT
    if sym_member(B.center, A, hz):
        return Relation.SECOND_INSIDE_FIRST
    return Relation.DISJOINT


def eventual_residue(P: ExpPoly, shift: Affine, hz: Horizon) -> int:
    """Eventual value of ``(P(k) / p**shift(k)) mod p``; the quotient must be eventually integral."""
    p = P.p
    digit = 0
    for s, c in P.terms:
        c2 = c / Fraction(p) ** shift.offset
        s2 = s - shift.slope
        v = valuation(p, c2)
        if s2 > 0:
            # v + s2*k >= 1 from here on
            _, start = settle(s2, v - 1 + Fraction(1, 2))
            hz.bump(start)
        elif s2 == 0:
            if v < 0:
                raise NotEventuallyIntegral(f"term {c2} has negative valuation")
            digit += residue_mod(c2, p)
        else:
            raise NotEventuallyIntegral("valuation decreases without bound")
    return digit % p


def sym_child_digits(D: SymBall, B: SymBall, hz: Horizon) -> tuple:
    """Which child of ``B`` contains the sub-ball ``D``, as a digit vector."""
    return tuple(eventual_residue(d - b, B.radius, hz) for d, b in zip(D.center, B.center))


def sym_child(B: SymBall, digit_vector) -> SymBall:
    p = B.center[0].p
    center = tuple(
        c + ExpPoly.monomial(p, RATIONAL, Fraction(d), B.radius) if d else c
        for c, d in zip(B.center, digit_vector)
    )
    return SymBall(center, B.radius + 1)
