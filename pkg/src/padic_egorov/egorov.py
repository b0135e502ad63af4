"""The quotient by negligible families: vanishing on compacts, equality, point values.

A family is negligible when on every compact set it is eventually zero.
Compact sets of Q_p^n sit inside balls ``Ball(0, -m)``, and for a family in
normal form one ball suffices: past the horizon every tail ball either
escapes every fixed ball, grows to contain it, or stays inside a fixed ball
around the origin. The decision on that ball looks for a point covered by a
ball whose accumulated coefficient is nonzero and which no smaller tail ball
covers; such a point, written as a symbolic sequence, is the witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional

from .eventual import (
    Affine,
    ExpPoly,
    Horizon,
    SymBall,
    affine_cmp,
    nonzero_from_exact,
    sym_child,
    sym_child_digits,
    sym_constant_point,
    sym_distance,
    sym_member,
    sym_relation,
)
from .exact_numbers import MixedRings
from .generalized import (
    DEFAULT_BOUND,
    PointFamily,
    Proved,
    Refuted,
    ScalarFamily,
    Schedule,
    Unknown,
    Verdict,
    compact_ball,
    constant_point,
)
from .sequences import (
    Constant,
    ExplicitThen,
    MonomialIndicator,
    Neg,
    NormalFamily,
    Prod,
    SequenceFamily,
    Sum,
    difference,
    normalize_family,
    nth,
    term_value,
)
from .spaces import Ball, FiniteDiscreteSpace, MixedSpaces, Relation, ball_relation, in_ball
from .step_functions import StepFunction, add, char_fn, mul, neg, restrict


class NotCompactlySupported(ValueError):
    pass


class MalformedCertificate(ValueError):
    pass


@dataclass(frozen=True)
class GeneralizedFunction:
    """A class in the quotient, handled through one representative family."""

    representative: SequenceFamily

    @property
    def space(self):
        return self.representative.space

    @property
    def ring(self):
        return self.representative.ring

    def __add__(self, other: "GeneralizedFunction") -> "GeneralizedFunction":
        return GeneralizedFunction(Sum(self.representative, other.representative))

    def __mul__(self, other: "GeneralizedFunction") -> "GeneralizedFunction":
        return GeneralizedFunction(Prod(self.representative, other.representative))

    def __neg__(self) -> "GeneralizedFunction":
        return GeneralizedFunction(Neg(self.representative))

    def __sub__(self, other: "GeneralizedFunction") -> "GeneralizedFunction":
        return GeneralizedFunction(difference(self.representative, other.representative))

    def point_value(self, x) -> ScalarFamily:
        return point_value(self.representative, x)

    def at(self, X: PointFamily) -> ScalarFamily:
        return eval_at_gpoint(self.representative, X)

    def is_zero(self, bound: int = DEFAULT_BOUND) -> Verdict:
        return is_negligible_global(self.representative, bound)


def _family(F) -> SequenceFamily:
    return F.representative if isinstance(F, GeneralizedFunction) else F


# ---------------------------------------------------------------------------
# evaluation

def _eval_normal(normal: NormalFamily, X: PointFamily) -> ScalarFamily:
    space, ring = normal.space, normal.ring
    hz = Horizon(max(normal.start, len(X.prefix) + 1))
    if isinstance(space, FiniteDiscreteSpace):
        tail = ExpPoly.constant(None, ring, normal.tail_function(X.tail))
    else:
        tail = ExpPoly.zero(space.p, ring)
        for t in normal.terms:
            if sym_member(X.tail, t.ball, hz):
                tail = tail + t.coeff
    prefix = tuple(normal.value_at(k, X.at(k)) for k in range(1, hz.start))
    return ScalarFamily(ring, prefix, tail)


def eval_at_gpoint(F: SequenceFamily, X: PointFamily) -> ScalarFamily:
    """``k -> nth(F, k)(X_k)`` in closed form."""
    F = _family(F)
    if X.space != F.space:
        raise MixedSpaces("point family and family live on different spaces")
    if compact_ball(X) is None:
        raise NotCompactlySupported("the point family leaves every ball")
    return _eval_normal(normalize_family(F), X)


def point_value(F: SequenceFamily, x) -> ScalarFamily:
    F = _family(F)
    return eval_at_gpoint(F, constant_point(F.space, x))


# ---------------------------------------------------------------------------
# negligibility

def _find_exposed(B: SymBall, subs: list, hz: Horizon):
    """A symbolic point of ``B`` outside every ball in ``subs`` (all strictly inside ``B``), or None."""
    if not subs:
        return B.center
    n = len(B.center)
    p = B.center[0].p
    occupied: dict = {}
    for D in subs:
        occupied.setdefault(sym_child_digits(D, B, hz), []).append(D)
    for d in product(range(p), repeat=n):
        if d not in occupied:
            return sym_child(B, d).center
    for d in product(range(p), repeat=n):
        members = occupied[d]
        child = sym_child(B, d)
        if len(members) == 1 and affine_cmp(members[0].radius, child.radius, hz) == 0:
            continue
        found = _find_exposed(child, members, hz)
        if found is not None:
            return found
    return None


def _find_witness(normal: NormalFamily, K: SymBall, hz: Horizon):
    """A symbolic point eventually in ``K`` where the tail is eventually nonzero, with the value there."""
    groups: list = []
    for t in normal.terms:
        rel = sym_relation(t.ball, K, hz)
        if rel is Relation.DISJOINT:
            continue
        ball = K if rel is Relation.SECOND_INSIDE_FIRST else t.ball
        for g in groups:
            if sym_relation(g[0], ball, hz) is Relation.EQUAL:
                g[1] = g[1] + t.coeff
                break
        else:
            groups.append([ball, t.coeff])
    groups = [g for g in groups if not g[1].is_zero()]
    m = len(groups)
    rel = [
        [Relation.EQUAL if i == j else sym_relation(groups[i][0], groups[j][0], hz) for j in range(m)]
        for i in range(m)
    ]
    for i in range(m):
        value = ExpPoly.zero(normal.space.p, normal.ring)
        for j in range(m):
            if rel[i][j] in (Relation.EQUAL, Relation.FIRST_INSIDE_SECOND):
                value = value + groups[j][1]
        if value.is_zero():
            continue
        subs = [j for j in range(m) if rel[j][i] is Relation.FIRST_INSIDE_SECOND]
        maximal = [j for j in subs if not any(rel[j][l] is Relation.FIRST_INSIDE_SECOND for l in subs)]
        point = _find_exposed(groups[i][0], [groups[j][0] for j in maximal], hz)
        if point is not None:
            return point, value
    return None


def _proved(normal: NormalFamily, K: Ball, horizon: int, bound: int, certificate: dict) -> Verdict:
    if horizon - 1 > bound:
        return Unknown(bound, f"the tail settles only from index {horizon}")
    last = 0
    for k in range(1, horizon):
        if not nth_on(normal.source, k, K).is_zero():
            last = k
    certificate = dict(certificate, horizon=horizon, ball=K.to_json())
    return Proved(last + 1, certificate, K)


def _refuted(normal: NormalFamily, K: Ball, X: PointFamily, certificate: dict) -> Refuted:
    values = _eval_normal(normal, X)
    lo = len(values.prefix) + 1
    if not isinstance(K.space, FiniteDiscreteSpace):
        hz = Horizon(lo)
        inside = sym_member(X.tail, SymBall(sym_constant_point(K.space.p, K.center), Affine(0, K.gamma)), hz)
        if not inside:
            raise AssertionError("witness family does not stay in the ball")
        lo = hz.start
    start = nonzero_from_exact(values.tail, lo)
    if start is None:
        raise AssertionError("witness family gives an eventually zero value")
    while start > 1 and values.at(start - 1) and in_ball(X.at(start - 1), K):
        start -= 1
    certificate = dict(certificate, value=values.tail.text(), ball=K.to_json())
    return Refuted(Schedule.from_index(start, X), certificate, K)


def _negligible_on_normal(normal: NormalFamily, K: Ball, bound: int) -> Verdict:
    space = normal.space
    if isinstance(space, FiniteDiscreteSpace):
        on_K = restrict(normal.tail_function, K)
        if on_K.is_zero():
            return _proved(normal, K, normal.start, bound, {"reason": "tail vanishes on the ball"})
        label = on_K.pieces[0][0].center
        return _refuted(normal, K, constant_point(space, label), {"reason": "tail is nonzero at a point"})
    hz = Horizon(normal.start)
    Ksym = SymBall(sym_constant_point(space.p, K.center), Affine(0, K.gamma))
    found = _find_witness(normal, Ksym, hz)
    if found is None:
        return _proved(normal, K, hz.start, bound, {"reason": "tail terms cancel or miss the ball"})
    point, _ = found
    return _refuted(normal, K, PointFamily(space, (), point), {"reason": "exposed tail region"})


def is_negligible_on(F: SequenceFamily, K: Ball, bound: int = DEFAULT_BOUND) -> Verdict:
    """Is ``F`` eventually zero on the ball ``K``?"""
    F = _family(F)
    if K.space != F.space:
        raise MixedSpaces("ball and family live on different spaces")
    return _negligible_on_normal(normalize_family(F), K, bound)


def critical_ball(normal: NormalFamily) -> Ball:
    """A ball around the origin that decides negligibility on every compact set."""
    space = normal.space
    if isinstance(space, FiniteDiscreteSpace):
        return Ball(space, space.points[0], 0)
    hz = Horizon(normal.start)
    origin = sym_constant_point(space.p, (0,) * space.n)
    bounds = []
    for t in normal.terms:
        vc = sym_distance(t.ball.center, origin, hz)
        if affine_cmp(vc, t.ball.radius, hz) >= 0:
            # the ball is eventually Ball(0, r(k)); it shrinks or stays put unless r decreases
            if t.ball.radius.slope >= 0:
                bounds.append(t.ball.radius)
        elif vc.slope >= 0:
            # a ball missing 0 lies on the sphere of its center
            bounds.append(vc)
    gamma0 = min((a(hz.start) for a in bounds), default=1)
    return Ball(space, (Fraction(0),) * space.n, min(0, gamma0 - 1))


def is_negligible_global(F: SequenceFamily, bound: int = DEFAULT_BOUND) -> Verdict:
    """Is ``F`` eventually zero on every compact set?

    A ``Proved`` verdict carries the deciding ball; its ``N`` holds on that
    ball and every ball inside it.
    """
    F = _family(F)
    normal = normalize_family(F)
    return _negligible_on_normal(normal, critical_ball(normal), bound)


def gf_equal(u, v, bound: int = DEFAULT_BOUND) -> Verdict:
    u, v = _family(u), _family(v)
    if u.space != v.space:
        raise MixedSpaces("families live on different spaces")
    if u.ring != v.ring:
        raise MixedRings(f"{u.ring!r} vs {v.ring!r}")
    return is_negligible_global(difference(u, v), bound)


def refutation_to_gpoint(F: SequenceFamily, r: Refuted) -> PointFamily:
    """A compactly supported point family at which ``F`` takes a nonzero generalized value."""
    F = _family(F)
    if not isinstance(r, Refuted) or r.schedule.points is None:
        raise MalformedCertificate("a refutation with witness points is required")
    W = r.schedule.points
    if W.space != F.space:
        raise MalformedCertificate("witness points live on another space")
    m = r.schedule.indices
    start = m(1)
    if m.slope != 1 or any(m(i) != start + i - 1 for i in range(1, m.start + 1)):
        raise MalformedCertificate("witness schedule is not an index tail")
    filler = W.at(start)
    length = max(start - 1, len(W.prefix))
    prefix = tuple(filler if k < start else W.at(k) for k in range(1, length + 1))
    X = PointFamily(F.space, prefix, W.tail)
    if compact_ball(X) is None:
        raise MalformedCertificate("witness points are not compactly supported")
    value = eval_at_gpoint(F, X)
    if value.tail.is_zero():
        raise MalformedCertificate("the family vanishes along the witness points")
    return X


# ---------------------------------------------------------------------------
# independent rechecks

def nth_on(F: SequenceFamily, k: int, K: Ball) -> StepFunction:
    """``restrict(nth(F, k), K)`` computed from the AST, restricting leaves first."""
    if isinstance(F, MonomialIndicator):
        b = F.ball(k)
        rel = ball_relation(b, K)
        if rel is Relation.DISJOINT:
            return StepFunction.zero(F.space, F.ring)
        inner = K if rel is Relation.SECOND_INSIDE_FIRST else b
        return char_fn(inner, F.coefficient(k), F.ring)
    if isinstance(F, Constant):
        return restrict(F.f, K)
    if isinstance(F, ExplicitThen):
        if k <= len(F.prefix):
            return restrict(F.prefix[k - 1], K)
        return nth_on(F.tail, k, K)
    if isinstance(F, Sum):
        return add(nth_on(F.left, k, K), nth_on(F.right, k, K))
    if isinstance(F, Prod):
        return mul(nth_on(F.left, k, K), nth_on(F.right, k, K))
    if isinstance(F, Neg):
        return neg(nth_on(F.arg, k, K))
    return restrict(nth(F, k), K)


def recheck_negligibility(F, verdict: Verdict, span: int = 200, count: int = 50) -> list[str]:
    """Recompute a negligibility verdict term by term; returns the failures found."""
    F = _family(F)
    failures = []
    if isinstance(verdict, Proved):
        for k in range(verdict.N, verdict.N + span + 1):
            if not nth_on(F, k, verdict.ball).is_zero():
                failures.append(f"term {k} is nonzero on the ball")
    elif isinstance(verdict, Refuted):
        for k in verdict.schedule.first(count):
            x = verdict.schedule.points.at(k)
            if verdict.ball is not None and not in_ball(x, verdict.ball):
                failures.append(f"witness {k} is outside the ball")
            elif not term_value(F, k, x):
                failures.append(f"term {k} vanishes at its witness")
    return failures


def recheck_scalar(s: ScalarFamily, verdict: Verdict, span: int = 200, count: int = 50) -> list[str]:
    failures = []
    if isinstance(verdict, Proved):
        failures = [f"entry {k} is nonzero" for k in range(verdict.N, verdict.N + span + 1) if s.at(k)]
    elif isinstance(verdict, Refuted):
        failures = [f"entry {k} is zero" for k in verdict.schedule.first(count) if not s.at(k)]
    return failures


