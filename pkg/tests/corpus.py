"""Seeded generators for step functions, families and point families."""

import random
from dataclasses import replace
from fractions import Fraction

from padic_egorov.eventual import Affine, ExpPoly
from padic_egorov.exact_numbers import GAUSSIAN, RATIONAL, GaussianRational, IntMod, IntModRing
from padic_egorov.generalized import PointFamily, constant_point, monomial_point
from padic_egorov.sequences import (
    Constant,
    ExplicitThen,
    IntegerMap,
    MonomialIndicator,
    Neg,
    Prod,
    Sum,
)
from padic_egorov.spaces import Ball, FiniteDiscreteSpace, QpSpace
from padic_egorov.step_functions import StepFunction

INTMOD6 = IntModRing(6)


def rand_rational(rng, p, lo=-4, hi=6):
    if rng.random() < 0.1:
        return Fraction(0)
    while True:
        num, den = rng.randint(1, p**3), rng.randint(1, p**2)
        if num % p and den % p:
            break
    return rng.choice((1, -1)) * Fraction(num, den) * Fraction(p) ** rng.randint(lo, hi)


def rand_value(rng, ring):
    if ring == RATIONAL:
        return Fraction(rng.choice((1, -1, 2, 3))) / rng.choice((1, 2, 3))
    if ring == GAUSSIAN:
        return GaussianRational(Fraction(rng.randint(-2, 2)), Fraction(rng.randint(-2, 2)))
    return IntMod(rng.randrange(ring.modulus), ring.modulus)


def rand_ball(rng, space, gamma_lo=-5, gamma_hi=5):
    if isinstance(space, FiniteDiscreteSpace):
        return Ball(space, rng.choice(space.points), rng.choice((0, 1, 1)))
    center = tuple(rand_rational(rng, space.p) for _ in range(space.n))
    return Ball(space, center, rng.randint(gamma_lo, gamma_hi))


def rand_step(rng, space, ring, max_pieces=6):
    pieces = [(rand_ball(rng, space), rand_value(rng, ring)) for _ in range(rng.randint(0, max_pieces))]
    return StepFunction.from_pieces(space, ring, pieces), pieces


def rand_map(rng, slopes, offsets, table_len=2):
    table = tuple(rng.randint(-2, 4) for _ in range(rng.randint(0, table_len)))
    return IntegerMap(table, rng.choice(slopes), rng.choice(offsets))


def rand_indicator(rng, space, ring):
    p = space.p
    unit = rand_value(rng, ring)
    while not unit:
        unit = rand_value(rng, ring)
    base = tuple(rng.choice((0, 1, -1, 2, Fraction(1, 2), p + 1)) for _ in range(space.n))
    center_exp = None if rng.random() < 0.3 else rand_map(rng, (-1, 0, 1, 1, 2), (-1, 0, 1, 2))
    offset = tuple(rng.choice((0, 0, 1, Fraction(1, p))) for _ in range(space.n))
    return MonomialIndicator(
        space,
        ring,
        unit,
        rand_map(rng, (0, 0, 1), (-1, 0, 1)),
        base,
        center_exp,
        rand_map(rng, (-1, 0, 1, 1, 2), (-2, -1, 0, 1, 2)),
        offset,
    )


def rand_family(rng, space, ring, depth=3):
    roll = rng.random()
    if depth == 0 or roll < 0.35:
        return rand_indicator(rng, space, ring)
    if roll < 0.45:
        return Constant(rand_step(rng, space, ring, 3)[0])
    if roll < 0.55:
        prefix = tuple(rand_step(rng, space, ring, 2)[0] for _ in range(rng.randint(1, 3)))
        return ExplicitThen(prefix, rand_family(rng, space, ring, depth - 1))
    if roll < 0.65:
        return Neg(rand_family(rng, space, ring, depth - 1))
    kind = Sum if roll < 0.85 else Prod
    return kind(rand_family(rng, space, ring, depth - 1), rand_family(rng, space, ring, depth - 1))


def perturbed(rng, F):
    prefix = tuple(rand_step(rng, F.space, F.ring, 2)[0] for _ in range(rng.randint(1, 4)))
    return ExplicitThen(prefix, F)


def rand_negligible(rng, space, ring, depth=2):
    """A family that is negligible by construction."""
    p = space.p
    roll = rng.random()
    if depth == 0 or roll < 0.3:
        F = rand_family(rng, space, ring, 2)
        return Sum(perturbed(rng, F), Neg(F))
    if roll < 0.45:
        # centers escape to infinity with bounded radius
        unit = rand_value(rng, ring) or ring.one
        base = tuple(rng.choice((1, -1, 2)) for _ in range(space.n))
        return MonomialIndicator(
            space, ring, unit, rand_map(rng, (0, 1), (0, 1)), base,
            IntegerMap.affine(-rng.randint(1, 2), rng.randint(-1, 1)),
            rand_map(rng, (0, 1), (-2, 0, 1)),
        )
    if roll < 0.55:
        # the same indicator with its schedules changed on finitely many indices
        F = rand_indicator(rng, space, ring)
        table = tuple(rng.randint(-2, 4) for _ in range(rng.randint(1, 3)))
        G = replace(F, radius_exp=IntegerMap(table, F.radius_exp.slope, F.radius_exp.offset))
        return Sum(F, Neg(G))
    if roll < 0.75:
        return Prod(rand_negligible(rng, space, ring, depth - 1), rand_family(rng, space, ring, 1))
    return Sum(rand_negligible(rng, space, ring, depth - 1), rand_negligible(rng, space, ring, depth - 1))


def rand_point_family(rng, space):
    """A compactly supported point family."""
    if isinstance(space, FiniteDiscreteSpace):
        prefix = tuple(rng.choice(space.points) for _ in range(rng.randint(0, 2)))
        return PointFamily(space, prefix, rng.choice(space.points))
    p = space.p
    prefix = tuple(
        tuple(rand_rational(rng, p) for _ in range(space.n)) for _ in range(rng.randint(0, 2))
    )
    roll = rng.random()
    if roll < 0.3:
        X = constant_point(space, tuple(rand_rational(rng, p, -2, 4) for _ in range(space.n)))
        return PointFamily(space, prefix, X.tail)
    if roll < 0.7:
        bases = tuple(rng.choice((0, 1, -1, 2, Fraction(1, 2))) for _ in range(space.n))
        return monomial_point(space, bases, Affine(rng.randint(0, 2), rng.randint(-1, 2)), prefix)
    tail = tuple(
        ExpPoly.constant(p, RATIONAL, rand_rational(rng, p, 0, 3))
        + ExpPoly.monomial(p, RATIONAL, rng.choice((1, -1, 3)), Affine(rng.randint(1, 2), rng.randint(-1, 1)))
        for _ in range(space.n)
    )
    return PointFamily(space, prefix, tail)


def discrete_space(size):
    return FiniteDiscreteSpace(tuple(f"x{i}" for i in range(size)))


def rand_discrete_step(rng, space, ring=INTMOD6):
    pieces = []
    if rng.random() < 0.3:
        pieces.append((Ball(space, space.points[0], 0), rand_value(rng, ring)))
    for label in space.points:
        if rng.random() < 0.4:
            pieces.append((Ball(space, label, 1), rand_value(rng, ring)))
    return StepFunction.from_pieces(space, ring, pieces)


def rand_discrete_family(rng, space, ring=INTMOD6):
    """An eventually constant family: explicit prefix, then a combination of constants."""
    tail = Constant(rand_discrete_step(rng, space, ring))
    roll = rng.random()
    if roll < 0.3:
        tail = Sum(tail, Neg(Constant(rand_discrete_step(rng, space, ring))))
    elif roll < 0.5:
        tail = Prod(tail, Constant(rand_discrete_step(rng, space, ring)))
    elif roll < 0.6:
        tail = Constant(StepFunction.zero(space, ring))
    prefix = tuple(rand_discrete_step(rng, space, ring) for _ in range(rng.randint(0, 4)))
    return ExplicitThen(prefix, tail)


QP_SPACES = [QpSpace(2), QpSpace(3), QpSpace(5), QpSpace(2, 2), QpSpace(3, 2)]
