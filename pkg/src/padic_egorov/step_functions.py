"""Locally constant, compactly supported functions as finite ball/value lists.

Every ``StepFunction`` is kept in canonical form: pairwise disjoint balls,
nonzero values, no complete family of sibling balls sharing one value, and
pieces sorted by ``Ball.sort_key``. In an ultrametric space this makes the
pieces exactly the maximal balls on which the function is a nonzero
constant, so two functions are equal as maps iff their piece tuples are
equal.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

from .exact_numbers import RATIONAL, MixedRings, Ring, residue_mod, ring_from_json, ring_of, valuation
from .spaces import (
    Ball,
    FiniteDiscreteSpace,
    MixedSpaces,
    QpSpace,
    Relation,
    Space,
    ball_from_json,
    ball_relation,
    in_ball,
    space_from_json,
    split_ball,
)


class NotSupported(ValueError):
    pass


class _EverywhereConstant:
    def __repr__(self):
        return "EVERYWHERE_CONSTANT"


EVERYWHERE_CONSTANT = _EverywhereConstant()


@dataclass(frozen=True)
class StepFunction:
    space: Space
    ring: Ring
    pieces: tuple = ()

    @classmethod
    def zero(cls, space: Space, ring: Ring) -> "StepFunction":
        return cls(space, ring, ())

    @classmethod
    def from_pieces(cls, space: Space, ring: Ring, pieces) -> "StepFunction":
        """Build a canonical function from arbitrary (possibly overlapping) pieces; overlaps add."""
        totals = {}
        for ball, value in pieces:
            if ball.space != space:
                raise MixedSpaces("ball and function live on different spaces")
            if not ring.contains(value):
                raise MixedRings(f"{value!r} is not an element of {ring!r}")
            totals[ball] = totals.get(ball, ring.zero) + value
        if isinstance(space, QpSpace):
            return _qp_from_pieces(space, ring, totals)
        total = cls.zero(space, ring)
        for ball, value in totals.items():
            total = add(total, char_fn(ball, value, ring))
        return total

    def __call__(self, x):
        return evaluate(self, x)

    def is_zero(self) -> bool:
        return not self.pieces

    @property
    def balls(self) -> list[Ball]:
        return [b for b, _ in self.pieces]

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "ring": self.ring.to_json(),
            "pieces": [
                {"ball": b.to_json(), "value": self.ring.format(v)} for b, v in self.pieces
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StepFunction":
        space = space_from_json(obj["space"])
        ring = ring_from_json(obj["ring"])
        pieces = [
            (ball_from_json(space, item["ball"]), ring.parse(str(item["value"])))
            for item in obj.get("pieces", [])
        ]
        return cls.from_pieces(space, ring, pieces)


def _canonical(space: Space, ring: Ring, values: dict) -> StepFunction:
    # values: disjoint balls -> ring values
    levels = defaultdict(dict)
    for b, v in values.items():
        if v:
            levels[b.gamma][b] = v
    branching = space.branching
    lowest = 1 if isinstance(space, FiniteDiscreteSpace) else None
    # merging only ever moves pieces one level up, so one sweep from the finest level suffices
    gamma = max(levels, default=0)
    while levels and gamma >= min(levels) and (lowest is None or gamma >= lowest):
        level = levels.get(gamma, {})
        groups = defaultdict(list)
        for b in level:
            groups[b.parent()].append(b)
        for parent, members in groups.items():
            if len(members) != branching:
                continue
            first = level[members[0]]
            if all(level[m] == first for m in members[1:]):
                for m in members:
                    del level[m]
                levels[gamma - 1][parent] = first
        gamma -= 1
    pieces = tuple(
        sorted(((b, v) for level in levels.values() for b, v in level.items()), key=lambda item: item[0].sort_key())
    )
    return StepFunction(space, ring, pieces)


def char_fn(b: Ball, theta, ring: Ring | None = None) -> StepFunction:
    """The function equal to ``theta`` on ``b`` and zero elsewhere; plain ints count as scalars."""
    if isinstance(theta, int):
        ring = ring or RATIONAL
        theta = ring.scalar(theta)
    if ring is None:
        ring = ring_of(theta)
    if not ring.contains(theta):
        raise MixedRings(f"{theta!r} is not an element of {ring!r}")
    if not theta:
        return StepFunction.zero(b.space, ring)
    return StepFunction(b.space, ring, ((b, theta),))


def evaluate(f: StepFunction, x):
    f.space.check_point(x)
    for b, v in f.pieces:
        if in_ball(x, b):
            return v
    return f.ring.zero


def _refine(ball: Ball, inner: list[Ball]) -> list[Ball]:
    if not inner:
        return [ball]
    atoms = []
    for child in split_ball(ball):
        strictly = [b for b in inner if ball_relation(b, child) is Relation.FIRST_INSIDE_SECOND]
        atoms.extend(_refine(child, strictly))
    return atoms


class _DigitIndex:
    """Balls of one Q_p^n keyed by integer digit vectors, so containment is a dictionary lookup.

    A ball of exponent ``gamma`` gets the key ``center * p^-low mod p^(gamma - low)``,
    coordinatewise, where ``low`` lies below every exponent and center valuation
    involved. The ancestor at exponent ``g`` has the key reduced mod ``p^(g - low)``.
    """

    def __init__(self, space: QpSpace, balls):
        self.space = space
        self.p = space.p
        lows = [b.gamma for b in balls] + [valuation(self.p, c) for b in balls for c in b.center if c]
        self.low = min(lows, default=0)
        self.scale = Fraction(self.p) ** -self.low

    def key(self, b: Ball) -> tuple:
        m = self.p ** (b.gamma - self.low)
        return tuple(residue_mod(c * self.scale, m) for c in b.center)

    def truncate(self, key: tuple, gamma: int) -> tuple:
        m = self.p ** (gamma - self.low)
        return tuple(x % m for x in key)

    def ball(self, gamma: int, key: tuple) -> Ball:
        # keys below p^(gamma - low) are exactly the digit strings of canonical centers
        if self.low >= 0:
            center = tuple(Fraction(x * self.p**self.low) for x in key)
        else:
            center = tuple(Fraction(x, self.p**-self.low) for x in key)
        return Ball.trusted(self.space, center, gamma)

    def children(self, gamma: int, key: tuple):
        """Keys of the ``p^n`` balls one step below ``(gamma, key)``."""
        step = self.p ** (gamma - self.low)
        for digits in itertools.product(range(self.p), repeat=self.space.n):
            yield tuple(x + d * step for x, d in zip(key, digits))


def _qp_canonical(index: _DigitIndex, ring: Ring, values: dict) -> StepFunction:
    """Canonical function from disjoint ``(gamma, key) -> value`` atoms."""
    levels = defaultdict(dict)
    for (gamma, key), v in values.items():
        if v:
            levels[gamma][key] = v
    branching = index.space.branching
    gamma = max(levels, default=0)
    lowest = min(levels, default=0)
    while gamma >= lowest:
        level = levels.get(gamma)
        if level:
            groups = defaultdict(list)
            for key in level:
                groups[index.truncate(key, gamma - 1)].append(key)
            for parent, members in groups.items():
                if len(members) != branching:
                    continue
                first = level[members[0]]
                if all(level[m] == first for m in members[1:]):
                    for m in members:
                        del level[m]
                    levels[gamma - 1][parent] = first
                    lowest = min(lowest, gamma - 1)
        gamma -= 1
    # for a fixed gamma, comparing keys as integers orders centers like Ball.sort_key
    items = sorted((g, key, v) for g, level in levels.items() for key, v in level.items())
    return StepFunction(index.space, ring, tuple((index.ball(g, key), v) for g, key, v in items))


def _qp_from_pieces(space: QpSpace, ring: Ring, totals: dict) -> StepFunction:
    index = _DigitIndex(space, list(totals))
    atoms = {}
    gammas = []
    # coarse balls first: a later ball equals an atom, lies inside one, or misses them all
    for ball in sorted(totals, key=lambda b: b.gamma):
        g, key, v = ball.gamma, index.key(ball), totals[ball]
        owner = None
        for h in gammas:
            if h > g:
                break
            slot = (h, index.truncate(key, h))
            if slot in atoms:
                owner = slot
                break
        if owner is not None:
            h = owner[0]
            base = atoms.pop(owner)
            for level in range(h, g):
                parent, here = index.truncate(key, level), index.truncate(key, level + 1)
                for child in index.children(level, parent):
                    if child != here:
                        atoms[(level + 1, child)] = base
                if level + 1 not in gammas:
                    gammas.append(level + 1)
            v = base + v
        if v:
            atoms[(g, key)] = v
            if g not in gammas:
                gammas.append(g)
        gammas.sort()
    return _qp_canonical(index, ring, atoms)


class _Table:
    """One step function as ``(gamma, key) -> value`` with its exponents."""

    def __init__(self, index: _DigitIndex, f: StepFunction):
        self.index = index
        self.values = {(b.gamma, index.key(b)): v for b, v in f.pieces}
        self.moduli = [(g, index.p ** (g - index.low)) for g in sorted({g for g, _ in self.values})]
        self.zero = f.ring.zero

    def owner(self, gamma: int, key: tuple):
        """The piece containing the ball ``(gamma, key)``, as ``(gamma, key)``, or None."""
        values = self.values
        for g, m in self.moduli:
            if g > gamma:
                break
            slot = (g, tuple(x % m for x in key))
            if slot in values:
                return slot
        return None

    def value(self, gamma: int, key: tuple):
        # atoms are very often pieces of the table itself
        v = self.values.get((gamma, key))
        if v is not None:
            return v
        slot = self.owner(gamma, key)
        return self.zero if slot is None else self.values[slot]


def _qp_atoms(index: _DigitIndex, tables: list) -> set:
    p, n = index.p, index.space.n
    inner = defaultdict(list)
    for i, t in enumerate(tables):
        for gamma, key in t.values:
            for j, other in enumerate(tables):
                if j == i:
                    continue
                slot = other.owner(gamma - 1, key)
                if slot is not None:
                    inner[(j, slot)].append((gamma, key))
    atoms = set()
    for i, t in enumerate(tables):
        for slot in t.values:
            stack = [(slot, inner[(i, slot)])]
            while stack:
                (gamma, key), below = stack.pop()
                if not below:
                    atoms.add((gamma, key))
                    continue
                step = p ** (gamma - index.low)
                groups = defaultdict(list)
                for g2, k2 in below:
                    groups[tuple(x // step % p for x in k2)].append((g2, k2))
                for digits in itertools.product(range(p), repeat=n):
                    child = tuple(x + d * step for x, d in zip(key, digits))
                    deeper = [e for e in groups.get(digits, ()) if e[0] > gamma + 1]
                    stack.append(((gamma + 1, child), deeper))
    return atoms


def refinement_atoms(*fs: StepFunction) -> list[Ball]:
    """Disjoint balls refining the supports of all ``fs`` jointly.

    Each atom lies inside or outside every piece of every input, and the
    atoms cover the union of the supports. Only overlapping pieces are split.
    """
    if fs and isinstance(fs[0].space, QpSpace):
        index = _DigitIndex(fs[0].space, [b for f in fs for b in f.balls])
        tables = [_Table(index, f) for f in fs]
        return sorted((index.ball(g, k) for g, k in _qp_atoms(index, tables)), key=Ball.sort_key)
    atoms = set()
    for i, f in enumerate(fs):
        others = [b for j, g in enumerate(fs) if j != i for b in g.balls]
        for b in f.balls:
            inner = [o for o in others if ball_relation(o, b) is Relation.FIRST_INSIDE_SECOND]
            atoms.update(_refine(b, inner))
    return sorted(atoms, key=Ball.sort_key)


def _check_compatible(f: StepFunction, g: StepFunction) -> None:
    if f.space != g.space:
        raise MixedSpaces("step functions live on different spaces")
    if f.ring != g.ring:
        raise MixedRings(f"{f.ring!r} vs {g.ring!r}")


def _combine(f: StepFunction, g: StepFunction, op) -> StepFunction:
    _check_compatible(f, g)
    # a ball that is a piece of both operands overlaps no other piece, so it is already an atom
    fd, gd = dict(f.pieces), dict(g.pieces)
    shared = fd.keys() & gd.keys()
    everything = f.balls + g.balls
    values = {b: op(fd[b], gd[b]) for b in shared}
    if shared:
        f = StepFunction(f.space, f.ring, tuple(item for item in f.pieces if item[0] not in shared))
        g = StepFunction(g.space, g.ring, tuple(item for item in g.pieces if item[0] not in shared))
    if isinstance(f.space, QpSpace):
        index = _DigitIndex(f.space, everything)
        tf, tg = _Table(index, f), _Table(index, g)
        atoms = {(b.gamma, index.key(b)): v for b, v in values.items()}
        for gamma, key in _qp_atoms(index, [tf, tg]):
            atoms[(gamma, key)] = op(tf.value(gamma, key), tg.value(gamma, key))
        return _qp_canonical(index, f.ring, atoms)
    for atom in refinement_atoms(f, g):
        values[atom] = op(evaluate(f, atom.center), evaluate(g, atom.center))
    return _canonical(f.space, f.ring, values)


def add(f: StepFunction, g: StepFunction) -> StepFunction:
    if g.is_zero():
        _check_compatible(f, g)
        return f
    if f.is_zero():
        _check_compatible(f, g)
        return g
    return _combine(f, g, lambda a, b: a + b)


def _clip_product(f: StepFunction, g: StepFunction) -> StepFunction:
    # each piece of f meets g either inside one piece of g or around several whole ones
    values = {}
    for b, v in f.pieces:
        for c, w in g.pieces:
            rel = ball_relation(b, c)
            if rel is Relation.DISJOINT:
                continue
            if rel is Relation.SECOND_INSIDE_FIRST:
                values[c] = v * w
            else:
                values[b] = v * w
                break
    return _canonical(f.space, f.ring, values)


def mul(f: StepFunction, g: StepFunction) -> StepFunction:
    _check_compatible(f, g)
    if f.is_zero() or g.is_zero():
        return StepFunction.zero(f.space, f.ring)
    if len(f.pieces) <= _CLIP_LIMIT:
        return _clip_product(f, g)
    if len(g.pieces) <= _CLIP_LIMIT:
        return _clip_product(g, f)
    return _combine(f, g, lambda a, b: a * b)


# below this many pieces on one side, multiplying piece against piece beats a common refinement
_CLIP_LIMIT = 8


def neg(f: StepFunction) -> StepFunction:
    return StepFunction(f.space, f.ring, tuple((b, -v) for b, v in f.pieces))


def sub(f: StepFunction, g: StepFunction) -> StepFunction:
    return add(f, neg(g))


def scale(f: StepFunction, c) -> StepFunction:
    if isinstance(c, int):
        c = f.ring.scalar(c)
    if not f.ring.contains(c):
        raise MixedRings(f"{c!r} is not an element of {f.ring!r}")
    return _canonical(f.space, f.ring, {b: c * v for b, v in f.pieces})


def restrict(f: StepFunction, K: Ball) -> StepFunction:
    """``f`` on ``K``, zero outside."""
    if K.space != f.space:
        raise MixedSpaces("ball and function live on different spaces")
    return mul(f, char_fn(K, f.ring.one, f.ring))


def constancy_exponent(f: StepFunction, x):
    """Smallest ``gamma`` such that ``f`` is constant on the ball of exponent ``gamma`` around ``x``.

    Returns ``EVERYWHERE_CONSTANT`` for the zero function, the only globally
    constant compactly supported function.
    """
    if not isinstance(f.space, QpSpace):
        raise NotSupported("constancy exponent is defined on Q_p^n only")
    f.space.check_point(x)
    if f.is_zero():
        return EVERYWHERE_CONSTANT

    def constant_on(ball: Ball) -> bool:
        # in canonical form a ball is constant iff it sits inside one piece or misses them all
        for b, _ in f.pieces:
            rel = ball_relation(ball, b)
            if rel is Relation.SECOND_INSIDE_FIRST:
                return False
        return True

    gamma = max(b.gamma for b in f.balls)
    if not constant_on(Ball(f.space, x, gamma)):
        raise AssertionError("non-canonical step function")
    while constant_on(Ball(f.space, x, gamma - 1)):
        gamma -= 1
    return gamma
