"""Ready-made families and points, plus the reports that exercise them.

* ``counterexample_family``: indicators of the disjoint balls
  ``Ball(p^k, 2k+1)``, one per sphere ``|x| = p^-k``. Every standard point
  value vanishes, yet the family is not negligible on ``Z_p``.
* ``delta_embedding`` and ``phi_delta``: ``p^k`` times the indicator of
  ``Ball(0, k)`` (resp. ``Ball(0, phi(k))``). They agree at every standard
  point and differ at the generalized point ``(p^k)_k``.
* ``stripped_ball_family``: the same mechanism around any limit point of a
  sequence approaching it along a geometric progression.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .egorov import (
    eval_at_gpoint,
    gf_equal,
    is_negligible_global,
    is_negligible_on,
    point_value,
    refutation_to_gpoint,
)
from .eventual import Affine
from .exact_numbers import RATIONAL, format_rational, ring_of, valuation
from .generalized import (
    DEFAULT_BOUND,
    PointFamily,
    Refuted,
    monomial_point,
    scalar_equal,
    scalar_is_zero,
)
from .sequences import IntegerMap, MonomialIndicator, PhiReport, family_to_json, nth, validate_phi
from .spaces import Ball, FiniteDiscreteSpace, QpSpace, Space, in_ball
from .step_functions import constancy_exponent


class PreconditionViolated(ValueError):
    pass


class NotRepresentable(ValueError):
    pass


class InvalidPhi(ValueError):
    def __init__(self, report: PhiReport):
        super().__init__("invalid phi: " + ", ".join(report.failures()))
        self.report = report


def counterexample_family(p: int) -> MonomialIndicator:
    """``k -> indicator of Ball(p^k, 2k+1)``."""
    return MonomialIndicator(
        QpSpace(p), RATIONAL, 1, IntegerMap.affine(0, 0), (1,), IntegerMap.affine(1, 0), IntegerMap.affine(2, 1)
    )


def delta_embedding(p: int) -> MonomialIndicator:
    """``k -> p^k * indicator of Ball(0, k)``."""
    return MonomialIndicator(QpSpace(p), RATIONAL, 1, IntegerMap.affine(1, 0), (0,), None, IntegerMap.affine(1, 0))


def phi_delta(p: int, phi: IntegerMap) -> MonomialIndicator:
    """``k -> p^k * indicator of Ball(0, phi(k))``."""
    report = validate_phi(phi)
    if not report.ok:
        raise InvalidPhi(report)
    return MonomialIndicator(QpSpace(p), RATIONAL, 1, IntegerMap.affine(1, 0), (0,), None, phi)


def witness_x0(p: int) -> PointFamily:
    """The point family ``(p^k)_k``."""
    return monomial_point(QpSpace(p), (1,), Affine(1, 0))


def _fit_progression(space: QpSpace, x: tuple, xs: list) -> tuple:
    """Write ``xs[n-1] - x`` as ``c * p^(a*n + b)``; returns ``(c, a, b)``."""
    p = space.p
    diffs = [tuple(y - c for y, c in zip(point, x)) for point in xs]
    if len(diffs) < 2:
        raise NotRepresentable("need at least two points to recognise a progression")
    first, second = diffs[0], diffs[1]
    ratios = {b / a for a, b in zip(first, second) if a}
    if any((a == 0) != (b == 0) for a, b in zip(first, second)) or len(ratios) != 1:
        raise NotRepresentable("consecutive offsets are not proportional")
    ratio = ratios.pop()
    a = valuation(p, ratio)
    if a < 1 or ratio != Fraction(p) ** a:
        raise NotRepresentable("offsets do not shrink by a fixed power of p")
    b = min(valuation(p, c) for c in first if c) - a
    base = tuple(c / Fraction(p) ** (a + b) for c in first)
    for n, d in enumerate(diffs, start=1):
        if d != tuple(c * Fraction(p) ** (a * n + b) for c in base):
            raise NotRepresentable(f"point {n} breaks the progression")
    return base, a, b


def stripped_ball_family(s: Space, x, xs, theta, within: Optional[Ball] = None) -> MonomialIndicator:
    """``k -> theta`` on ``{y : d(x_k, y) < d(x_k, x) / 2}`` and zero elsewhere.

    ``xs`` lists the first points of a sequence tending to ``x`` whose offsets
    ``x_n - x`` form a progression ``c * p^(a*n + b)``; the family continues
    that progression.
    """
    if not theta:
        raise PreconditionViolated("theta must be nonzero")
    x = s.point(x)
    xs = [s.point(y) for y in xs]
    if len(set(xs)) != len(xs):
        raise PreconditionViolated("points must be distinct")
    if x in xs:
        raise PreconditionViolated("points must differ from the limit point")
    dists = [s.distance_exp(x, y) for y in xs]
    if any(d1 >= d2 for d1, d2 in zip(dists, dists[1:])):
        raise PreconditionViolated("distances to the limit point must strictly decrease")
    if within is not None and not all(in_ball(y, within) for y in [x, *xs]):
        raise PreconditionViolated("points must lie in the declared ball")
    if isinstance(s, FiniteDiscreteSpace):
        raise NotRepresentable("a finite discrete space has no convergent progression")
    base, a, b = _fit_progression(s, x, xs)
    # d(x_k, x) = p^-(a*k + b + v(base)); below half of it means one step in
    # radius, two steps for p = 2 where the half falls strictly between steps
    step = 2 if s.p == 2 else 1
    radius = IntegerMap.affine(a, b + min(valuation(s.p, c) for c in base if c) + step)
    if isinstance(theta, int):
        theta = Fraction(theta)
    ring = ring_of(theta)
    return MonomialIndicator(s, ring, theta, IntegerMap.affine(0, 0), base, IntegerMap.affine(a, b), radius, x)


# ---------------------------------------------------------------------------
# reports

def sample_rationals(p: int, count: int, rng: random.Random, lo: int = -5, hi: int = 15) -> list:
    """``count`` nonzero rationals ``u * p^v`` with ``v`` uniform in ``[lo, hi]`` and ``u`` a p-adic unit."""
    out = []
    while len(out) < count:
        num = rng.randint(1, p**3)
        den = rng.randint(1, p**2)
        if num % p == 0 or den % p == 0:
            continue
        sign = rng.choice((1, -1))
        out.append(sign * Fraction(num, den) * Fraction(p) ** rng.randint(lo, hi))
    return out


def counterexample_report(p: int, samples: int = 200, seed: int = 0, bound: int = DEFAULT_BOUND) -> dict:
    F = counterexample_family(p)
    space = F.space
    rng = random.Random(seed)
    fixed = [Fraction(0)] + [Fraction(p) ** i for i in range(1, 21)]
    points = (fixed + sample_rationals(p, max(0, samples - len(fixed)), rng))[:samples]
    records = []
    for alpha in points:
        value = point_value(F, alpha)
        records.append({"point": format_rational(alpha), "value": value.to_json(), "verdict": scalar_is_zero(value).to_json()})
    on_zp = is_negligible_on(F, Ball(space, (0,), 0), bound)
    overall = is_negligible_global(F, bound)
    witness = refutation_to_gpoint(F, overall) if isinstance(overall, Refuted) else None
    at_witness = eval_at_gpoint(F, witness) if witness is not None else None
    f1 = nth(F, 1)
    return {
        "parameters": {"p": p, "samples": samples, "seed": seed, "bound": bound},
        "family": family_to_json(F),
        "ball": {"strict": "|x - p^k| < |p^(2k)|", "clopen": "Ball(p^k, 2k+1)"},
        "point_values": records,
        "all_point_values_zero": all(r["verdict"]["verdict"] == "proved" for r in records),
        "negligible_on_unit_ball": on_zp.to_json(),
        "negligible": overall.to_json(),
        "witness": None if witness is None else witness.to_json(),
        "value_at_witness": None if at_witness is None else at_witness.to_json(),
        "value_at_witness_verdict": None if at_witness is None else scalar_is_zero(at_witness).to_json(),
        "first_term_at_zero": {
            "constancy_exponent": constancy_exponent(f1, space.point(0)),
            "N": scalar_is_zero(point_value(F, 0)).N,
        },
    }


@dataclass
class SeparationReport:
    parameters: dict
    standard: list = field(default_factory=list)
    generalized: list = field(default_factory=list)
    equality: dict = field(default_factory=dict)

    @property
    def standard_disagreements(self) -> int:
        return sum(r["verdict"]["verdict"] == "refuted" for r in self.standard)

    @property
    def generalized_separations(self) -> int:
        return sum(r["verdict"]["verdict"] == "refuted" for r in self.generalized)

    @property
    def separated(self) -> bool:
        return self.standard_disagreements == 0 and self.generalized_separations > 0

    def to_json(self) -> dict:
        return {
            "parameters": self.parameters,
            "standard_points": self.standard,
            "generalized_points": self.generalized,
            "equality": self.equality,
            "conclusion": {
                "standard_disagreements": self.standard_disagreements,
                "generalized_separations": self.generalized_separations,
                "separated": self.separated,
                "label": "separated" if self.separated else "not separated",
            },
        }


def separation_report(p: int, phi: IntegerMap, samples: int = 100, seed: int = 0, bound: int = DEFAULT_BOUND) -> SeparationReport:
    """Compare the delta family with its ``phi`` variant at standard and generalized points."""
    f = phi_delta(p, phi)
    delta = delta_embedding(p)
    rng = random.Random(seed)
    hi = max(15, 3 * len(phi.table))
    points = ([Fraction(0)] + sample_rationals(p, max(0, samples - 1), rng, -5, hi))[:samples]
    report = SeparationReport(
        {"p": p, "phi": phi.to_json(), "phi_text": phi.text(), "samples": samples, "seed": seed, "bound": bound}
    )
    for x in points:
        dv, fv = point_value(delta, x), point_value(f, x)
        report.standard.append(
            {"point": format_rational(x), "delta": dv.tail.text(), "phi_delta": fv.tail.text(), "verdict": scalar_equal(dv, fv).to_json()}
        )
    gpoints = [
        ("x0", "x_k = p^k", witness_x0(p)),
        ("outside_supports", "|x_k|_p > p^-min(k, phi(k))", monomial_point(QpSpace(p), (1,), Affine(1, -1))),
    ]
    for name, condition, X in gpoints:
        dv, fv = eval_at_gpoint(delta, X), eval_at_gpoint(f, X)
        report.generalized.append(
            {
                "name": name,
                "condition": condition,
                "point": X.to_json(),
                "delta": dv.to_json(),
                "phi_delta": fv.to_json(),
                "verdict": scalar_equal(dv, fv).to_json(),
            }
        )
    report.equality = gf_equal(f, delta, bound).to_json()
    return report
