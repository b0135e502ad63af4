import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from padic_egorov.constructions import counterexample_family, delta_embedding, phi_delta
from padic_egorov.exact_numbers import RATIONAL
from padic_egorov.sequences import (
    Constant,
    ExplicitThen,
    IndexZero,
    IntegerMap,
    MonomialIndicator,
    Neg,
    Prod,
    Sum,
    eventual_comparison,
    family_from_json,
    family_to_json,
    integer_map_eval,
    normalize_family,
    nth,
    term_value,
    validate_phi,
)
from padic_egorov.spaces import Ball, QpSpace
from padic_egorov.step_functions import NotSupported, char_fn
from padic_egorov.exact_numbers import IntModRing
from corpus import QP_SPACES, rand_family, rand_map, rand_rational
from oracles import family_value

F = Fraction


def ball_family(p, slope):
    """``k -> indicator of Ball(0, slope*k)``."""
    return MonomialIndicator(QpSpace(p), RATIONAL, 1, IntegerMap.affine(0, 0), (0,), None, IntegerMap.affine(slope, 0))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_nth_examples(p):
    s = QpSpace(p)
    for k in range(1, 12):
        pk = F(p) ** k
        assert nth(counterexample_family(p), k) == char_fn(Ball(s, (pk,), 2 * k + 1), 1)
        assert nth(delta_embedding(p), k) == char_fn(Ball(s, (F(0),), k), pk)
        D = delta_embedding(p)
        assert nth(Sum(D, Neg(D)), k).is_zero()


def test_index_zero_rejected():
    with pytest.raises(IndexZero):
        nth(delta_embedding(3), 0)
    with pytest.raises(IndexZero):
        IntegerMap.affine(1, 0)(0)


def test_integer_map_examples():
    assert integer_map_eval(IntegerMap.affine(1, 1), 7) == 8
    assert integer_map_eval(IntegerMap((5,), 2, 0), 1) == 5
    assert integer_map_eval(IntegerMap((5,), 2, 0), 2) == 4
    assert integer_map_eval(IntegerMap.affine(0, 3), 100) == 3
    assert IntegerMap.from_json(IntegerMap((1, 4), 3, -2).to_json()) == IntegerMap((1, 4), 3, -2)


def test_validate_phi_examples():
    assert validate_phi(IntegerMap.affine(1, 1)).ok
    assert validate_phi(IntegerMap.affine(2, -5)).ok
    r = validate_phi(IntegerMap.affine(1, 0))
    assert not r.ok and r.monotone and r.divergent and not r.infinitely_often_above_identity
    r = validate_phi(IntegerMap.affine(-1, 0))
    assert not r.monotone and not r.divergent
    assert not validate_phi(IntegerMap((9, 2), 1, 1)).monotone


def test_indicator_restrictions():
    with pytest.raises(NotSupported):
        MonomialIndicator(QpSpace(3), IntModRing(6), 1, IntegerMap(), (0,), None, IntegerMap())
    with pytest.raises(ValueError):
        MonomialIndicator(QpSpace(3), RATIONAL, 0, IntegerMap(), (0,), None, IntegerMap())


def test_normalize_examples():
    D = delta_embedding(5)
    assert normalize_family(Sum(D, Neg(D))).terms == ()
    prod = normalize_family(Prod(ball_family(3, 1), ball_family(3, 2)))
    assert len(prod.terms) == 1
    for k in range(1, 21):
        assert prod.nth(k) == nth(ball_family(3, 2), k)
    both = normalize_family(Sum(D, phi_delta(5, IntegerMap.affine(1, 1))))
    assert len(both.terms) == 2
    for k in range(1, 21):
        f = both.nth(k)
        pk = F(5) ** k
        assert f((F(0),)) == 2 * pk
        assert f((pk,)) == pk
        assert f((pk / 5,)) == 0


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(QP_SPACES[:3]))
def test_normal_form_matches_terms(seed, s):
    rng = random.Random(seed)
    Fam = rand_family(rng, s, RATIONAL)
    normal = normalize_family(Fam)
    # every early index, a stride through 200, and the switch to the closed form
    ks = set(range(1, 31)) | set(range(40, 201, 10)) | {normal.start - 1, normal.start, normal.start + 1}
    for k in sorted(k for k in ks if k >= 1):
        assert normal.nth(k) == nth(Fam, k)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(QP_SPACES))
def test_term_value_matches_oracle(seed, s):
    rng = random.Random(seed)
    Fam = rand_family(rng, s, RATIONAL)
    normal = normalize_family(Fam)
    for _ in range(20):
        k = rng.randint(1, 60)
        x = tuple(rand_rational(rng, s.p) for _ in range(s.n))
        expected = family_value(Fam, k, x)
        assert term_value(Fam, k, x) == expected
        assert nth(Fam, k)(x) == expected
        assert normal.value_at(k, x) == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9))
def test_eventual_comparison_brute_force(seed):
    rng = random.Random(seed)
    m1 = rand_map(rng, (-2, -1, 0, 1, 2), (-5, 0, 3, 8), 4)
    m2 = rand_map(rng, (-2, -1, 0, 1, 2), (-5, 0, 3, 8), 4)
    value, start = eventual_comparison(m1, m2)
    truth = [m1(k) > m2(k) for k in range(1, 201)]
    assert all(t == value for t in truth[start - 1 :])
    if start > 1:
        assert truth[start - 2] != value


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**9), st.sampled_from(QP_SPACES))
def test_family_json_round_trip(seed, s):
    rng = random.Random(seed)
    Fam = rand_family(rng, s, RATIONAL)
    text = json.dumps(family_to_json(Fam), sort_keys=True)
    back = family_from_json(json.loads(text))
    assert json.dumps(family_to_json(back), sort_keys=True) == text
    for k in (1, 2, 5, 17):
        assert nth(back, k) == nth(Fam, k)


def test_counterexample_json_shape():
    obj = {
        "kind": "monomial_indicator",
        "coeff": {"unit": "1", "exp": {"tail": [0, 0]}},
        "center": {"base": "1", "exp": {"tail": [1, 0]}},
        "radius_exp": {"tail": [2, 1]},
    }
    Fam = family_from_json(obj, QpSpace(3))
    for k in range(1, 6):
        assert nth(Fam, k) == nth(counterexample_family(3), k)


def test_prefix_overrides_tail():
    s = QpSpace(2)
    first = char_fn(Ball(s, (F(1),), 1), 7)
    Fam = ExplicitThen((first,), Constant(char_fn(Ball(s, (F(0),), 0), 1)))
    assert nth(Fam, 1) == first
    assert nth(Fam, 2) == char_fn(Ball(s, (F(0),), 0), 1)
    assert normalize_family(Fam).nth(1) == first
