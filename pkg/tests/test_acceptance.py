"""End-to-end acceptance checks, one test per criterion.

Every verdict produced while checking criteria 1-6 is recorded and
re-verified in criterion 7 against the reference evaluators in ``oracles``,
which share no arithmetic with the package.
"""

import functools
import json
import random
import time
from fractions import Fraction

import conftest
from corpus import (
    INTMOD6,
    QP_SPACES,
    discrete_space,
    rand_discrete_family,
    rand_family,
    rand_negligible,
    rand_point_family,
    rand_rational,
    rand_step,
)
from oracles import family_value, member, raw_value, val, vanishes_on
from padic_egorov import (
    GAUSSIAN,
    RATIONAL,
    Ball,
    IntegerMap,
    Neg,
    Proved,
    Refuted,
    Sum,
    Unknown,
    add,
    counterexample_family,
    delta_embedding,
    eval_at_gpoint,
    evaluate,
    is_compactly_supported,
    is_negligible_global,
    is_negligible_on,
    mul,
    nth,
    phi_delta,
    point_value,
    refutation_to_gpoint,
    scalar_equal,
    scalar_is_zero,
    separation_report,
    split_ball,
    witness_x0,
)
from padic_egorov.exact_numbers import IntModRing
from padic_egorov.spaces import QpSpace
from padic_egorov.step_functions import StepFunction, refinement_atoms

SPAN = 200
COUNT = 50

# (description, check) pairs; check() returns a list of failure strings
OBLIGATIONS = []


def _scalar_obligation(label, verdict, term):
    """Recheck a scalar verdict by recomputing ``term(k)`` directly."""

    def check():
        if isinstance(verdict, Proved):
            return [f"{label}: entry {k} nonzero" for k in range(verdict.N, verdict.N + SPAN + 1) if term(k)]
        if isinstance(verdict, Refuted):
            return [f"{label}: entry {k} zero" for k in verdict.schedule.first(COUNT) if not term(k)]
        return [f"{label}: undecided"]

    OBLIGATIONS.append((label, check))


def _negligibility_obligation(label, F, verdict):
    def check():
        if isinstance(verdict, Proved):
            K = verdict.ball
            return [
                f"{label}: term {k} nonzero on {K}"
                for k in range(verdict.N, verdict.N + SPAN + 1)
                if not _vanishes(F, k, K)
            ]
        if isinstance(verdict, Refuted):
            failures = []
            for k in verdict.schedule.first(COUNT):
                x = verdict.schedule.points.at(k)
                K = verdict.ball
                if K is not None and not member(F.space, x, K.center, K.gamma):
                    failures.append(f"{label}: witness {k} outside {K}")
                elif not family_value(F, k, x):
                    failures.append(f"{label}: term {k} vanishes at its witness")
            return failures
        return [f"{label}: undecided"]

    OBLIGATIONS.append((label, check))


def _vanishes(F, k, K):
    if isinstance(F.space, QpSpace):
        return vanishes_on(F, k, K.center, K.gamma)
    points = F.space.points if K.gamma <= 0 else (K.center,)
    return not any(family_value(F, k, x) for x in points)


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")


# ---------------------------------------------------------------------------
# criterion computations, cached so criterion 7 sees every verdict once


@functools.lru_cache(maxsize=None)
def criterion_1():
    failures, runtimes, Ns = [], {}, {}
    for p in (2, 3, 5):
        start = time.perf_counter()
        F = counterexample_family(p)
        rng = random.Random(p)
        fixed = [Fraction(0)] + [Fraction(p) ** i for i in range(1, 21)]
        samples = fixed + [rand_rational(rng, p, -6, 25) for _ in range(200 - len(fixed))]
        verdicts = []
        for alpha in samples:
            v = scalar_is_zero(point_value(F, (alpha,)))
            verdicts.append((alpha, v))
            if not isinstance(v, Proved) or v.N < 1:
                failures.append(f"p={p}: point value at {alpha} gave {v}")
        on_zp = is_negligible_on(F, Ball(F.space, (0,), 0))
        if not isinstance(on_zp, Refuted):
            failures.append(f"p={p}: not refuted on Z_p")
        else:
            for k in range(1, 51):
                if k not in on_zp.schedule.first(50) or on_zp.schedule.points.at(k) != (Fraction(p) ** k,):
                    failures.append(f"p={p}: schedule point {k} is not p^k")
                if nth(F, k)((Fraction(p) ** k,)) != 1:
                    failures.append(f"p={p}: term {k} is not 1 at p^k")
        runtimes[p] = time.perf_counter() - start
        if runtimes[p] >= 1:
            failures.append(f"p={p}: took {runtimes[p]:.2f}s")
        Ns[p] = max(v.N for _, v in verdicts if isinstance(v, Proved))
        for alpha, v in verdicts:
            _scalar_obligation(f"c1 p={p} alpha={alpha}", v, lambda k, F=F, a=alpha: family_value(F, k, (a,)))
        _negligibility_obligation(f"c1 p={p} on Z_p", F, on_zp)
    return failures, runtimes, Ns


@functools.lru_cache(maxsize=None)
def criterion_2():
    failures = []
    checked = 0
    for p in (2, 3, 5):
        F = delta_embedding(p)
        s = point_value(F, (Fraction(0),))
        v0 = scalar_is_zero(s)
        tail = s.to_json()["tail"]
        if tail.get("kind") != "monomial" or tail.get("unit") != "1" or tail.get("exp") != {"tail": [1, 0]}:
            failures.append(f"p={p}: value at 0 is {tail}")
        if not isinstance(v0, Refuted):
            failures.append(f"p={p}: value at 0 not refuted-zero")
        _scalar_obligation(f"c2 p={p} x=0", v0, lambda k, F=F: family_value(F, k, (Fraction(0),)))
        rng = random.Random(100 + p)
        for _ in range(30):
            x = Fraction(0)
            while x == 0:
                x = rand_rational(rng, p, -6, 12)
            m = val(p, x)
            v = scalar_is_zero(point_value(F, (x,)))
            checked += 1
            if not isinstance(v, Proved) or v.N != max(1, m + 1):
                failures.append(f"p={p}: x={x} (m={m}) gave {v}")
            _scalar_obligation(f"c2 p={p} x={x}", v, lambda k, F=F, x=x: family_value(F, k, (x,)))
    return failures, checked


@functools.lru_cache(maxsize=None)
def criterion_3():
    p = 5
    phi = IntegerMap.affine(1, 1)
    start = time.perf_counter()
    rep = separation_report(p, phi, samples=100, seed=42)
    f, delta = phi_delta(p, phi), delta_embedding(p)
    x0 = witness_x0(p)
    at_f, at_delta = eval_at_gpoint(f, x0), eval_at_gpoint(delta, x0)
    diff = Sum(f, Neg(delta))
    eq = is_negligible_global(diff)
    runtime = time.perf_counter() - start
    failures = []
    if rep.standard_disagreements or len(rep.standard) != 100:
        failures.append(f"{rep.standard_disagreements} standard disagreements over {len(rep.standard)} points")
    if not rep.separated:
        failures.append("report not separated")
    if at_f.to_json()["tail"]["kind"] != "zero":
        failures.append(f"phi-delta at x0 is {at_f.to_json()}")
    tail = at_delta.to_json()["tail"]
    if tail.get("kind") != "monomial" or tail.get("unit") != "1" or tail.get("exp") != {"tail": [1, 0]}:
        failures.append(f"delta at x0 is {tail}")
    if rep.equality.get("verdict") != "refuted" or not isinstance(eq, Refuted):
        failures.append(f"equality verdict {rep.equality.get('verdict')}")
    if runtime >= 1:
        failures.append(f"took {runtime:.2f}s")
    for record in rep.standard:
        x = (Fraction(record["point"]),)
        v = scalar_equal(point_value(f, x), point_value(delta, x))
        _scalar_obligation(
            f"c3 x={record['point']}", v, lambda k, x=x: family_value(f, k, x) - family_value(delta, k, x)
        )
    for name, s in (("phi-delta", at_f), ("delta", at_delta)):
        fam = f if name == "phi-delta" else delta
        _scalar_obligation(f"c3 {name} at x0", scalar_is_zero(s), lambda k, F=fam: family_value(F, k, x0.at(k)))
    _negligibility_obligation("c3 phi-delta minus delta", diff, eq)
    return failures, runtime, rep.standard_disagreements


@functools.lru_cache(maxsize=None)
def criterion_4():
    rng = random.Random(4)
    refuted, proved, unknown = [], [], 0
    attempts = 0
    while (len(refuted) < 100 or len(proved) < 100) and attempts < 2000:
        attempts += 1
        space = rng.choice(QP_SPACES)
        ring = rng.choice((RATIONAL, GAUSSIAN))
        F = rand_negligible(rng, space, ring) if attempts % 2 else rand_family(rng, space, ring)
        v = is_negligible_global(F)
        if isinstance(v, Refuted) and len(refuted) < 100:
            refuted.append((F, v))
        elif isinstance(v, Proved) and len(proved) < 100:
            proved.append((F, v))
        elif isinstance(v, Unknown):
            unknown += 1
    failures = []
    if len(refuted) < 100 or len(proved) < 100:
        failures.append(f"corpus too small: {len(refuted)} refuted, {len(proved)} proved")
    for i, (F, v) in enumerate(refuted):
        _negligibility_obligation(f"c4 refuted #{i}", F, v)
        X = refutation_to_gpoint(F, v)
        if not isinstance(is_compactly_supported(X), Proved):
            failures.append(f"refuted #{i}: extracted point family not compactly supported")
            continue
        s = scalar_is_zero(eval_at_gpoint(F, X))
        if not isinstance(s, Refuted):
            failures.append(f"refuted #{i}: value at extracted point is {s}")
        _scalar_obligation(f"c4 refuted #{i} at X", s, lambda k, F=F, X=X: family_value(F, k, X.at(k)))
    for i, (F, v) in enumerate(proved):
        _negligibility_obligation(f"c4 proved #{i}", F, v)
        for j in range(20):
            X = rand_point_family(rng, F.space)
            s = scalar_is_zero(eval_at_gpoint(F, X))
            if not isinstance(s, Proved):
                failures.append(f"proved #{i}: point family {j} gives {s}")
            _scalar_obligation(f"c4 proved #{i} point {j}", s, lambda k, F=F, X=X: family_value(F, k, X.at(k)))
    return failures, len(refuted), len(proved), unknown


@functools.lru_cache(maxsize=None)
def criterion_5():
    rng = random.Random(5)
    failures = []
    counts = {"negligible": 0, "not negligible": 0}
    for i in range(1000):
        space = discrete_space(rng.randint(1, 5))
        F = rand_discrete_family(rng, space, INTMOD6)
        v = is_negligible_global(F)
        values = {x: scalar_is_zero(point_value(F, x)) for x in space.points}
        all_zero = all(isinstance(w, Proved) for w in values.values())
        if isinstance(v, Unknown) or isinstance(v, Proved) != all_zero:
            failures.append(f"family {i}: negligible {v.to_json()['verdict']}, point values all zero {all_zero}")
        counts["negligible" if isinstance(v, Proved) else "not negligible"] += 1
        _negligibility_obligation(f"c5 #{i}", F, v)
        for x, w in values.items():
            _scalar_obligation(f"c5 #{i} x={x}", w, lambda k, F=F, x=x: family_value(F, k, x))
    if not all(counts.values()):
        failures.append(f"one direction never exercised: {counts}")
    return failures, counts


def _random_points(rng, space, count):
    return [tuple(rand_rational(rng, space.p, -7, 9) for _ in range(space.n)) for _ in range(count)]


@functools.lru_cache(maxsize=None)
def criterion_6():
    rng = random.Random(6)
    failures = []
    pairs = 0
    for i in range(500):
        space = QpSpace(rng.choice((2, 3, 5)))
        ring = rng.choice((RATIONAL, GAUSSIAN, IntModRing(6)))
        f, fp = rand_step(rng, space, ring)
        g, gp = rand_step(rng, space, ring)
        pairs += 1
        total, product = add(f, g), mul(f, g)
        probes = [b.center for b in refinement_atoms(f, g)] + _random_points(rng, space, 50)
        for x in probes:
            a, b = raw_value(space, ring, fp, x), raw_value(space, ring, gp, x)
            if evaluate(total, x) != a + b or evaluate(product, x) != a * b:
                failures.append(f"pair {i}: mismatch at {x}")
                break
        # a pointwise-equal rebuild from shuffled, split pieces must serialize identically
        pieces = list(total.pieces)
        rng.shuffle(pieces)
        rebuilt = []
        for ball, value in pieces:
            if rng.random() < 0.5:
                rebuilt.extend((child, value) for child in split_ball(ball))
            else:
                rebuilt.append((ball, value))
        twin = StepFunction.from_pieces(space, ring, rebuilt)
        if json.dumps(twin.to_json()) != json.dumps(total.to_json()):
            failures.append(f"pair {i}: rebuilt sum serializes differently")
        if json.dumps(add(g, f).to_json()) != json.dumps(total.to_json()):
            failures.append(f"pair {i}: add is not byte-symmetric")
        if json.dumps(mul(g, f).to_json()) != json.dumps(product.to_json()):
            failures.append(f"pair {i}: mul is not byte-symmetric")
    return failures, pairs


# ---------------------------------------------------------------------------
# tests


def test_criterion_1_counterexample(capsys):
    failures, runtimes, Ns = criterion_1()
    detail = ", ".join(f"p={p} {runtimes[p]:.2f}s max N={Ns[p]}" for p in runtimes)
    report(capsys, 1, not failures, detail if not failures else failures[:3])
    assert not failures


def test_criterion_2_delta_point_values(capsys):
    failures, checked = criterion_2()
    report(capsys, 2, not failures, f"x=0 refuted for p=2,3,5; {checked} nonzero points with N=max(1,m+1)" if not failures else failures[:3])
    assert not failures


def test_criterion_3_separation(capsys):
    failures, runtime, disagreements = criterion_3()
    report(capsys, 3, not failures, f"{disagreements} standard disagreements, separated at x0, {runtime:.2f}s" if not failures else failures[:3])
    assert not failures


def test_criterion_4_round_trip(capsys):
    failures, nr, npv, unknown = criterion_4()
    report(capsys, 4, not failures, f"{nr} refuted round trips, {npv} proved x 20 points, {unknown} undecided skipped" if not failures else failures[:3])
    assert not failures


def test_criterion_5_discrete(capsys):
    failures, counts = criterion_5()
    report(capsys, 5, not failures, f"1000 families, {counts}" if not failures else failures[:3])
    assert not failures


def test_criterion_6_step_calculus(capsys):
    failures, pairs = criterion_6()
    report(capsys, 6, not failures, f"{pairs} pairs" if not failures else failures[:3])
    assert not failures


def test_criterion_7_soundness_sweep(capsys):
    for compute in (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6):
        compute()
    failures = []
    for _, check in OBLIGATIONS:
        failures.extend(check())
    elapsed = time.perf_counter() - conftest.SESSION_START
    if elapsed >= 60:
        failures.append(f"suite took {elapsed:.1f}s")
    report(
        capsys, 7, not failures,
        f"{len(OBLIGATIONS)} verdicts rechecked, suite so far {elapsed:.1f}s" if not failures else failures[:3],
    )
    assert not failures
