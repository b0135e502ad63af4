"""Exact scalars: rationals, p-adic valuation and digit truncation, coefficient rings.

Norms are never materialised as floats. A p-adic absolute value is carried
as its valuation exponent ``v`` (``|q|_p = p**-v``), and ``INF`` stands for
the valuation of zero.
"""

from __future__ import annotations

import functools
import math
import re
from fractions import Fraction
from typing import Union

INF = math.inf

_PRIME_LIMIT = 2**31


class NonPrime(ValueError):
    pass


class MixedRings(TypeError):
    pass


def _miller_rabin(n: int) -> bool:
    if n < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13):
        if n % small == 0:
            return n == small
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # bases 2, 3, 5, 7 are deterministic below 3_215_031_751
    for a in (2, 3, 5, 7):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def require_prime(p: int) -> int:
    """Return ``p`` unchanged if it is a prime below 2**31, else raise NonPrime."""
    if isinstance(p, bool) or not isinstance(p, int):
        raise NonPrime(f"prime must be an integer, got {p!r}")
    if p >= _PRIME_LIMIT:
        raise NonPrime(f"p={p} exceeds the supported range p < 2**31")
    if not _miller_rabin(p):
        raise NonPrime(f"{p} is not prime")
    return p


def int_valuation(p: int, n: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation(p: int, q) -> Union[int, float]:
    """p-adic valuation of a rational; ``INF`` for zero."""
    q = Fraction(q)
    if q == 0:
        return INF
    return int_valuation(p, q.numerator) - int_valuation(p, q.denominator)


def unit_part(p: int, q) -> Fraction:
    """``q / p**valuation(q)``; zero maps to zero."""
    q = Fraction(q)
    if q == 0:
        return q
    return q / Fraction(p) ** valuation(p, q)


def residue_mod(q, modulus: int) -> int:
    """Image of a rational in Z/modulus; the denominator must be invertible."""
    q = Fraction(q)
    try:
        inv = pow(q.denominator, -1, modulus)
    except ValueError:
        raise ZeroDivisionError(
            f"denominator {q.denominator} is not invertible modulo {modulus}"
        ) from None
    return q.numerator * inv % modulus


def digit_truncate(p: int, q, gamma: int) -> Fraction:
    """Sum of the p-adic digits of ``q`` at exponents below ``gamma``.

    The result ``r`` satisfies ``valuation(p, q - r) >= gamma`` and is the
    canonical representative of the class of ``q`` modulo ``p**gamma Z_p``.
    """
    q = Fraction(q)
    v = valuation(p, q)
    if v >= gamma:
        return Fraction(0)
    unit = q / Fraction(p) ** v
    return Fraction(p) ** v * residue_mod(unit, p ** (gamma - v))


def digits(p: int, q, start: int, stop: int) -> list[int]:
    """p-adic digits of ``q`` at exponents ``start .. stop-1``."""
    r = digit_truncate(p, q, stop) - digit_truncate(p, q, start)
    out = []
    for j in range(start, stop):
        d = int(r / Fraction(p) ** j) % p if r else 0
        out.append(d)
        r -= d * Fraction(p) ** j
    return out


# ---------------------------------------------------------------------------
# ring elements

class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def _check(self, other):
        if not isinstance(other, GaussianRational):
            raise MixedRings(f"cannot combine GaussianRational with {type(other).__name__}")

    def __add__(self, other):
        self._check(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        self._check(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __mul__(self, other):
        self._check(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        self._check(other)
        return other - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash(("gaussian", self.re, self.im))

    def __repr__(self):
        return f"GaussianRational({format_gaussian(self)})"


class IntMod:
    __slots__ = ("residue", "modulus")

    def __init__(self, residue: int, modulus: int):
        if modulus < 2:
            raise ValueError("modulus must be at least 2")
        self.modulus = modulus
        self.residue = residue % modulus

    def _check(self, other):
        if not isinstance(other, IntMod) or other.modulus != self.modulus:
            raise MixedRings(f"cannot combine {self!r} with {other!r}")

    def __add__(self, other):
        self._check(other)
        return IntMod(self.residue + other.residue, self.modulus)

    def __sub__(self, other):
        self._check(other)
        return IntMod(self.residue - other.residue, self.modulus)

    def __mul__(self, other):
        self._check(other)
        return IntMod(self.residue * other.residue, self.modulus)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        self._check(other)
        return other - self

    def __neg__(self):
        return IntMod(-self.residue, self.modulus)

    def __bool__(self):
        return self.residue != 0

    def __eq__(self, other):
        if not isinstance(other, IntMod):
            return NotImplemented
        return self.modulus == other.modulus and self.residue == other.residue

    def __hash__(self):
        return hash(("intmod", self.residue, self.modulus))

    def __repr__(self):
        return f"IntMod({self.residue}, {self.modulus})"


RingElem = Union[Fraction, GaussianRational, IntMod]


# ---------------------------------------------------------------------------
# rings

class Ring:
    """A commutative coefficient ring with decidable equality."""

    kind = ""

    # elements are immutable, so the identities can be shared
    @functools.cached_property
    def zero(self) -> RingElem:
        return self.scalar(0)

    @functools.cached_property
    def one(self) -> RingElem:
        return self.scalar(1)

    def scalar(self, q) -> RingElem:
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError

    def parse(self, text: str) -> RingElem:
        raise NotImplementedError

    def format(self, x: RingElem) -> str:
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"kind": self.kind}

    def __eq__(self, other):
        return self is other or (isinstance(other, Ring) and self.to_json() == other.to_json())

    def __hash__(self):
        return hash(tuple(sorted(self.to_json().items())))

    def __repr__(self):
        return f"{type(self).__name__}()"


class RationalRing(Ring):
    kind = "rational"

    def scalar(self, q):
        return Fraction(q)

    def contains(self, x):
        return isinstance(x, Fraction)

    def parse(self, text):
        return parse_rational(text)

    def format(self, x):
        return format_rational(x)


class GaussianRing(Ring):
    kind = "gaussian"

    def scalar(self, q):
        if isinstance(q, GaussianRational):
            return q
        return GaussianRational(q, 0)

    def contains(self, x):
        return isinstance(x, GaussianRational)

    def parse(self, text):
        return parse_gaussian(text)

    def format(self, x):
        return format_gaussian(x)


class IntModRing(Ring):
    kind = "intmod"

    def __init__(self, modulus: int):
        if modulus < 2:
            raise ValueError("modulus must be at least 2")
        self.modulus = modulus

    def scalar(self, q):
        return IntMod(residue_mod(q, self.modulus), self.modulus)

    def contains(self, x):
        return isinstance(x, IntMod) and x.modulus == self.modulus

    def parse(self, text):
        return self.scalar(parse_rational(text))

    def format(self, x):
        return str(x.residue)

    def to_json(self):
        return {"kind": self.kind, "modulus": self.modulus}

    def __repr__(self):
        return f"IntModRing({self.modulus})"


RATIONAL = RationalRing()
GAUSSIAN = GaussianRing()


def ring_from_json(obj: dict) -> Ring:
    kind = obj.get("kind")
    if kind == "rational":
        return RATIONAL
    if kind == "gaussian":
        return GAUSSIAN
    if kind == "intmod":
        return IntModRing(int(obj["modulus"]))
    raise ValueError(f"unknown ring kind {kind!r}")


def ring_of(x: RingElem) -> Ring:
    if isinstance(x, Fraction):
        return RATIONAL
    if isinstance(x, GaussianRational):
        return GAUSSIAN
    if isinstance(x, IntMod):
        return IntModRing(x.modulus)
    raise TypeError(f"not a ring element: {x!r}")


def ring_arith(op: str, a: RingElem, b: RingElem | None = None) -> RingElem:
    """Apply ``add``/``sub``/``mul``/``neg`` after checking both operands share a ring."""
    if op == "neg":
        return -a
    if ring_of(a) != ring_of(b):
        raise MixedRings(f"{ring_of(a)!r} vs {ring_of(b)!r}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown ring operation {op!r}")


# ---------------------------------------------------------------------------
# text formats

_RATIONAL_RE = re.compile(r"^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$")
_POWER_RE = re.compile(r"^\s*(-)?\s*(?:(\d+(?:/\d+)?)\s*\*\s*)?(p|\d+)\s*\^\s*\(?\s*(-?\d+)\s*\)?\s*$")
_GAUSS_RE = re.compile(r"^\s*([+-]?\d+(?:/\d+)?)\s*([+-])\s*(\d+(?:/\d+)?)\s*\*?\s*i\s*$")


def parse_rational(text: str, p: int | None = None) -> Fraction:
    """Parse ``"a/b"``, ``"a"`` or the power shorthand ``"[-][c*]p^k"``.

    The literal ``p`` in the shorthand needs the prime passed as ``p``; an
    explicit integer base such as ``"5^3"`` is accepted without it.
    """
    m = _RATIONAL_RE.match(text)
    if m:
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(m.group(1)), den)
    m = _POWER_RE.match(text)
    if m:
        sign, coeff, base, exp = m.groups()
        if base == "p":
            if p is None:
                raise ValueError(f"{text!r} uses 'p' but no prime was given")
            base_value = p
        else:
            base_value = int(base)
        value = Fraction(coeff or 1) * Fraction(base_value) ** int(exp)
        return -value if sign else value
    raise ValueError(f"cannot parse rational {text!r}")


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_gaussian(text: str) -> GaussianRational:
    m = _GAUSS_RE.match(text)
    if m:
        re_part, sign, im_part = m.groups()
        im = parse_rational(im_part)
        return GaussianRational(parse_rational(re_part.lstrip("+")), -im if sign == "-" else im)
    return GaussianRational(parse_rational(text), 0)


def format_gaussian(z: GaussianRational) -> str:
    sign = "-" if z.im < 0 else "+"
    return f"{format_rational(z.re)}{sign}{format_rational(abs(z.im))}i"
