"""Exactly specified irrational numbers with rigorous fixed-point enclosures.

Rotation numbers are never stored as floats.  Each number knows how to
produce integers ``lo <= value * 2**prec <= hi`` for any precision, which is
all the interval arithmetic in :mod:`specband.dynsys` needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigError, PrecisionError

#: precision ladder for exact sign decisions; the first rung is the working precision
PRECISIONS = (128, 256, 512, 1024, 2048)


class Irrational:
    """Interface: ``bounds(prec)`` and a human-readable ``label``."""

    label: str

    def bounds(self, prec: int) -> tuple[int, int]:
        raise NotImplementedError

    def __float__(self) -> float:
        lo, hi = self.bounds(80)
        return (lo + hi) / 2.0 ** 81

    def to_config(self):
        raise NotImplementedError


@dataclass(frozen=True)
class QuadraticIrrational(Irrational):
    """The number ``(p + s*sqrt(d)) / q`` with ``s = +-1``, ``q > 0`` and ``d`` not a square."""

    p: int
    s: int
    d: int
    q: int
    label: str = field(default="", compare=False)
    source: object = field(default=None, compare=False)

    def __post_init__(self):
        if self.q <= 0 or self.s not in (1, -1) or self.d <= 0:
            raise ValueError("need q > 0, s = +-1, d > 0")
        r = math.isqrt(self.d)
        if r * r == self.d:
            raise ValueError(f"sqrt({self.d}) is rational")

    def bounds(self, prec):
        r = math.isqrt(self.d << (2 * prec))  # r <= sqrt(d) 2^prec < r + 1
        base = self.p << prec
        if self.s > 0:
            num_lo, num_hi = base + r, base + r + 1
        else:
            num_lo, num_hi = base - r - 1, base - r
        return num_lo // self.q, -((-num_hi) // self.q)

    def to_config(self):
        if self.source is not None:
            return self.source
        return {"surd": [self.p, self.s, self.d, self.q]}


def _arctan_inv(x: int, scale: int) -> tuple[int, int]:
    """Truncated series for ``scale * arctan(1/x)``; returns (value, term count)."""
    total = 0
    power = scale // x
    x2 = x * x
    k = 0
    while power:
        term = power // (2 * k + 1)
        total += -term if k % 2 else term
        power //= x2
        k += 1
    return total, k


@dataclass(frozen=True)
class PiMinusThree(Irrational):
    """pi - 3 via Machin's formula in integer arithmetic."""

    label: str = "pim3"

    def bounds(self, prec):
        guard = 32
        scale = 1 << (prec + guard)
        a, na = _arctan_inv(5, scale)
        b, nb = _arctan_inv(239, scale)
        val = 16 * a - 4 * b
        err = 16 * (2 * na + 2) + 4 * (2 * nb + 2)
        lo = ((val - err) >> guard) - (3 << prec)
        hi = ((val + err) >> guard) + 1 - (3 << prec)
        return lo, hi

    def to_config(self):
        return "pim3"


def _mat_mul(m, n):
    return ((m[0][0] * n[0][0] + m[0][1] * n[1][0], m[0][0] * n[0][1] + m[0][1] * n[1][1]),
            (m[1][0] * n[0][0] + m[1][1] * n[1][0], m[1][0] * n[0][1] + m[1][1] * n[1][1]))


def _cf_matrix(terms):
    m = ((1, 0), (0, 1))
    for a in terms:
        m = _mat_mul(m, ((a, 1), (1, 0)))
    return m


def from_continued_fraction(prefix, period, label=None) -> QuadraticIrrational:
    """Eventually periodic continued fraction ``[a0; a1, ..., ak, (b1, ..., bm)*]``.

    A nonempty repeating block is required: finite expansions are rational
    and are rejected.
    """
    prefix = [int(a) for a in prefix]
    period = [int(b) for b in period]
    problems = []
    if not prefix:
        problems.append("continued fraction needs at least the integer part a0")
    if not period:
        problems.append("continued fraction needs a nonempty repeating block (finite expansions are rational)")
    if any(a < 1 for a in prefix[1:]) or any(b < 1 for b in period):
        problems.append("partial quotients after a0 must be positive integers")
    if problems:
        raise ConfigError(problems)
    (P, P1), (Q, Q1) = _cf_matrix(period)
    # tail x = [b1; ..., bm, x] solves Q x^2 + (Q1 - P) x - P1 = 0
    u, D, v = P - Q1, (P - Q1) ** 2 + 4 * Q * P1, 2 * Q
    (R, R1), (S, S1) = _cf_matrix(prefix)
    a = R * u + R1 * v
    b = S * u + S1 * v
    p = a * b - R * S * D
    c = R * b - a * S
    q = b * b - S * S * D
    if q < 0:
        p, c, q = -p, -c, -q
    g = math.gcd(math.gcd(p, c), q)
    # c*sqrt(D) = sign(c) * sqrt(c^2 D); fold any square factor of g into it
    p, c, q = p // g, c // g, q // g
    s = 1 if c > 0 else -1
    source = {"cf": prefix, "period": period}
    return QuadraticIrrational(p, s, c * c * D, q, label=label or _cf_label(prefix, period), source=source)


def _cf_label(prefix, period):
    return "[" + ",".join(map(str, prefix)) + ";(" + ",".join(map(str, period)) + ")]"


NAMED = {
    "golden": lambda: QuadraticIrrational(-1, 1, 5, 2, label="golden", source="golden"),
    "sqrt2m1": lambda: QuadraticIrrational(-1, 1, 2, 1, label="sqrt2m1", source="sqrt2m1"),
    "pim3": PiMinusThree,
}


def parse_irrational(spec) -> Irrational:
    """Build an irrational from a named constant or ``{"cf": [...], "period": [...]}``.

    Decimal numbers are refused on purpose: a float is rational and carries
    no usable precision beyond 53 bits.
    """
    if isinstance(spec, Irrational):
        return spec
    if isinstance(spec, str):
        if spec not in NAMED:
            raise ConfigError(f"unknown irrational constant {spec!r}; known: {sorted(NAMED)}")
        return NAMED[spec]()
    if isinstance(spec, dict) and set(spec) <= {"cf", "period"} and "cf" in spec:
        return from_continued_fraction(spec["cf"], spec.get("period", []))
    if isinstance(spec, (int, float, Fraction)):
        raise ConfigError(
            f"irrational parameter given as the number {spec!r}: α must be irrational, "
            "supply a named constant (golden, sqrt2m1, pim3) or continued-fraction coefficients")
    raise ConfigError(f"cannot interpret {spec!r} as an irrational number")


def sign_affine(a: Fraction, b: int, alpha: Irrational) -> int:
    """Exact sign of ``a + b*alpha`` for rational ``a``, integer ``b``.

    For ``b != 0`` the value is irrational, hence nonzero, and refining the
    enclosure eventually separates it from zero.
    """
    a = Fraction(a)
    if b == 0:
        return (a > 0) - (a < 0)
    num, den = a.numerator, a.denominator
    for prec in PRECISIONS:
        lo, hi = alpha.bounds(prec)
        k = b * den
        blo, bhi = (k * lo, k * hi) if k > 0 else (k * hi, k * lo)
        base = num << prec
        if base + blo > 0:
            return 1
        if base + bhi < 0:
            return -1
    raise PrecisionError(
        f"cannot decide sign of {a} + {b}*{alpha.label} at {PRECISIONS[-1]} bits")
