"""Finitely described points of subshifts and torus rotations.

A point is an immutable value.  Subshift points carry a generating rule and
an accumulated shift offset, so ``shift`` never has to materialise anything;
torus points carry an angle vector and a rotation vector.

Words are strings of digit characters, one character per symbol, which keeps
factor sets cheap (``str`` slicing and hashing) and makes them serialisable
as-is.  Alphabets therefore have at most ten symbols.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import IncompatibleSystemsError, PrecisionError, RangeError
from .irrational import Irrational, parse_irrational, sign_affine

MAX_INDEX = 10**6
DIGITS = "0123456789"
#: working precision (fractional bits) of the Sturmian fast path
WORK_BITS = 128


@dataclass(frozen=True)
class Alphabet:
    size: int

    def __post_init__(self):
        if not 1 <= self.size <= 10:
            raise ValueError("alphabet size must be between 1 and 10")

    @property
    def symbols(self) -> str:
        return DIGITS[: self.size]


BINARY = Alphabet(2)


# -- generating rules -------------------------------------------------------

@dataclass(frozen=True)
class Periodic:
    word: str

    def __post_init__(self):
        if not self.word:
            raise ValueError("periodic word must be nonempty")

    @property
    def period(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class SturmianCoding:
    """Coding ``x(n) = 1`` iff ``frac(omega + n*alpha)`` lies in ``(1 - alpha, 1]``.

    ``omega`` is kept as ``omega_rational + omega_alpha * alpha`` so that
    orbit points of a rational phase stay exact; rounding would corrupt the
    coding exactly at the discontinuities.

    With ``omega_plus`` the phase is the right limit ``omega + 0+``: an
    exact hit of the endpoint ``1 - alpha`` then codes 1 instead of 0.  The
    phase ``0`` itself meets both endpoints (at ``n = 0`` and ``n = -1``)
    and codes a ``00`` that no generic orbit contains; ``0+`` is the hull
    point agreeing with it for ``n >= 0``.
    """

    alpha: Irrational
    omega_rational: Fraction = Fraction(0)
    omega_alpha: int = 0
    omega_plus: bool = False

    def __post_init__(self):
        object.__setattr__(self, "omega_rational", Fraction(self.omega_rational) % 1)
        lo, hi = self.alpha.bounds(WORK_BITS)
        if lo <= 0 or hi >= 1 << WORK_BITS:
            raise ValueError("Sturmian rotation number must lie in (0, 1)")


@dataclass(frozen=True)
class Concatenation:
    """All binary words in length-lexicographic order, ``0 1 00 01 10 11 000 ...``.

    Index ``n >= 0`` reads the stream at ``n``; index ``n < 0`` reads it at
    ``-n - 1`` (the stream reflected), so every finite word occurs on both
    half-lines.
    """


@dataclass(frozen=True)
class Explicit:
    """A finite word placed at ``offset``, padded with constant fills."""

    center: str
    offset: int = 0
    left_fill: int = 0
    right_fill: int = 0


Rule = Union[Periodic, SturmianCoding, Concatenation, Explicit]


@dataclass(frozen=True)
class SubshiftPoint:
    alphabet: Alphabet
    rule: Rule
    shift_offset: int = 0

    def __post_init__(self):
        allowed = set(self.alphabet.symbols)
        word = ""
        if isinstance(self.rule, Periodic):
            word = self.rule.word
        elif isinstance(self.rule, Explicit):
            word = self.rule.center + DIGITS[self.rule.left_fill] + DIGITS[self.rule.right_fill]
        elif isinstance(self.rule, (SturmianCoding, Concatenation)) and self.alphabet.size < 2:
            raise ValueError("binary rule needs an alphabet of size >= 2")
        if not set(word) <= allowed:
            raise ValueError(f"rule uses symbols outside alphabet {self.alphabet.symbols!r}")


@dataclass(frozen=True)
class TorusPoint:
    v: tuple
    beta: tuple

    def __post_init__(self):
        v = tuple(float(c) % 1.0 for c in np.atleast_1d(self.v))
        b = tuple(float(c) % 1.0 for c in np.atleast_1d(self.beta))
        if len(v) != len(b) or not v:
            raise ValueError("angle and rotation vectors must have the same positive length")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "beta", b)

    @property
    def dim(self) -> int:
        return len(self.v)

    def angles(self, indices) -> np.ndarray:
        """Angles ``v + i*beta mod 1`` for an array of indices; shape (len, dim)."""
        i = np.asarray(indices, dtype=float)[:, None]
        return np.mod(np.asarray(self.v)[None, :] + i * np.asarray(self.beta)[None, :], 1.0)


DynPoint = Union[SubshiftPoint, TorusPoint]


@dataclass(frozen=True)
class WordSet:
    length: int
    words: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "words", frozenset(self.words))
        if any(len(w) != self.length for w in self.words):
            raise ValueError("all words in a WordSet must have the same length")

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(sorted(self.words))

    def __contains__(self, word):
        return word in self.words

    def __sub__(self, other: "WordSet") -> "WordSet":
        return WordSet(self.length, self.words - other.words)


# -- convenience constructors ------------------------------------------------

def periodic_point(word, alphabet: Alphabet | None = None) -> SubshiftPoint:
    word = "".join(str(s) for s in word) if not isinstance(word, str) else word
    if alphabet is None:
        alphabet = Alphabet(max(2, int(max(word)) + 1))
    return SubshiftPoint(alphabet, Periodic(word))


def sturmian_point(alpha, omega=0, omega_alpha: int = 0, omega_plus: bool = False) -> SubshiftPoint:
    return SubshiftPoint(BINARY, SturmianCoding(parse_irrational(alpha), Fraction(omega),
                                                omega_alpha, omega_plus))


def sturmian_base_point(alpha) -> SubshiftPoint:
    """The generic hull point with phase ``0+``: ``x(n)`` for ``n >= 0`` as at phase 0."""
    return sturmian_point(alpha, 0, 0, omega_plus=True)


def fibonacci_point() -> SubshiftPoint:
    return sturmian_base_point("golden")


def concatenation_point() -> SubshiftPoint:
    return SubshiftPoint(BINARY, Concatenation())


def explicit_point(center: str, offset: int = 0, left_fill: int = 0, right_fill: int = 0,
                   alphabet: Alphabet = BINARY) -> SubshiftPoint:
    return SubshiftPoint(alphabet, Explicit(center, offset, left_fill, right_fill))


def one_zero_point() -> SubshiftPoint:
    """Indicator of the origin in {0,1}^Z: isolated in its orbit closure."""
    return explicit_point("1")


def all_words(n: int, alphabet: Alphabet = BINARY) -> WordSet:
    return WordSet(n, ("".join(t) for t in itertools.product(alphabet.symbols, repeat=n)))


# -- evaluation ---------------------------------------------------------------

def _check_range(lo: int, hi: int):
    if lo < -MAX_INDEX or hi > MAX_INDEX:
        raise RangeError(f"indices [{lo}, {hi}] outside supported range ±{MAX_INDEX}")


@lru_cache(maxsize=1)
def _concatenation_stream(length: int = MAX_INDEX + 2) -> str:
    parts = []
    total = 0
    k = 1
    while total < length:
        for w in range(1 << k):
            parts.append(format(w, f"0{k}b"))
        total += k << k
        k += 1
    return "".join(parts)[:length]


def _sturmian_exact(rule: SturmianCoding, k: int) -> str:
    """Symbol at effective index ``k`` (alpha-multiples folded in) by exact sign tests."""
    c, a = rule.omega_rational, rule.alpha
    # floor of t = c + k*alpha, verified exactly
    f = int(np.floor(float(c) + k * float(a)))
    while sign_affine(c - f, k, a) < 0:
        f -= 1
    while sign_affine(c - f - 1, k, a) >= 0:
        f += 1
    # frac(t) > 1 - alpha  <=>  (c - f - 1) + (k + 1) alpha > 0 ; a tie codes 0 unless omega + 0+
    sgn = sign_affine(c - f - 1, k + 1, a)
    return "1" if sgn > 0 or (sgn == 0 and rule.omega_plus) else "0"


def _sturmian_word(rule: SturmianCoding, k_lo: int, k_hi: int) -> str:
    P = WORK_BITS
    A_lo, A_hi = rule.alpha.bounds(P)
    cn, cd = rule.omega_rational.numerator, rule.omega_rational.denominator
    scale = cd << P
    base = cn << P
    step_lo, step_hi = cd * A_lo, cd * A_hi
    # (1 - alpha) * scale lies in [oma_lo, oma_hi]
    oma_lo, oma_hi = scale - step_hi, scale - step_lo
    out = []
    append = out.append
    for k in range(k_lo, k_hi + 1):
        if k >= 0:
            t_lo, t_hi = base + k * step_lo, base + k * step_hi
        else:
            t_lo, t_hi = base + k * step_hi, base + k * step_lo
        fl = t_lo // scale
        if t_hi // scale == fl:
            fr_lo, fr_hi = t_lo - fl * scale, t_hi - fl * scale
            if fr_lo > oma_hi:
                append("1")
                continue
            if fr_hi < oma_lo:
                append("0")
                continue
        append(_sturmian_exact(rule, k))
    return "".join(out)


@lru_cache(maxsize=64)
def _rule_word(rule: Rule, lo: int, hi: int) -> str:
    """Symbols of the unshifted rule on [lo, hi]."""
    if isinstance(rule, Periodic):
        q = rule.period
        start = lo % q
        reps = (hi - lo + 1 + start) // q + 1
        return (rule.word * reps)[start: start + hi - lo + 1]
    if isinstance(rule, SturmianCoding):
        return _sturmian_word(rule, lo + rule.omega_alpha, hi + rule.omega_alpha)
    if isinstance(rule, Concatenation):
        stream = _concatenation_stream()
        neg = ""
        if lo < 0:
            top = min(hi, -1)
            # n < 0 reads stream[-n-1]; n runs lo..top
            neg = stream[-top - 1: -lo][::-1]
        pos = stream[max(lo, 0): hi + 1] if hi >= 0 else ""
        return neg + pos
    if isinstance(rule, Explicit):
        chars = []
        L, R = DIGITS[rule.left_fill], DIGITS[rule.right_fill]
        m = len(rule.center)
        for n in range(lo, hi + 1):
            p = n - rule.offset
            chars.append(L if p < 0 else R if p >= m else rule.center[p])
        return "".join(chars)
    raise TypeError(f"unknown rule {rule!r}")


def window(x: SubshiftPoint, a: int, b: int) -> str:
    """The word ``x(a) x(a+1) ... x(b)``."""
    if a > b:
        raise RangeError(f"empty window [{a}, {b}]")
    lo, hi = a + x.shift_offset, b + x.shift_offset
    _check_range(lo, hi)
    return _rule_word(x.rule, lo, hi)


def point_eval(x: SubshiftPoint, n: int) -> int:
    return int(window(x, n, n))


def shift(x: DynPoint, k: int) -> DynPoint:
    """``T^k x``: for subshifts ``(T^k x)(n) = x(n + k)``; for the torus ``v -> v + k beta``."""
    if isinstance(x, TorusPoint):
        v = tuple((vi + k * bi) % 1.0 for vi, bi in zip(x.v, x.beta))
        return TorusPoint(v, x.beta)
    return replace(x, shift_offset=x.shift_offset + k)


def factors(x: SubshiftPoint, n: int, L: int) -> WordSet:
    """All length-``n`` words occurring in ``window(x, -L, L)``."""
    if n < 1 or L < n:
        raise RangeError("need n >= 1 and L >= n")
    w = window(x, -L, L)
    return WordSet(n, {w[i: i + n] for i in range(len(w) - n + 1)})


def complexity(x: SubshiftPoint, n: int, L: int) -> int:
    return len(factors(x, n, L))


def coverage(x: SubshiftPoint, n: int, L: int, legal: WordSet) -> WordSet:
    """Legal words that do not occur in ``window(x, -L, L)``; empty means covered."""
    if legal.length != n:
        raise ValueError("legal word set has the wrong length")
    return legal - factors(x, n, L)


# -- metrics and limit-set witnesses -----------------------------------------

def circle_distance(a, b):
    d = np.abs(np.mod(np.asarray(a) - np.asarray(b), 1.0))
    return np.minimum(d, 1.0 - d)


def distance(x: DynPoint, y: DynPoint, radius: int = 64) -> float:
    """Product-topology distance.

    Subshifts: ``2**-m`` with ``m`` the smallest ``|n| <= radius`` where the
    points differ (0 if none).  Torus: maximal coordinatewise circle distance.
    """
    _check_kinds(x, y)
    if isinstance(x, TorusPoint):
        return float(np.max(circle_distance(x.v, y.v)))
    wx, wy = window(x, -radius, radius), window(y, -radius, radius)
    for m in range(radius + 1):
        if wx[radius + m] != wy[radius + m] or wx[radius - m] != wy[radius - m]:
            return 2.0 ** -m
    return 0.0


def _check_kinds(x, y):
    if type(x) is not type(y):
        raise IncompatibleSystemsError("points live on different kinds of systems")
    if isinstance(x, SubshiftPoint) and x.alphabet != y.alphabet:
        raise IncompatibleSystemsError("subshift points over different alphabets")
    if isinstance(x, TorusPoint) and x.dim != y.dim:
        raise IncompatibleSystemsError("torus points of different dimension")


def limit_witness(x: DynPoint, y: DynPoint, r: int = 5, h_min: int = 1, H: int = 10**5,
                  delta: float = 1e-6) -> list[int]:
    """Shifts ``h`` with ``h_min <= |h| <= H`` and ``T^h x`` close to ``y``.

    On subshifts closeness means equality on the window ``[-r, r]`` (``delta``
    is ignored); on the torus it means circle distance at most ``delta``
    in every coordinate (``r`` is ignored).
    """
    _check_kinds(x, y)
    if h_min < 1 or H < h_min:
        raise ValueError("need 1 <= h_min <= H")
    if isinstance(x, TorusPoint):
        h = np.concatenate([np.arange(-H, -h_min + 1), np.arange(h_min, H + 1)])
        ang = x.angles(h)
        ok = np.all(circle_distance(ang, np.asarray(y.v)[None, :]) <= delta, axis=1)
        return sorted(int(k) for k in h[ok])
    target = window(y, -r, r)
    big = window(x, -H - r, H + r)
    hits = []
    i = big.find(target)
    while i != -1:
        h = i - H  # big[i] sits at position i - H - r, the window centre at i - H
        if abs(h) >= h_min:
            hits.append(h)
        i = big.find(target, i + 1)
    return hits


def recurrence_positions(x: SubshiftPoint, radius: int, h_min: int, H: int):
    """Map each word ``x(h-radius .. h+radius)``, ``h_min <= |h| <= H``, to one shift realising it."""
    big = window(x, -H - radius, H + radius)
    width = 2 * radius + 1
    seen = {}
    for h in itertools.chain(range(h_min, H + 1), range(-h_min, -H - 1, -1)):
        i = h + H
        seen.setdefault(big[i: i + width], h)
    return seen


# -- serialisation -------------------------------------------------------------

def point_to_config(x: DynPoint) -> dict:
    if isinstance(x, TorusPoint):
        return {"kind": "torus", "v": list(x.v), "beta": list(x.beta)}
    r = x.rule
    out = {"kind": "subshift", "alphabet": x.alphabet.size, "shift": x.shift_offset}
    if isinstance(r, Periodic):
        out["rule"] = {"type": "periodic", "word": r.word}
    elif isinstance(r, SturmianCoding):
        out["rule"] = {"type": "sturmian", "alpha": r.alpha.to_config(),
                       "omega": str(r.omega_rational), "omega_alpha": r.omega_alpha,
                       "omega_plus": r.omega_plus}
    elif isinstance(r, Concatenation):
        out["rule"] = {"type": "concatenation"}
    else:
        out["rule"] = {"type": "explicit", "center": r.center, "offset": r.offset,
                       "left_fill": r.left_fill, "right_fill": r.right_fill}
    return out


def point_from_config(d: dict) -> DynPoint:
    if d.get("kind") == "torus":
        return TorusPoint(tuple(d["v"]), tuple(d["beta"]))
    r = d["rule"]
    kind = r["type"]
    if kind == "periodic":
        rule = Periodic(r["word"])
    elif kind == "sturmian":
        rule = SturmianCoding(parse_irrational(r["alpha"]), Fraction(r.get("omega", "0")),
                              int(r.get("omega_alpha", 0)), bool(r.get("omega_plus", False)))
    elif kind == "concatenation":
        rule = Concatenation()
    elif kind == "explicit":
        rule = Explicit(r["center"], int(r.get("offset", 0)), int(r.get("left_fill", 0)),
                        int(r.get("right_fill", 0)))
    else:
        raise ValueError(f"unknown rule type {kind!r}")
    return SubshiftPoint(Alphabet(int(d.get("alphabet", 2))), rule, int(d.get("shift", 0)))


__all__ = [
    "Alphabet", "BINARY", "Periodic", "SturmianCoding", "Concatenation", "Explicit",
    "SubshiftPoint", "TorusPoint", "DynPoint", "WordSet", "MAX_INDEX",
    "periodic_point", "sturmian_point", "sturmian_base_point", "fibonacci_point", "concatenation_point",
    "explicit_point", "one_zero_point", "all_words", "window", "point_eval", "shift",
    "factors", "complexity", "coverage", "distance", "circle_distance", "limit_witness",
    "recurrence_positions", "point_to_config", "point_from_config", "PrecisionError",
]
