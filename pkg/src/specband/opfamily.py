"""Equivariant band-operator families given by per-diagonal local rules.

The evaluation law is row-anchored::

    A(x)[i, j] = rule_{i-j}(T^i x)

so on a subshift the entry reads the word ``x(i-r .. i+r)`` and on the torus
it reads the angle ``v + i*beta``.  With this law ``A(Tx) = U^{-1} A(x) U``
holds by construction, and bounded, continuous rule bodies make every
family uniformly bounded and continuous.

The shift ``(Uf)(k) = f(k-1)`` lives on diagonal ``d = +1``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Union

import numpy as np

from . import dynsys
from .dynsys import (Alphabet, BINARY, DynPoint, Periodic, SubshiftPoint, TorusPoint,
                     explicit_point, recurrence_positions, shift)
from .errors import IncompatibleSystemsError, ModeError


@dataclass(frozen=True)
class SymbolTable:
    """Value as a function of the word ``x(i-radius .. i+radius)``."""

    radius: int
    table: Mapping[str, complex]

    def __post_init__(self):
        object.__setattr__(self, "table", {str(k): complex(v) for k, v in dict(self.table).items()})
        if any(len(k) != 2 * self.radius + 1 for k in self.table):
            raise ValueError("table keys must have length 2*radius + 1")

    def sup(self) -> float:
        return max((abs(v) for v in self.table.values()), default=0.0)

    def check_total(self, alphabet: Alphabet):
        n_words = alphabet.size ** (2 * self.radius + 1)
        if len(self.table) != n_words or any(set(k) - set(alphabet.symbols) for k in self.table):
            raise ValueError(f"symbol table is not total on words of length {2 * self.radius + 1} "
                             f"over alphabet {alphabet.symbols!r}")


@dataclass(frozen=True)
class TrigPolynomial:
    """``v -> sum_k c_k exp(2 pi i <m_k, v>)`` on the torus."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((tuple(int(m) for m in np.atleast_1d(freq)), complex(c)) for freq, c in self.terms)
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self) -> int:
        return len(self.terms[0][0]) if self.terms else 0

    def sup(self) -> float:
        return float(sum(abs(c) for _, c in self.terms))

    def __call__(self, angles: np.ndarray) -> np.ndarray:
        angles = np.atleast_2d(angles)
        out = np.zeros(angles.shape[0], dtype=complex)
        for freq, c in self.terms:
            out += c * np.exp(2j * np.pi * (angles @ np.asarray(freq, dtype=float)))
        return out


Body = Union[SymbolTable, TrigPolynomial]


@dataclass(frozen=True)
class LocalRule:
    diagonal: int
    body: Body


@dataclass(frozen=True)
class BandFamily:
    """A family ``x -> A(x)`` over a subshift (``alphabet``) or a torus (``dim``)."""

    rules: tuple
    alphabet: Alphabet | None = None
    dim: int | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        rules = tuple(sorted(self.rules, key=lambda r: r.diagonal))
        if len({r.diagonal for r in rules}) != len(rules):
            raise ValueError("at most one rule per diagonal")
        object.__setattr__(self, "rules", rules)
        if (self.alphabet is None) == (self.dim is None):
            raise ValueError("a family lives on exactly one of: subshift (alphabet) or torus (dim)")
        for r in rules:
            if self.alphabet is not None:
                if not isinstance(r.body, SymbolTable):
                    raise ValueError("subshift families need symbol-table rules")
                r.body.check_total(self.alphabet)
            elif not isinstance(r.body, TrigPolynomial) or (r.body.terms and r.body.dim != self.dim):
                raise ValueError("torus families need trigonometric rules of matching dimension")

    @property
    def is_torus(self) -> bool:
        return self.dim is not None

    @property
    def width(self) -> int:
        return max((abs(r.diagonal) for r in self.rules), default=0)

    @property
    def radius(self) -> int:
        """Largest symbol-table radius (0 on the torus)."""
        if self.is_torus:
            return 0
        return max((r.body.radius for r in self.rules), default=0)

    def rule(self, d: int) -> LocalRule | None:
        for r in self.rules:
            if r.diagonal == d:
                return r
        return None

    def bound(self) -> float:
        """Sum over diagonals of the rule sup-norms: bounds every entry and the Wiener norm."""
        return float(sum(r.body.sup() for r in self.rules))

    def check_point(self, x: DynPoint):
        if self.is_torus:
            if not isinstance(x, TorusPoint) or x.dim != self.dim:
                raise IncompatibleSystemsError("torus family evaluated at a non-matching point")
        elif not isinstance(x, SubshiftPoint) or x.alphabet != self.alphabet:
            raise IncompatibleSystemsError("subshift family evaluated at a non-matching point")

    def diagonal_values(self, x: DynPoint, d: int, a: int, b: int) -> np.ndarray:
        """``rule_d(T^i x)`` for rows ``i = a..b``; zeros if the diagonal is empty."""
        rule = self.rule(d)
        if rule is None or b < a:
            return np.zeros(max(b - a + 1, 0), dtype=complex)
        body = rule.body
        if self.is_torus:
            return body(x.angles(np.arange(a, b + 1)))
        r = body.radius
        w = dynsys.window(x, a - r, b + r)
        width = 2 * r + 1
        table = body.table
        return np.array([table[w[k: k + width]] for k in range(b - a + 1)], dtype=complex)

    def entry(self, x: DynPoint, i: int, j: int) -> complex:
        self.check_point(x)
        d = i - j
        if abs(d) > self.width:
            return 0j
        return complex(self.diagonal_values(x, d, i, i)[0])


# -- catalog constructors -------------------------------------------------------

def constant_table(value, alphabet: Alphabet = BINARY) -> SymbolTable:
    return SymbolTable(0, {s: value for s in alphabet.symbols})


def symbol_table(values, alphabet: Alphabet = BINARY) -> SymbolTable:
    """Radius-0 table ``x(i) -> values[x(i)]``."""
    return SymbolTable(0, {s: values[k] for k, s in enumerate(alphabet.symbols)})


def shift_family(alphabet: Alphabet = BINARY) -> BandFamily:
    return BandFamily((LocalRule(1, constant_table(1.0, alphabet)),), alphabet=alphabet, name="U")


def symbolic_family(lam=1.0, selfadjoint=False, alphabet: Alphabet = BINARY, hopping=True) -> BandFamily:
    """``U + lam V`` (or ``U + U^-1 + lam V``) with ``(V f)(n) = x(n) f(n)``."""
    rules = [LocalRule(0, symbol_table([lam * k for k in range(alphabet.size)], alphabet))]
    name = f"lam*V (lam={lam})"
    if hopping:
        rules.append(LocalRule(1, constant_table(1.0, alphabet)))
        name = f"U + {name}"
        if selfadjoint:
            rules.append(LocalRule(-1, constant_table(1.0, alphabet)))
            name = f"U + U^-1 + lam*V (lam={lam})"
    return BandFamily(tuple(rules), alphabet=alphabet, name=name)


def potential_family(alphabet: Alphabet = BINARY) -> BandFamily:
    """The bare multiplication operator ``V``: diagonal ``x(n)``."""
    return symbolic_family(1.0, alphabet=alphabet, hopping=False)


def constant_family(diagonals: Mapping[int, complex], alphabet: Alphabet = BINARY) -> BandFamily:
    """Point-independent band operator with constant diagonals (commutes with U)."""
    rules = tuple(LocalRule(d, constant_table(c, alphabet)) for d, c in diagonals.items())
    return BandFamily(rules, alphabet=alphabet, name=f"constant {dict(diagonals)}")


def almost_mathieu_family(lam=1.0, selfadjoint=True) -> BandFamily:
    """``U (+ U^-1) + lam cos(2 pi v)`` over the circle rotation."""
    rules = [LocalRule(0, TrigPolynomial((((1,), lam / 2), ((-1,), lam / 2)))),
             LocalRule(1, TrigPolynomial((((0,), 1.0),)))]
    if selfadjoint:
        rules.append(LocalRule(-1, TrigPolynomial((((0,), 1.0),))))
    name = ("U + U^-1" if selfadjoint else "U") + f" + lam cos (lam={lam})"
    return BandFamily(tuple(rules), dim=1, name=name)


def torus_constant_family(diagonals: Mapping[int, complex], dim: int = 1) -> BandFamily:
    zero = (0,) * dim
    rules = tuple(LocalRule(d, TrigPolynomial(((zero, c),))) for d, c in diagonals.items())
    return BandFamily(rules, dim=dim, name=f"constant {dict(diagonals)}")


# -- windows ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BandWindow:
    """Entries ``A[i, j]`` for ``i, j`` in ``offset .. offset + size - 1``."""

    offset: int
    entries: np.ndarray
    mode: str = "zero"

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def last(self) -> int:
        return self.offset + self.size - 1

    def restrict(self, a: int, b: int) -> "BandWindow":
        if a < self.offset or b > self.last or a > b:
            raise ValueError(f"[{a}, {b}] not inside [{self.offset}, {self.last}]")
        s = slice(a - self.offset, b - self.offset + 1)
        return BandWindow(a, self.entries[s, s].copy(), self.mode)

    def key(self) -> tuple:
        """Exact identity of the window (used for set comparisons)."""
        return (self.offset, self.size, self.mode, np.ascontiguousarray(self.entries).tobytes())

    def same_entries(self, other: "BandWindow") -> bool:
        return self.entries.shape == other.entries.shape and np.array_equal(self.entries, other.entries)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "re", "im"])
            rows, cols = np.nonzero(self.entries)
            for p, q in zip(rows, cols):
                v = self.entries[p, q]
                w.writerow([self.offset + p, self.offset + q, f"{v.real:.17g}", f"{v.imag:.17g}"])


def section(F: BandFamily, x: DynPoint, a: int, b: int) -> BandWindow:
    """Zero-truncated window of ``A(x)`` on ``[a, b]``."""
    F.check_point(x)
    m = b - a + 1
    M = np.zeros((m, m), dtype=complex)
    for rule in F.rules:
        d = rule.diagonal
        lo, hi = max(a, a + d), min(b, b + d)
        if lo > hi:
            continue
        rows = np.arange(lo, hi + 1) - a
        M[rows, rows - d] = F.diagonal_values(x, d, lo, hi)
    return BandWindow(a, M, "zero")


def window_matrix(F: BandFamily, x: DynPoint, N: int = 1, mode: str = "zero", q: int | None = None) -> BandWindow:
    """Finite section on ``[-N, N]`` (``mode="zero"``) or the ``q x q`` cyclic wrap (``mode="periodic"``)."""
    if mode == "zero":
        if N < 1:
            raise ValueError("N must be positive")
        return section(F, x, -N, N)
    if mode != "periodic":
        raise ModeError(f"unknown boundary mode {mode!r}")
    F.check_point(x)
    if not (isinstance(x, SubshiftPoint) and isinstance(x.rule, Periodic)):
        raise ModeError("periodic mode requires a periodic subshift point")
    q = x.rule.period if q is None else q
    if q < 1 or q % x.rule.period:
        raise ModeError(f"period {x.rule.period} does not divide q={q}")
    M = np.zeros((q, q), dtype=complex)
    for rule in F.rules:
        d = rule.diagonal
        vals = F.diagonal_values(x, d, 0, q - 1)
        for i in range(q):
            M[i, (i - d) % q] += vals[i]
    return BandWindow(0, M, "periodic")


def ad_u(w: BandWindow) -> BandWindow:
    """Window of ``U^{-1} B U`` carrying the same entries, one index to the left."""
    return BandWindow(w.offset - 1, w.entries.copy(), w.mode)


def ad_u_inverse(w: BandWindow) -> BandWindow:
    return BandWindow(w.offset + 1, w.entries.copy(), w.mode)


# -- checks ------------------------------------------------------------------------

class EquivarianceResult(NamedTuple):
    ok: bool
    max_deviation: float


def equivariance_check(F: BandFamily, x: DynPoint, n: int, sample_count: int = 100, seed: int = 0,
                       index_bound: int = 1000, tol: float | None = None) -> EquivarianceResult:
    """Compare ``A(T^n x)[i, j]`` with ``A(x)[i+n, j+n]`` on seeded random samples."""
    if tol is None:
        tol = 1e-10 if F.is_torus else 0.0
    rng = np.random.default_rng(seed)
    y = shift(x, n)
    w = F.width
    worst = 0.0
    for _ in range(sample_count):
        i = int(rng.integers(-index_bound, index_bound + 1))
        j = i - int(rng.integers(-w - 1, w + 2))
        worst = max(worst, abs(F.entry(y, i, j) - F.entry(x, i + n, j + n)))
    return EquivarianceResult(worst <= tol, worst)


def wiener_norm(F: BandFamily, x: DynPoint, L: int) -> float:
    """``sum_d max_{|j| <= L} |A(x)[j+d, j]|``."""
    if L < 1:
        raise ValueError("L must be positive")
    total = 0.0
    for rule in F.rules:
        d = rule.diagonal
        vals = F.diagonal_values(x, d, -L + d, L + d)
        total += float(np.max(np.abs(vals))) if vals.size else 0.0
    return total


def _require_subshift(F: BandFamily, x: DynPoint):
    F.check_point(x)
    if F.is_torus:
        raise IncompatibleSystemsError(
            "limit operators over a torus form a continuum; use dynsys.limit_witness instead")


def limit_operator_windows(F: BandFamily, x: SubshiftPoint, r_idx: int = 3, h_min: int = 1000,
                           H: int = 10**5, r_word: int | None = None) -> list[BandWindow]:
    """Distinct windows on ``[-r_idx, r_idx]`` of ``A(T^h x)`` over ``h_min <= |h| <= H``.

    A window is a function of the word ``x(h - R .. h + R)`` with
    ``R = r_idx + F.radius``, so one representative shift per distinct word
    suffices and the enumeration is exact.
    """
    _require_subshift(F, x)
    R = r_idx + F.radius if r_word is None else r_word
    if R < r_idx + F.radius:
        raise ValueError("r_word must cover the window plus the rule radius")
    found = {}
    for word, h in recurrence_positions(x, R, h_min, H).items():
        win = section(F, shift(x, h), -r_idx, r_idx)
        found.setdefault(win.key(), win)
    return [found[k] for k in sorted(found)]


def hull_windows(F: BandFamily, words, r_idx: int) -> list[BandWindow]:
    """Windows on ``[-r_idx, r_idx]`` of ``A(y)`` for points ``y`` with the given central words."""
    found = {}
    for word in words:
        R = (len(word) - 1) // 2
        y = explicit_point(word, offset=-R, alphabet=F.alphabet)
        win = section(F, y, -r_idx, r_idx)
        found.setdefault(win.key(), win)
    return [found[k] for k in sorted(found)]


def self_similar_check(F: BandFamily, x: DynPoint, r_idx: int = 1, h_min: int = 1000, H: int = 10**5,
                       delta: float = 1e-6) -> bool:
    """Does the central window of ``A(x)`` recur at some ``h_min <= |h| <= H``?

    On the torus recurrence is up to ``delta`` in the angle.
    """
    F.check_point(x)
    if F.is_torus:
        return bool(dynsys.limit_witness(x, x, h_min=h_min, H=H, delta=delta))
    central = section(F, x, -r_idx, r_idx).key()
    R = r_idx + F.radius
    for word, h in recurrence_positions(x, R, h_min, H).items():
        if section(F, shift(x, h), -r_idx, r_idx).key() == central:
            return True
    return False


# -- serialisation -----------------------------------------------------------------

def _cplx(v: complex):
    return [v.real, v.imag]


def family_to_config(F: BandFamily) -> dict:
    diags = []
    for r in F.rules:
        if isinstance(r.body, SymbolTable):
            body = {"symbol_table": {"radius": r.body.radius,
                                     "table": {k: _cplx(v) for k, v in sorted(r.body.table.items())}}}
        else:
            body = {"trig": [{"m": list(m), "c": _cplx(c)} for m, c in r.body.terms]}
        diags.append({"d": r.diagonal, **body})
    system = {"kind": "torus", "dim": F.dim} if F.is_torus else {"kind": "subshift", "alphabet": F.alphabet.size}
    return {"system": system, "name": F.name, "diagonals": diags}


def family_from_config(cfg: dict) -> BandFamily:
    rules = []
    for entry in cfg["diagonals"]:
        if "symbol_table" in entry:
            st = entry["symbol_table"]
            body = SymbolTable(int(st["radius"]), {k: complex(*v) for k, v in st["table"].items()})
        else:
            body = TrigPolynomial(tuple((t["m"], complex(*t["c"])) for t in entry["trig"]))
        rules.append(LocalRule(int(entry["d"]), body))
    system = cfg["system"]
    if system["kind"] == "torus":
        return BandFamily(tuple(rules), dim=int(system["dim"]), name=cfg.get("name", ""))
    return BandFamily(tuple(rules), alphabet=Alphabet(int(system["alphabet"])), name=cfg.get("name", ""))
