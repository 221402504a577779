"""Truncated noncommutative power series and the Magnus expansion.

Series live in ``Z<<X_1, ..., X_n>>`` truncated above a degree cap.  A
monomial is a tuple of variable indices; the empty tuple is the unit
monomial.  Coefficients are Python integers, so nothing overflows.

For ``n <= 3`` monomials print as words in ``X``, ``Y``, ``Z``; this is the
notation of the classical Magnus tables, e.g. ``-XXXYXYYY+XXXYYYXY``.
"""

from __future__ import annotations

import json
import re
from itertools import product
from typing import Iterable, Mapping

import numpy as np

from .errors import MalformedInputError, OutOfRangeError, RankMismatchError
from .freegroup import FreeWord

__all__ = [
    "TruncSeries",
    "DenseSeries",
    "expand",
    "mul",
    "coeff",
    "format_series",
    "parse_series",
    "monomial_from_text",
    "monomial_to_text",
]

_LETTERS = "XYZ"

Monomial = tuple


def monomial_to_text(m: Monomial, n: int) -> str:
    if not m:
        return "1"
    if n <= 3:
        return "".join(_LETTERS[i - 1] for i in m)
    return "*".join(f"X{i}" for i in m)


def monomial_from_text(text: str, n: int) -> Monomial:
    if text == "1":
        return ()
    if n <= 3:
        try:
            m = tuple(_LETTERS.index(c) + 1 for c in text)
        except ValueError:
            raise MalformedInputError(f"bad monomial {text!r}") from None
    else:
        try:
            m = tuple(int(t[1:]) for t in text.split("*") if t[0] == "X")
        except (ValueError, IndexError):
            raise MalformedInputError(f"bad monomial {text!r}") from None
    if any(not 1 <= i <= n for i in m):
        raise MalformedInputError(f"monomial {text!r} uses a variable outside 1..{n}")
    return m


class TruncSeries:
    """Sparse truncated series: monomial -> nonzero int, degrees <= ``cap``."""

    __slots__ = ("rank", "cap", "terms")

    def __init__(self, rank: int, cap: int, terms: Mapping[Monomial, int] | None = None):
        if cap < 0:
            raise OutOfRangeError("degree cap must be non-negative")
        self.rank = rank
        self.cap = cap
        self.terms: dict[Monomial, int] = {}
        if terms:
            for m, c in terms.items():
                m = tuple(m)
                if len(m) > cap or not c:
                    continue
                if any(not 1 <= i <= rank for i in m):
                    raise MalformedInputError(f"variable outside 1..{rank} in {m}")
                self.terms[m] = int(c)

    @classmethod
    def unit(cls, rank: int, cap: int) -> "TruncSeries":
        return cls(rank, cap, {(): 1})

    @classmethod
    def variable(cls, i: int, rank: int, cap: int) -> "TruncSeries":
        return cls(rank, cap, {(): 1, (i,): 1})

    def copy(self) -> "TruncSeries":
        s = TruncSeries(self.rank, self.cap)
        s.terms = dict(self.terms)
        return s

    def coeff(self, m: Iterable[int]) -> int:
        m = tuple(m)
        if len(m) > self.cap:
            raise OutOfRangeError(f"monomial degree {len(m)} exceeds cap {self.cap}")
        return self.terms.get(m, 0)

    def __getitem__(self, m) -> int:
        return self.coeff(m)

    def degree_part(self, d: int) -> dict[Monomial, int]:
        return {m: c for m, c in self.terms.items() if len(m) == d}

    def _check(self, other: "TruncSeries") -> None:
        if self.rank != other.rank or self.cap != other.cap:
            raise RankMismatchError(
                f"(rank {self.rank}, cap {self.cap}) vs (rank {other.rank}, cap {other.cap})")

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        s = TruncSeries(self.rank, self.cap)
        s.terms = out
        return s

    def __neg__(self) -> "TruncSeries":
        s = TruncSeries(self.rank, self.cap)
        s.terms = {m: -c for m, c in self.terms.items()}
        return s

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        return mul(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return (self.rank, self.cap, self.terms) == (other.rank, other.cap, other.terms)

    def truncate(self, cap: int) -> "TruncSeries":
        return TruncSeries(self.rank, min(cap, self.cap), self.terms)

    def sorted_terms(self) -> list[tuple[Monomial, int]]:
        return sorted(self.terms.items(), key=lambda mc: (len(mc[0]), mc[0]))

    def format(self) -> str:
        return format_series(self)

    def to_json(self) -> str:
        rows = [{"coeff": str(c), "monomial": monomial_to_text(m, self.rank)}
                for m, c in self.sorted_terms()]
        return json.dumps(rows, sort_keys=True)

    def __repr__(self) -> str:
        return f"TruncSeries(rank={self.rank}, cap={self.cap}, {format_series(self)!r})"


def mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    """Product truncated at the common cap."""
    a._check(b)
    cap = a.cap
    out: dict[Monomial, int] = {}
    bt = sorted(b.terms.items(), key=lambda mc: len(mc[0]))
    for m1, c1 in a.terms.items():
        room = cap - len(m1)
        for m2, c2 in bt:
            if len(m2) > room:
                break
            m = m1 + m2
            out[m] = out.get(m, 0) + c1 * c2
    s = TruncSeries(a.rank, cap)
    s.terms = {m: c for m, c in out.items() if c}
    return s


def coeff(s: TruncSeries, m: Iterable[int]) -> int:
    return s.coeff(m)


def _times_letter(terms: dict, g: int, cap: int) -> dict:
    # right multiplication by 1 + X_g (g > 0) or by 1 - X_g + X_g^2 - ... (g < 0)
    i = abs(g)
    out = dict(terms)
    if g > 0:
        for m, c in terms.items():
            if len(m) < cap:
                k = m + (i,)
                v = out.get(k, 0) + c
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
        return out
    for m, c in terms.items():
        k = m
        sign = 1
        for _ in range(cap - len(m)):
            k = k + (i,)
            sign = -sign
            v = out.get(k, 0) + sign * c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
    return out


def expand(w: FreeWord, n: int | None = None, D: int = 8) -> TruncSeries:
    """Magnus expansion ``x_i -> 1 + X_i`` of ``w``, truncated at degree ``D``."""
    n = w.rank if n is None else n
    if w.rank > n:
        raise RankMismatchError(f"word of rank {w.rank} expanded in rank {n}")
    if D < 0:
        raise OutOfRangeError("degree cap must be non-negative")
    terms: dict[Monomial, int] = {(): 1}
    for g in w.word:
        terms = _times_letter(terms, g, D)
    s = TruncSeries(n, D)
    s.terms = terms
    return s


def format_series(s: TruncSeries) -> str:
    """Plain text: graded-lexicographic order, unit coefficients suppressed."""
    if not s.terms:
        return "0"
    parts = []
    for m, c in s.sorted_terms():
        mono = monomial_to_text(m, s.rank)
        if not m:
            body = str(abs(c))
        elif abs(c) == 1:
            body = mono
        else:
            body = f"{abs(c)}{mono}"
        sign = "-" if c < 0 else "+"
        parts.append(body if (not parts and c > 0) else sign + body)
    return "".join(parts)


_TERM = re.compile(r"([+-]?)(\d*)([A-Z][A-Z0-9*]*|)")


def parse_series(text: str, rank: int, cap: int) -> TruncSeries:
    """Inverse of :func:`format_series` (whitespace is ignored)."""
    text = "".join(text.split())
    if text == "0":
        return TruncSeries(rank, cap)
    terms: dict[Monomial, int] = {}
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise MalformedInputError(f"cannot parse series near {text[pos:pos + 12]!r}")
        sign, digits, mono = m.groups()
        if not digits and not mono:
            raise MalformedInputError(f"empty term near {text[pos:pos + 12]!r}")
        c = int(digits) if digits else 1
        if sign == "-":
            c = -c
        key = monomial_from_text(mono, rank) if mono else ()
        if key in terms:
            raise MalformedInputError(f"repeated monomial {mono or '1'!r}")
        terms[key] = c
        pos = m.end()
    return TruncSeries(rank, cap, terms)


class DenseSeries:
    """Graded dense form of a truncated series for the inner loops.

    ``parts[d]`` is an object array of length ``n**d`` indexed by the
    base-``n`` reading of the monomial (variable ``i`` is digit ``i-1``).
    Object dtype keeps exact integer arithmetic.
    """

    __slots__ = ("rank", "cap", "parts")

    def __init__(self, rank: int, cap: int, parts=None):
        self.rank = rank
        self.cap = cap
        if parts is None:
            parts = [np.zeros(rank ** d, dtype=object) for d in range(cap + 1)]
        self.parts = parts

    @classmethod
    def unit(cls, rank: int, cap: int) -> "DenseSeries":
        s = cls(rank, cap)
        s.parts[0][0] = 1
        return s

    @classmethod
    def letter(cls, g: int, rank: int, cap: int) -> "DenseSeries":
        """Image of the generator ``x_|g|`` (or its inverse when ``g < 0``)."""
        s = cls.unit(rank, cap)
        i = abs(g) - 1
        sign = 1 if g > 0 else -1
        idx = 0
        for d in range(1, cap + 1):
            idx = idx * rank + i
            if g > 0 and d > 1:
                break
            s.parts[d][idx] = sign ** d if g < 0 else 1
        return s

    def __mul__(self, other: "DenseSeries") -> "DenseSeries":
        n, cap = self.rank, self.cap
        out = []
        a, b = self.parts, other.parts
        for d in range(cap + 1):
            acc = None
            for i in range(d + 1):
                ai, bj = a[i], b[d - i]
                if not ai.any() or not bj.any():
                    continue
                term = np.multiply.outer(ai, bj).ravel()
                acc = term if acc is None else acc + term
            out.append(acc if acc is not None else np.zeros(n ** d, dtype=object))
        return DenseSeries(n, cap, out)

    def to_sparse(self) -> TruncSeries:
        terms = {}
        for d, arr in enumerate(self.parts):
            for idx in np.flatnonzero(arr):
                m = []
                x = int(idx)
                for _ in range(d):
                    x, r = divmod(x, self.rank)
                    m.append(r + 1)
                terms[tuple(reversed(m))] = int(arr[idx])
        return TruncSeries(self.rank, self.cap, terms)

    @classmethod
    def from_sparse(cls, s: TruncSeries) -> "DenseSeries":
        out = cls(s.rank, s.cap)
        for m, c in s.terms.items():
            idx = 0
            for i in m:
                idx = idx * s.rank + (i - 1)
            out.parts[len(m)][idx] = c
        return out


def all_monomials(n: int, d: int):
    """All monomials of degree exactly ``d`` in lexicographic order."""
    return product(range(1, n + 1), repeat=d)
