"""Words in a free group of finite rank.

A word is stored as a tuple of nonzero signed integers: ``+g`` is the
generator ``x_g`` and ``-g`` its inverse.  Words are freely reduced on
construction, so two equal group elements always compare equal.

Text form: ``x1 x2' x1`` (a trailing apostrophe marks an inverse letter).
"""

from __future__ import annotations

import re
from typing import Iterable, Sequence

from .errors import MalformedInputError, OutOfRangeError, RankMismatchError

__all__ = [
    "FreeWord",
    "reduce",
    "multiply",
    "invert",
    "commutator",
    "artin_act",
    "parse_word",
    "generator",
]

_TOKEN = re.compile(r"x([1-9][0-9]*)('?)\Z")


def _free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for a in letters:
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def _as_signed(letter) -> int:
    if isinstance(letter, tuple):
        g, s = letter
        if s not in (1, -1):
            raise MalformedInputError(f"letter sign must be +1 or -1, got {s!r}")
        return int(g) * s
    return int(letter)


class FreeWord:
    """A freely reduced word in the free group ``F(x_1, ..., x_rank)``.

    ``letters`` may be signed integers (``-2`` is ``x_2^{-1}``) or
    ``(generator, sign)`` pairs.
    """

    __slots__ = ("_w", "rank", "_hash")

    def __init__(self, letters: Iterable = (), rank: int = 1):
        if rank < 0:
            raise MalformedInputError("rank must be non-negative")
        w = [_as_signed(a) for a in letters]
        for a in w:
            if a == 0 or abs(a) > rank:
                raise MalformedInputError(
                    f"generator index {abs(a)} outside 1..{rank}")
        self._w = _free_reduce(w)
        self.rank = rank
        self._hash = None

    @classmethod
    def _trusted(cls, w: tuple[int, ...], rank: int) -> "FreeWord":
        # w must already be reduced and in range
        obj = cls.__new__(cls)
        obj._w = w
        obj.rank = rank
        obj._hash = None
        return obj

    @property
    def word(self) -> tuple[int, ...]:
        """The reduced word as signed integers."""
        return self._w

    @property
    def letters(self) -> tuple[tuple[int, int], ...]:
        return tuple((abs(a), 1 if a > 0 else -1) for a in self._w)

    def __len__(self) -> int:
        return len(self._w)

    def __iter__(self):
        return iter(self._w)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FreeWord):
            return NotImplemented
        return self.rank == other.rank and self._w == other._w

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rank, self._w))
        return self._hash

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return multiply(self, other)

    def __invert__(self) -> "FreeWord":
        return invert(self)

    def __pow__(self, e: int) -> "FreeWord":
        base = self if e >= 0 else invert(self)
        out = FreeWord._trusted((), self.rank)
        for _ in range(abs(e)):
            out = multiply(out, base)
        return out

    def is_identity(self) -> bool:
        return not self._w

    def exponent_sum(self, g: int) -> int:
        return sum(1 if a > 0 else -1 for a in self._w if abs(a) == g)

    def __str__(self) -> str:
        if not self._w:
            return "1"
        return " ".join(f"x{abs(a)}" + ("'" if a < 0 else "") for a in self._w)

    def __repr__(self) -> str:
        return f"FreeWord({str(self)!r}, rank={self.rank})"


def generator(i: int, rank: int) -> FreeWord:
    return FreeWord((i,), rank)


def reduce(raw: Sequence, rank: int) -> FreeWord:
    """Freely reduce a sequence of signed letters."""
    return FreeWord(raw, rank)


def _check_rank(a: FreeWord, b: FreeWord) -> None:
    if a.rank != b.rank:
        raise RankMismatchError(f"rank {a.rank} vs rank {b.rank}")


def multiply(a: FreeWord, b: FreeWord) -> FreeWord:
    _check_rank(a, b)
    x, y = a._w, b._w
    k = 0
    m = min(len(x), len(y))
    while k < m and x[-1 - k] == -y[k]:
        k += 1
    return FreeWord._trusted(x[:len(x) - k] + y[k:], a.rank)


def invert(a: FreeWord) -> FreeWord:
    return FreeWord._trusted(tuple(-g for g in reversed(a._w)), a.rank)


def commutator(a: FreeWord, b: FreeWord) -> FreeWord:
    """Return ``a b a^-1 b^-1``."""
    _check_rank(a, b)
    return FreeWord(a._w + b._w + invert(a)._w + invert(b)._w, a.rank)


def _artin_images(i: int, sign: int, rank: int) -> dict[int, tuple[int, ...]]:
    # sigma_i: x_i -> x_i x_{i+1} x_i^-1, x_{i+1} -> x_i
    # sigma_i^-1: x_i -> x_{i+1}, x_{i+1} -> x_{i+1}^-1 x_i x_{i+1}
    if sign > 0:
        img = {i: (i, i + 1, -i), i + 1: (i,)}
    else:
        img = {i: (i + 1,), i + 1: (-(i + 1), i, i + 1)}
    return img


def artin_act(braid_letter, w: FreeWord) -> FreeWord:
    """Apply the Artin automorphism of one braid letter to ``w``.

    ``braid_letter`` is ``(i, sign)`` or a signed integer ``±i``.
    """
    i, sign = (braid_letter if isinstance(braid_letter, tuple)
               else (abs(braid_letter), 1 if braid_letter > 0 else -1))
    if not 1 <= i <= w.rank - 1:
        raise OutOfRangeError(f"braid position {i} outside 1..{w.rank - 1}")
    img = _artin_images(i, sign, w.rank)
    out: list[int] = []
    for a in w._w:
        g = abs(a)
        piece = img.get(g, (g,))
        if a < 0:
            piece = tuple(-b for b in reversed(piece))
        out.extend(piece)
    return FreeWord._trusted(_free_reduce(out), w.rank)


def parse_word(text: str, rank: int) -> FreeWord:
    """Parse ``"x1 x2' x1"``; the empty string and ``"1"`` give the identity."""
    toks = text.split()
    if toks == ["1"]:
        toks = []
    letters = []
    for t in toks:
        m = _TOKEN.match(t)
        if not m:
            raise MalformedInputError(f"unknown token {t!r}")
        g = int(m.group(1))
        letters.append(-g if m.group(2) else g)
    return FreeWord(letters, rank)
