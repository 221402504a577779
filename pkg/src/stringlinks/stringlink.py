"""String link diagrams, Wirtinger presentations and Milnor invariants.

A diagram is a :class:`MorseWord`: a bottom-to-top sequence of elementary
letters acting on a row of positions.

``X p``  crossing of positions p, p+1; the strand coming from the lower
         left passes over (positive when both strands run upward)
``x p``  the same crossing with the other strand on top
``U p``  cup: two new positions p, p+1 appear
``A p``  cap: positions p, p+1 are joined and disappear

Bottom endpoint ``i`` sits at position ``i`` and must be joined to top
endpoint ``i``.

Longitudes are computed with Milnor's iteration: every arc is written as a
conjugate ``W m W^-1`` of its strand's meridian, and the conjugators are
rebuilt from the previous pass ``q`` times.  Two back ends are provided,
free words (:func:`chen_milnor`) and Magnus series
(:func:`series_longitudes`); the latter avoids the exponential growth of
nested conjugates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (InsufficientClassError, MalformedInputError, OutOfRangeError,
                     RankMismatchError, ResourceLimitError)
from .freegroup import FreeWord, artin_act, invert, multiply
from .magnus import DenseSeries, TruncSeries, expand

__all__ = [
    "MorseWord",
    "Crossing",
    "StringLinkDiagram",
    "WirtingerPresentation",
    "LongitudeSet",
    "SeriesLongitudes",
    "trivial",
    "parse_braid",
    "format_braid",
    "parse_morse",
    "from_braid",
    "stack",
    "concordance_inverse",
    "wirtinger",
    "chen_milnor",
    "series_longitudes",
    "milnor_mu",
    "longitude_series",
    "artin_longitudes",
    "linking_number",
]

LETTER_KINDS = ("X", "x", "U", "A")
WORD_LENGTH_LIMIT = 2_000_000


class MorseWord:
    """Immutable Morse-word encoding of an ``n``-string link diagram."""

    __slots__ = ("n", "letters", "_trace")

    def __init__(self, n: int, letters: Iterable[tuple[str, int]] = ()):
        if n < 1:
            raise MalformedInputError("a string link needs at least one strand")
        self.n = n
        self.letters = tuple((str(k), int(p)) for k, p in letters)
        self._check_widths()
        self._trace = _trace(self)

    def _check_widths(self) -> None:
        w = self.n
        for t, (kind, p) in enumerate(self.letters):
            if kind not in LETTER_KINDS:
                raise MalformedInputError(f"letter {t}: unknown kind {kind!r}")
            if kind == "U":
                if not 1 <= p <= w + 1:
                    raise MalformedInputError(f"letter {t}: cup at {p} with width {w}")
                w += 2
            elif not 1 <= p <= w - 1:
                raise MalformedInputError(f"letter {t}: {kind}{p} with width {w}")
            elif kind == "A":
                w -= 2
        if w != self.n:
            raise MalformedInputError(f"diagram ends with {w} positions, expected {self.n}")

    def __len__(self) -> int:
        return len(self.letters)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MorseWord):
            return NotImplemented
        return self.n == other.n and self.letters == other.letters

    def __hash__(self) -> int:
        return hash((self.n, self.letters))

    def __mul__(self, other: "MorseWord") -> "MorseWord":
        return stack(self, other)

    @property
    def crossing_count(self) -> int:
        return sum(1 for k, _ in self.letters if k in "Xx")

    def to_text(self) -> str:
        body = " ".join(f"{k}{p}" for k, p in self.letters)
        return f"strands {self.n}\n{body}\n"

    def __repr__(self) -> str:
        shown = " ".join(f"{k}{p}" for k, p in self.letters[:12])
        more = " ..." if len(self.letters) > 12 else ""
        return f"MorseWord(n={self.n}, '{shown}{more}')"


def trivial(n: int) -> MorseWord:
    return MorseWord(n, ())


# ---------------------------------------------------------------- tracing

@dataclass
class _Trace:
    # per strand: list of (letter index, over?, direction) in traversal order
    events: list[list[tuple[int, bool, int]]]
    signs: dict[int, int]


def _step(letters, b: int, q: int, up: bool):
    """Advance one letter from slot (b, q).  Returns (b, q, up, crossing)."""
    if up:
        kind, p = letters[b]
        if kind in "Xx":
            if q == p:
                return b + 1, p + 1, True, (b, 1)
            if q == p + 1:
                return b + 1, p, True, (b, 2)
            return b + 1, q, True, None
        if kind == "U":
            return b + 1, (q if q < p else q + 2), True, None
        # cap
        if q == p:
            return b, p + 1, False, None
        if q == p + 1:
            return b, p, False, None
        return b + 1, (q if q < p else q - 2), True, None
    kind, p = letters[b - 1]
    if kind in "Xx":
        if q == p + 1:
            return b - 1, p, False, (b - 1, 1)
        if q == p:
            return b - 1, p + 1, False, (b - 1, 2)
        return b - 1, q, False, None
    if kind == "U":
        if q == p:
            return b, p + 1, True, None
        if q == p + 1:
            return b, p, True, None
        return b - 1, (q if q < p else q - 2), False, None
    return b - 1, (q if q < p else q + 2), False, None


def _trace(L: MorseWord) -> _Trace:
    letters = L.letters
    N = len(letters)
    total = L.n
    w = L.n
    for kind, _ in letters:
        w += 2 if kind == "U" else (-2 if kind == "A" else 0)
        total += w
    seen = 0
    events: list[list[tuple[int, bool, int]]] = []
    diag_dir: dict[tuple[int, int], int] = {}
    limit = total + 1
    for i in range(1, L.n + 1):
        b, q, up = 0, i, True
        ev: list[tuple[int, bool, int]] = []
        seen += 1
        steps = 0
        while not (up and b == N):
            b2, q2, up2, cr = _step(letters, b, q, up)
            if cr is not None:
                t, diag = cr
                kind = letters[t][0]
                over = (diag == 1) == (kind == "X")
                d = 1 if up else -1
                diag_dir[(t, diag)] = d
                ev.append((t, over, d))
            if b2 == 0 and not up2:
                raise MalformedInputError(f"strand {i} returns to the bottom boundary")
            if (b2, q2) != (b, q):
                seen += 1
            b, q, up = b2, q2, up2
            steps += 1
            if steps > limit:
                raise MalformedInputError("diagram tracing did not terminate")
        if q != i:
            raise MalformedInputError(
                f"strand starting at bottom {i} ends at top {q}; not a string link")
        events.append(ev)
    if seen != total:
        raise MalformedInputError("diagram contains a closed component")
    signs = {}
    for t, (kind, _) in enumerate(letters):
        if kind in "Xx":
            d1, d2 = diag_dir[(t, 1)], diag_dir[(t, 2)]
            signs[t] = d1 * d2 if kind == "X" else -d1 * d2
    return _Trace(events, signs)


# ----------------------------------------------------------------- parsing

_BRAID_TOKEN = re.compile(r"([sS])([1-9][0-9]*)\Z")
_MORSE_TOKEN = re.compile(r"([XxAU])([1-9][0-9]*)\Z")


def parse_braid(text: str) -> list[int]:
    """``"s1 s1 S2"`` -> ``[1, 1, -2]``."""
    out = []
    for tok in text.replace(",", " ").split():
        m = _BRAID_TOKEN.match(tok)
        if not m:
            raise MalformedInputError(f"unknown braid token {tok!r}")
        i = int(m.group(2))
        out.append(i if m.group(1) == "s" else -i)
    return out


def format_braid(b: Sequence[int]) -> str:
    return " ".join(("s" if g > 0 else "S") + str(abs(g)) for g in b)


def parse_morse(text: str) -> MorseWord:
    """Parse the Morse grammar: a ``strands <n>`` header then letter tokens."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise MalformedInputError("empty Morse description")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "strands" or not head[1].isdigit():
        raise MalformedInputError(f"expected 'strands <n>' header, got {lines[0]!r}")
    letters = []
    for ln in lines[1:]:
        for tok in ln.split():
            m = _MORSE_TOKEN.match(tok)
            if not m:
                raise MalformedInputError(f"unknown Morse token {tok!r}")
            letters.append((m.group(1), int(m.group(2))))
    return MorseWord(int(head[1]), letters)


def braid_permutation(b: Sequence[int], n: int) -> list[int]:
    """Top position of the strand starting at each bottom position (1-based)."""
    pos = list(range(1, n + 1))   # pos[k] = strand now at position k+1
    for g in b:
        i = abs(g)
        if not 1 <= i <= n - 1:
            raise OutOfRangeError(f"braid letter {format_braid([g])} on {n} strands")
        pos[i - 1], pos[i] = pos[i], pos[i - 1]
    perm = [0] * n
    for k, s in enumerate(pos):
        perm[s - 1] = k + 1
    return perm


def from_braid(b: Sequence[int] | str, n: int) -> MorseWord:
    """Morse word of a pure braid; ``σ_i`` becomes ``X i`` and ``σ_i^-1`` ``x i``."""
    if isinstance(b, str):
        b = parse_braid(b)
    perm = braid_permutation(b, n)
    if perm != list(range(1, n + 1)):
        raise MalformedInputError(f"braid is not pure; its permutation is {perm}")
    return MorseWord(n, [("X" if g > 0 else "x", abs(g)) for g in b])


def stack(*links: MorseWord) -> MorseWord:
    """Stacking product; the first argument is at the bottom."""
    if not links:
        raise MalformedInputError("stack needs at least one string link")
    n = links[0].n
    letters: list[tuple[str, int]] = []
    for L in links:
        if L.n != n:
            raise RankMismatchError(f"stacking {n}-string and {L.n}-string links")
        letters.extend(L.letters)
    return MorseWord(n, letters)


_MIRROR = {"X": "x", "x": "X", "U": "A", "A": "U"}


def concordance_inverse(L: MorseWord) -> MorseWord:
    """Horizontal mirror image with reversed orientation."""
    return MorseWord(L.n, [(_MIRROR[k], p) for k, p in reversed(L.letters)])


# --------------------------------------------------------------- Wirtinger

@dataclass(frozen=True)
class Crossing:
    letter: int
    over: int
    under_in: int
    under_out: int
    sign: int


@dataclass
class StringLinkDiagram:
    n: int
    arc_strand: list[int]                 # arc id -> strand (1-based)
    crossings: list[Crossing]
    strand_arcs: list[list[int]]          # bottom to top
    # per strand, the undercrossings met in order as (over arc, sign)
    strand_unders: list[list[tuple[int, int]]] = field(default_factory=list)

    @property
    def arc_count(self) -> int:
        return len(self.arc_strand)


@dataclass
class WirtingerPresentation:
    """Generators are arcs; each relation reads ``out = over^e in over^-e``."""
    generators: int
    relations: list[tuple[int, int, int, int]]   # (out, over, in, e)
    meridians: list[int]

    def relators(self) -> list[FreeWord]:
        """Relations as words ``out^-1 over^e in over^-e`` in the arc generators."""
        r = self.generators
        out = []
        for o, v, i, e in self.relations:
            out.append(FreeWord([-(o + 1), e * (v + 1), i + 1, -e * (v + 1)], r))
        return out


def diagram(L: MorseWord) -> StringLinkDiagram:
    tr = L._trace
    arc_strand: list[int] = []
    strand_arcs: list[list[int]] = []
    over_arc: dict[int, int] = {}
    under: dict[int, tuple[int, int]] = {}
    unders_order: list[list[int]] = []
    for s, ev in enumerate(tr.events, start=1):
        cur = len(arc_strand)
        arc_strand.append(s)
        arcs = [cur]
        order = []
        for t, is_over, _ in ev:
            if is_over:
                over_arc[t] = cur
            else:
                new = len(arc_strand)
                arc_strand.append(s)
                under[t] = (cur, new)
                order.append(t)
                cur = new
                arcs.append(cur)
        strand_arcs.append(arcs)
        unders_order.append(order)
    crossings = []
    for t in sorted(tr.signs):
        a, b = under[t]
        crossings.append(Crossing(t, over_arc[t], a, b, tr.signs[t]))
    strand_unders = [[(over_arc[t], tr.signs[t]) for t in order] for order in unders_order]
    return StringLinkDiagram(L.n, arc_strand, crossings, strand_arcs, strand_unders)


def wirtinger(L: MorseWord) -> tuple[StringLinkDiagram, WirtingerPresentation]:
    D = diagram(L)
    rels = [(c.under_out, c.over, c.under_in, c.sign) for c in D.crossings]
    pres = WirtingerPresentation(D.arc_count, rels, [arcs[0] for arcs in D.strand_arcs])
    return D, pres


# ------------------------------------------------------------- longitudes

@dataclass(frozen=True)
class LongitudeSet:
    """Preferred longitudes as words in the meridians, exact modulo Γ_q."""
    n: int
    q: int
    longitudes: tuple[FreeWord, ...]
    framings: tuple[int, ...]

    def series(self, i: int, D: int) -> TruncSeries:
        if D > self.q - 1:
            raise InsufficientClassError(
                f"degree {D} needs class >= {D + 1}, longitudes computed to class {self.q}")
        return expand(self.longitudes[i - 1], self.n, D)

    def mu(self, index: Sequence[int]) -> int:
        return _mu_from(self, index)


@dataclass(frozen=True)
class SeriesLongitudes:
    """Magnus expansions of the preferred longitudes, exact through ``cap``."""
    n: int
    q: int
    cap: int
    expansions: tuple[TruncSeries, ...]
    framings: tuple[int, ...]

    def series(self, i: int, D: int) -> TruncSeries:
        if D > self.cap:
            raise InsufficientClassError(f"degree {D} exceeds computed cap {self.cap}")
        return self.expansions[i - 1].truncate(D)

    def mu(self, index: Sequence[int]) -> int:
        return _mu_from(self, index)


def _check_index(index: Sequence[int], n: int) -> tuple[int, ...]:
    index = tuple(int(i) for i in index)
    if len(index) < 2:
        raise OutOfRangeError("Milnor invariants need an index of length >= 2")
    if any(not 1 <= i <= n for i in index):
        raise OutOfRangeError(f"index {index} uses a strand outside 1..{n}")
    return index


def _mu_from(lon, index: Sequence[int]) -> int:
    index = _check_index(index, lon.n)
    k = len(index)
    if lon.q < k:
        raise InsufficientClassError(
            f"μ of length {k} needs longitudes of class >= {k}, have {lon.q}")
    return lon.series(index[-1], k - 1).coeff(index[:-1])


def _power(g: int, e: int) -> tuple[int, ...]:
    return (g,) * e if e >= 0 else (-g,) * (-e)


def chen_milnor(L: MorseWord, q: int, max_word_length: int = WORD_LENGTH_LIMIT) -> LongitudeSet:
    """Longitudes as free words after ``q`` substitution passes."""
    if q < 1:
        raise OutOfRangeError("nilpotency class q must be >= 1")
    D = diagram(L)
    n = L.n
    arc_strand = D.arc_strand
    conj: list[tuple[int, ...]] = [()] * D.arc_count

    def arc_word(a: int, e: int) -> tuple[int, ...]:
        w = conj[a]
        m = arc_strand[a]
        inv = tuple(-g for g in reversed(w))
        return _reduce(w + ((m,) if e > 0 else (-m,)) + inv)

    for _ in range(q):
        new: list[tuple[int, ...]] = [()] * D.arc_count
        for s, arcs in enumerate(D.strand_arcs):
            w: tuple[int, ...] = ()
            for arc, (over, e) in zip(arcs[1:], D.strand_unders[s]):
                w = _reduce(arc_word(over, e) + w)
                if len(w) > max_word_length:
                    raise ResourceLimitError(
                        f"conjugating word exceeded {max_word_length} letters; "
                        "use series_longitudes")
                new[arc] = w
        conj = new
    longs = []
    frames = []
    for s, arcs in enumerate(D.strand_arcs, start=1):
        w = conj[arcs[-1]]
        f = sum(1 if g > 0 else -1 for g in w if abs(g) == s)
        frames.append(sum(e for over, e in D.strand_unders[s - 1] if arc_strand[over] == s))
        longs.append(FreeWord._trusted(_reduce(w + _power(s, -f)), n))
    return LongitudeSet(n, q, tuple(longs), tuple(frames))


def _reduce(w: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for a in w:
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def series_longitudes(L: MorseWord, D: int, q: int | None = None) -> SeriesLongitudes:
    """Longitude expansions through degree ``D`` by iterating on Magnus series.

    Each pass rebuilds every conjugator from the previous pass' arc series;
    ``q`` defaults to ``D + 1`` passes.
    """
    if D < 0:
        raise OutOfRangeError("degree cap must be non-negative")
    q = D + 1 if q is None else q
    if q < D + 1:
        raise InsufficientClassError(f"degree {D} needs q >= {D + 1}, got {q}")
    dia = diagram(L)
    n = L.n
    arc_strand = dia.arc_strand
    unit = DenseSeries.unit(n, D)
    mer = [DenseSeries.letter(s, n, D) for s in range(1, n + 1)]
    mer_inv = [DenseSeries.letter(-s, n, D) for s in range(1, n + 1)]
    is_over = sorted({c.over for c in dia.crossings})
    W = [unit] * dia.arc_count
    Winv = [unit] * dia.arc_count
    for _ in range(q):
        val = {}
        for a in is_over:
            m = arc_strand[a] - 1
            wm = W[a] * mer[m]
            wmi = W[a] * mer_inv[m]
            val[a] = (wm * Winv[a], wmi * Winv[a])
        newW = [unit] * dia.arc_count
        newWi = [unit] * dia.arc_count
        for s, arcs in enumerate(dia.strand_arcs):
            w, wi = unit, unit
            for arc, (over, e) in zip(arcs[1:], dia.strand_unders[s]):
                fwd, bwd = val[over] if e > 0 else val[over][::-1]
                w = fwd * w
                wi = wi * bwd
                newW[arc] = w
                newWi[arc] = wi
        W, Winv = newW, newWi
    exps = []
    frames = []
    for s, arcs in enumerate(dia.strand_arcs, start=1):
        w = W[arcs[-1]]
        f = w.parts[1][s - 1] if D >= 1 else 0
        corr = mer_inv[s - 1] if f > 0 else mer[s - 1]
        for _ in range(abs(int(f))):
            w = w * corr
        frames.append(sum(e for over, e in dia.strand_unders[s - 1] if arc_strand[over] == s))
        exps.append(w.to_sparse())
    return SeriesLongitudes(n, q, D, tuple(exps), tuple(frames))


def longitude_series(L: MorseWord, i: int, D: int, method: str = "auto",
                     word_threshold: int = 20_000) -> TruncSeries:
    """Magnus expansion of the ``i``-th preferred longitude through degree ``D``.

    ``method`` is ``"word"``, ``"series"`` or ``"auto"``; ``auto`` tries the
    word back end and falls back to series substitution once conjugating
    words pass ``word_threshold`` letters.
    """
    if not 1 <= i <= L.n:
        raise OutOfRangeError(f"strand {i} outside 1..{L.n}")
    if method not in ("auto", "word", "series"):
        raise MalformedInputError(f"unknown method {method!r}")
    if method in ("auto", "word"):
        try:
            lim = word_threshold if method == "auto" else WORD_LENGTH_LIMIT
            return chen_milnor(L, D + 1, max_word_length=lim).series(i, D)
        except ResourceLimitError:
            if method == "word":
                raise
    return series_longitudes(L, D).series(i, D)


def milnor_mu(L: MorseWord, index: Sequence[int] | str,
              longitudes: LongitudeSet | SeriesLongitudes | None = None) -> int:
    """μ_L(i_1 ... i_k): coefficient of X_{i_1}...X_{i_{k-1}} in the i_k-th longitude.

    When ``longitudes`` is given it must have class at least ``k``;
    otherwise they are computed here by series substitution.
    """
    if isinstance(index, str):
        index = [int(c) for c in index]
    index = _check_index(index, L.n)
    if longitudes is None:
        longitudes = series_longitudes(L, len(index) - 1)
    elif longitudes.n != L.n:
        raise RankMismatchError("longitudes belong to a link with a different strand count")
    return longitudes.mu(index)


def linking_number(L: MorseWord, i: int, j: int) -> int:
    """Signed count of crossings where strand ``j`` passes under strand ``i``."""
    D = diagram(L)
    return sum(e for over, e in D.strand_unders[j - 1] if D.arc_strand[over] == i)


def artin_longitudes(b: Sequence[int] | str, n: int) -> tuple[FreeWord, ...]:
    """Exact longitudes of a pure braid from the Artin action.

    The top meridian of strand ``i`` is ``φ(x_i) = w x_i w^-1``; the
    longitude is ``w`` corrected to zero exponent in ``x_i``.
    """
    if isinstance(b, str):
        b = parse_braid(b)
    if braid_permutation(b, n) != list(range(1, n + 1)):
        raise MalformedInputError("Artin longitudes need a pure braid")
    out = []
    for i in range(1, n + 1):
        w = FreeWord((i,), n)
        for g in reversed(b):
            w = artin_act(g, w)
        word = w.word
        # reduced conjugate of a generator: u x_i u^-1
        k = len(word) // 2
        if len(word) % 2 != 1 or word[k] != i:
            raise AssertionError(f"Artin image {w} is not a conjugate of x{i}")
        u = FreeWord._trusted(word[:k], n)
        f = u.exponent_sum(i)
        out.append(multiply(u, FreeWord(_power(i, -f), n)))
    return tuple(out)
