"""Chord and Jacobi diagrams on two upward strands.

A chord diagram is stored canonically as a pair of label words ``(w1, w2)``:
``w1`` lists the chords met going up strand 1, ``w2`` those met going up
strand 2, and labels are renumbered ``0, 1, ...`` by first appearance
reading strand 1 and then strand 2.  Two diagrams are equal iff their
canonical words are equal.

The algebra A(2) is the span of chord diagrams modulo FI (a chord whose
two ends are adjacent on one strand is zero) and the four-term relation.
Jacobi diagrams are turned into chord diagrams with STU.

Membership of a vector in the relation span is decided by sparse row
echelon forms, exactly over Q or modulo primes.  For large degrees the
check can be run in a quotient that additionally sets to zero every
diagram with too many chords on a single strand; since this only enlarges
the relation span, a vector found outside it is outside the original
span as well.

Commutators of tree diagrams can also be certified without elimination,
by the exact tree and one-loop parts of their connected expansion.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import MalformedInputError, OutOfRangeError, ResourceLimitError, UnsupportedInputError

__all__ = [
    "ChordDiagram2",
    "JacobiDiagram2",
    "DiagramVector",
    "SelfChordBound",
    "MembershipCertificate",
    "canonical",
    "has_isolated_chord",
    "chord_types",
    "basis",
    "stu_expand",
    "stack_product",
    "commutator",
    "four_term_relations",
    "stu_relations",
    "relation_rows",
    "SparseEchelon",
    "RelationReducer",
    "dense_rank_mod",
    "dimension",
    "dimension_dense",
    "in_relation_span",
    "commutator_check",
    "graded_certificate",
    "LegGraph",
    "commutator_graphs",
    "tree_image",
    "loop_image",
    "cyclic_word",
    "graded_parts",
    "tree_jacobi",
    "load_jacobi",
    "DEFAULT_PRIMES",
]

DEFAULT_PRIMES = (2147483629, 2147483587, 2147483579)

Key = tuple  # (w1, w2), each a tuple of chord labels


# ------------------------------------------------------------ chord diagrams

def canonical(w1: Iterable, w2: Iterable) -> Key:
    """Relabel chords by first appearance along strand 1, then strand 2."""
    m: dict = {}
    a = []
    for c in w1:
        if c not in m:
            m[c] = len(m)
        a.append(m[c])
    b = []
    for c in w2:
        if c not in m:
            m[c] = len(m)
        b.append(m[c])
    return (tuple(a), tuple(b))


def has_isolated_chord(key: Key) -> bool:
    for w in key:
        for i in range(len(w) - 1):
            if w[i] == w[i + 1]:
                return True
    return False


def chord_types(key: Key) -> tuple[int, int, int]:
    """Numbers of chords of type (1,1), (1,2), (2,2)."""
    w1, w2 = key
    s1, s2 = set(w1), set(w2)
    cross = len(s1 & s2)
    c11 = len(s1) - cross
    c22 = len(s2) - cross
    return c11, cross, c22


@dataclass(frozen=True)
class ChordDiagram2:
    w1: tuple[int, ...]
    w2: tuple[int, ...]

    def __post_init__(self):
        if canonical(self.w1, self.w2) != (self.w1, self.w2):
            raise MalformedInputError("chord words are not in canonical form")
        labels = self.w1 + self.w2
        if any(labels.count(c) != 2 for c in set(labels)):
            raise MalformedInputError("every chord must have exactly two endpoints")

    @classmethod
    def from_words(cls, w1, w2) -> "ChordDiagram2":
        return cls(*canonical(w1, w2))

    @property
    def key(self) -> Key:
        return (self.w1, self.w2)

    @property
    def degree(self) -> int:
        return (len(self.w1) + len(self.w2)) // 2

    def to_text(self) -> str:
        ends: dict[int, list[str]] = {}
        for s, w in ((1, self.w1), (2, self.w2)):
            for i, c in enumerate(w, start=1):
                ends.setdefault(c, []).append(f"s{s}:{i}")
        chords = " ".join(f"({','.join(ends[c])})" for c in sorted(ends))
        return f"strand1: {len(self.w1)}  strand2: {len(self.w2)}  chords: {chords}"

    @classmethod
    def parse(cls, text: str) -> "ChordDiagram2":
        import re
        m = re.fullmatch(r"\s*strand1:\s*(\d+)\s+strand2:\s*(\d+)\s+chords:(.*)", text)
        if not m:
            raise MalformedInputError(f"bad chord diagram line {text!r}")
        a, b = int(m.group(1)), int(m.group(2))
        slots = {1: [None] * a, 2: [None] * b}
        pairs = re.findall(r"\(\s*s([12]):(\d+)\s*,\s*s([12]):(\d+)\s*\)", m.group(3))
        if len(pairs) * 2 != a + b:
            raise MalformedInputError("chord list does not cover all endpoints")
        for c, (s, i, t, j) in enumerate(pairs):
            for st, pos in ((int(s), int(i)), (int(t), int(j))):
                if not 1 <= pos <= len(slots[st]) or slots[st][pos - 1] is not None:
                    raise MalformedInputError(f"endpoint s{st}:{pos} invalid or reused")
                slots[st][pos - 1] = c
        return cls.from_words(slots[1], slots[2])


def _matchings(slots: list) -> Iterator[list[tuple]]:
    if not slots:
        yield []
        return
    first = slots[0]
    for i in range(1, len(slots)):
        rest = slots[1:i] + slots[i + 1:]
        for m in _matchings(rest):
            yield [(first, slots[i])] + m


def basis(k: int, keep: Callable[[Key], bool] | None = None) -> list[Key]:
    """All canonical chord diagrams of degree ``k`` (isolated chords included)."""
    out = []
    for a in range(2 * k + 1):
        b = 2 * k - a
        slots = [(1, i) for i in range(a)] + [(2, i) for i in range(b)]
        for m in _matchings(slots):
            w = {1: [None] * a, 2: [None] * b}
            for c, (p, q) in enumerate(m):
                w[p[0]][p[1]] = c
                w[q[0]][q[1]] = c
            key = canonical(w[1], w[2])
            if keep is None or keep(key):
                out.append(key)
    return out


# ------------------------------------------------------------ vectors

@dataclass
class DiagramVector:
    """Homogeneous rational combination of canonical chord diagrams."""

    degree: int
    terms: dict = field(default_factory=dict)

    @classmethod
    def from_terms(cls, degree: int, items: Iterable[tuple[Key, object]]) -> "DiagramVector":
        v = cls(degree)
        for key, c in items:
            v.add(key, c)
        return v

    @classmethod
    def unit(cls) -> "DiagramVector":
        return cls(0, {((), ()): Fraction(1)})

    def add(self, key: Key, c) -> None:
        if (len(key[0]) + len(key[1])) != 2 * self.degree:
            raise OutOfRangeError("inhomogeneous term")
        v = self.terms.get(key, 0) + Fraction(c)
        if v:
            self.terms[key] = v
        else:
            self.terms.pop(key, None)

    def __add__(self, other: "DiagramVector") -> "DiagramVector":
        if other.degree != self.degree and self.terms and other.terms:
            raise OutOfRangeError("adding vectors of different degree")
        out = DiagramVector(self.degree if self.terms else other.degree, dict(self.terms))
        for k, c in other.terms.items():
            out.add(k, c)
        return out

    def __neg__(self) -> "DiagramVector":
        return DiagramVector(self.degree, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "DiagramVector") -> "DiagramVector":
        return self + (-other)

    def scale(self, c) -> "DiagramVector":
        c = Fraction(c)
        if not c:
            return DiagramVector(self.degree)
        return DiagramVector(self.degree, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other: "DiagramVector") -> "DiagramVector":
        return stack_product(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiagramVector):
            return NotImplemented
        return self.terms == other.terms and (self.degree == other.degree or not self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def drop_isolated(self) -> "DiagramVector":
        """Remove terms that vanish by FI."""
        return DiagramVector(self.degree, {k: c for k, c in self.terms.items()
                                           if not has_isolated_chord(k)})

    def to_text(self) -> str:
        lines = []
        for key in sorted(self.terms):
            lines.append(f"{self.terms[key]}  {ChordDiagram2(*key).to_text()}")
        return "\n".join(lines)


def _stack_keys(a: Key, b: Key) -> Key:
    n = (len(a[0]) + len(a[1])) // 2
    return canonical(a[0] + tuple(c + n for c in b[0]), a[1] + tuple(c + n for c in b[1]))


def stack_product(u: DiagramVector, v: DiagramVector) -> DiagramVector:
    """``u`` below ``v`` on both strands."""
    out = DiagramVector(u.degree + v.degree)
    for ka, ca in u.terms.items():
        for kb, cb in v.terms.items():
            out.add(_stack_keys(ka, kb), ca * cb)
    return out


def commutator(u: DiagramVector, v: DiagramVector) -> DiagramVector:
    return stack_product(u, v) - stack_product(v, u)


# ------------------------------------------------------------ Jacobi diagrams

class JacobiDiagram2:
    """Uni-trivalent graph whose univalent vertices sit on two strands.

    ``legs`` maps a vertex id to ``(strand, pos)`` where ``pos`` is a tuple
    (compared lexicographically); ``nbrs`` maps every vertex to its
    neighbours, in cyclic order for trivalent vertices.
    """

    __slots__ = ("legs", "nbrs")

    def __init__(self, legs: dict, nbrs: dict):
        self.legs = dict(legs)
        self.nbrs = {v: list(n) for v, n in nbrs.items()}
        self._validate()

    def _validate(self) -> None:
        for v, ns in self.nbrs.items():
            want = 1 if v in self.legs else 3
            if len(ns) != want:
                raise MalformedInputError(f"vertex {v!r} has valence {len(ns)}, expected {want}")
            for u in ns:
                if u not in self.nbrs:
                    raise MalformedInputError(f"vertex {v!r} joined to unknown {u!r}")
                if self.nbrs[u].count(v) != ns.count(u):
                    raise MalformedInputError(f"edge {v!r}-{u!r} is not symmetric")
        for v, (s, pos) in self.legs.items():
            if s not in (1, 2):
                raise MalformedInputError(f"leg {v!r} on strand {s}")
            if v not in self.nbrs:
                raise MalformedInputError(f"leg {v!r} has no edge")
        spots = [(s, tuple(p)) for s, p in self.legs.values()]
        if len(set(spots)) != len(spots):
            raise MalformedInputError("two legs share a position")
        if len(self.nbrs) % 2:
            raise MalformedInputError("odd number of vertices")

    @property
    def degree(self) -> int:
        return len(self.nbrs) // 2

    def trivalent(self) -> list:
        return [v for v in self.nbrs if v not in self.legs]

    def _copy(self) -> "JacobiDiagram2":
        j = JacobiDiagram2.__new__(JacobiDiagram2)
        j.legs = dict(self.legs)
        j.nbrs = {v: list(n) for v, n in self.nbrs.items()}
        return j

    def reversed_at(self, t) -> "JacobiDiagram2":
        """Same graph with the cyclic order at ``t`` reversed."""
        j = self._copy()
        j.nbrs[t] = j.nbrs[t][::-1]
        return j

    def stu_candidates(self) -> list[tuple]:
        """Pairs (trivalent vertex, adjacent leg) in a fixed order."""
        out = []
        for t in sorted(self.trivalent(), key=repr):
            for u in self.nbrs[t]:
                if u in self.legs:
                    out.append((t, u))
        return sorted(set(out), key=repr)

    def stu(self, t, leg) -> list[tuple[int, "JacobiDiagram2"]]:
        """One STU move at vertex ``t`` through the leg ``leg``.

        With cyclic order ``(leg, a, b)`` at ``t`` this is
        ``D(a below b) - D(b below a)``, the new legs sitting where ``leg`` was.
        """
        ns = self.nbrs[t]
        r = ns.index(leg)
        _, a, b = ns[r:] + ns[:r]
        s, pos = self.legs[leg]
        pos = tuple(pos)
        out = []
        for sign, (lo, hi) in ((1, (a, b)), (-1, (b, a))):
            j = self._copy()
            del j.nbrs[t], j.nbrs[leg], j.legs[leg]
            fresh = []
            for target, p in ((lo, pos + (0,)), (hi, pos + (1,))):
                v = ("n", len(j.nbrs), repr(target), p)
                while v in j.nbrs:
                    v = v + ("'",)
                j.legs[v] = (s, p)
                j.nbrs[v] = [target]
                fresh.append((target, v))
            for target, v in fresh:
                lst = j.nbrs[target]
                lst[lst.index(t)] = v
            out.append((sign, j))
        return out

    def to_chord_key(self) -> Key:
        if self.trivalent():
            raise UnsupportedInputError("diagram still has trivalent vertices")
        ids = {}
        words = {1: [], 2: []}
        for v in self.legs:
            u = self.nbrs[v][0]
            ids[v] = ids.get(u, len(ids) if u not in ids else ids[u])
        for s in (1, 2):
            on = sorted((p, v) for v, (st, p) in self.legs.items() if st == s)
            words[s] = [ids[v] for _, v in on]
        return canonical(words[1], words[2])


def _components_touch_strands(j: JacobiDiagram2) -> bool:
    seen = set()
    for start in j.nbrs:
        if start in seen:
            continue
        comp = {start}
        todo = [start]
        while todo:
            v = todo.pop()
            for u in j.nbrs[v]:
                if u not in comp:
                    comp.add(u)
                    todo.append(u)
        seen |= comp
        if not any(v in j.legs for v in comp):
            return False
    return True


def stu_expand(j: JacobiDiagram2, schedule="first") -> DiagramVector:
    """Expand a Jacobi diagram into chord diagrams by repeated STU.

    ``schedule`` picks which (vertex, leg) pair to use at each step:
    ``"first"``, ``"last"``, an integer seed for a random choice, or a
    callable receiving the candidate list.
    """
    if not _components_touch_strands(j):
        raise UnsupportedInputError("a component of the diagram does not reach a strand")
    if callable(schedule):
        pick = schedule
    elif schedule == "first":
        pick = lambda c: c[0]
    elif schedule == "last":
        pick = lambda c: c[-1]
    elif isinstance(schedule, int):
        rng = random.Random(schedule)
        pick = lambda c: c[rng.randrange(len(c))]
    else:
        raise MalformedInputError(f"unknown schedule {schedule!r}")
    out = DiagramVector(j.degree)
    todo = [(1, j)]
    while todo:
        c, d = todo.pop()
        cands = d.stu_candidates()
        if not cands:
            out.add(d.to_chord_key(), c)
            continue
        t, leg = pick(cands)
        for sign, e in d.stu(t, leg):
            todo.append((c * sign, e))
    return out


def tree_jacobi(labels: Sequence[int]) -> JacobiDiagram2:
    """Linear tree whose leaves, in order, end on the strands ``labels``.

    Interior node ``m`` carries the cyclic order (left, leaf, right); legs
    on a strand are stacked upward in tree order.
    """
    k = len(labels)
    if k < 3:
        raise MalformedInputError("a tree diagram needs at least three leaves")
    legs, nbrs = {}, {}
    height = {1: 0, 2: 0}
    for i, s in enumerate(labels):
        if s not in (1, 2):
            raise OutOfRangeError(f"strand label {s} outside 1..2")
        height[s] += 1
        legs[("l", i)] = (s, (height[s],))
    nodes = [("t", m) for m in range(1, k - 1)]
    for m, t in enumerate(nodes, start=1):
        left = ("l", 0) if m == 1 else nodes[m - 2]
        right = ("l", k - 1) if m == k - 2 else nodes[m]
        nbrs[t] = [left, ("l", m), right]
        nbrs[("l", m)] = [t]
    nbrs[("l", 0)] = [nodes[0]]
    nbrs[("l", k - 1)] = [nodes[-1]]
    return JacobiDiagram2(legs, nbrs)


def load_jacobi(text: str) -> JacobiDiagram2:
    """Read the text form::

        leg a 1 1        # leg id, strand, height
        vertex u a b v   # trivalent vertex and its cyclic neighbours
        chord a b        # edge between two legs
    """
    legs, nbrs = {}, {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        kind, *rest = line
        try:
            if kind == "leg":
                v, s, h = rest
                legs[v] = (int(s), (int(h),))
                nbrs.setdefault(v, [])
            elif kind == "vertex":
                v, a, b, c = rest
                nbrs[v] = [a, b, c]
            elif kind == "chord":
                a, b = rest
                nbrs.setdefault(a, []).append(b)
                nbrs.setdefault(b, []).append(a)
            else:
                raise MalformedInputError(f"unknown line {raw!r}")
        except ValueError as exc:
            if isinstance(exc, MalformedInputError):
                raise
            raise MalformedInputError(f"bad line {raw!r}") from None
    for v, ns in list(nbrs.items()):
        if v in legs:
            continue
        for u in ns:
            if u in legs and v not in nbrs[u]:
                nbrs[u].append(v)
    return JacobiDiagram2(legs, nbrs)


# ------------------------------------------------------------ relations

@dataclass(frozen=True)
class SelfChordBound:
    """Keep only diagrams with at most ``m1`` chords on strand 1 and
    ``m2`` on strand 2 (both ends on that strand).  Adding a chord never
    lowers these counts, so the kept set is closed under deleting chords."""

    m1: int
    m2: int

    def __call__(self, key: Key) -> bool:
        c11, _, c22 = chord_types(key)
        return c11 <= self.m1 and c22 <= self.m2

    def __str__(self) -> str:
        return f"self chords <= ({self.m1},{self.m2})"


def _place(w1, w2, extra) -> Key:
    # strand elements sit at 4i+4; extra items are (strand, position, label)
    strands = {1: [(4 * i + 4, c) for i, c in enumerate(w1)],
               2: [(4 * i + 4, c) for i, c in enumerate(w2)]}
    for s, p, c in extra:
        strands[s].append((p, c))
    return canonical([c for _, c in sorted(strands[1])], [c for _, c in sorted(strands[2])])


def _endpoints(key: Key) -> dict:
    ends: dict = {}
    for s, w in ((1, key[0]), (2, key[1])):
        for i, c in enumerate(w):
            ends.setdefault(c, []).append((s, i))
    return ends


def four_term_relations(parent: Key) -> Iterator[list[tuple[Key, int]]]:
    """4T relations obtained by adding one chord ``z`` to ``parent``.

    For a chord ``c = (x, y)`` of the parent and a gap ``g`` holding the
    fixed end of ``z``:  D(z at x+) - D(z at x-) + D(z at y+) - D(z at y-).
    """
    w1, w2 = parent
    z = -1
    ends = _endpoints(parent)
    gaps = [(1, 4 * g + 2) for g in range(len(w1) + 1)] + \
           [(2, 4 * g + 2) for g in range(len(w2) + 1)]
    for c, (x, y) in sorted(ends.items()):
        for gs, gp in gaps:
            rel: dict = {}
            for (s, i), sign in ((x, 1), (y, 1)):
                base = 4 * i + 4
                for off, sg in ((1, sign), (-1, -sign)):
                    key = _place(w1, w2, [(gs, gp, z), (s, base + off, z)])
                    rel[key] = rel.get(key, 0) + sg
            yield [(k, v) for k, v in rel.items() if v]


def _gap_multisets(key: Key, legs: int):
    w1, w2 = key
    gaps = [(1, g) for g in range(len(w1) + 1)] + [(2, g) for g in range(len(w2) + 1)]
    return itertools.combinations_with_replacement(gaps, legs)


def stu_relations(k: int) -> Iterator[list[tuple[Key, int]]]:
    """Relations from a single tripod added to a degree ``k-2`` diagram.

    The tripod's STU expansions through each of its three legs must agree;
    the differences are relations.  Built with :func:`stu_expand`, this is
    an independent derivation of the four-term relation.
    """
    for parent in basis(k - 2):
        w1, w2 = parent
        for spots in _gap_multisets(parent, 3):
            for order in set(itertools.permutations(range(3))):
                legs, nbrs = {}, {}
                count: dict = {}
                for s, w in ((1, w1), (2, w2)):
                    for i, c in enumerate(w):
                        legs[("c", s, i)] = (s, (4 * i + 4,))
                ends = _endpoints(parent)
                for c, ((s, i), (t, j)) in ends.items():
                    nbrs[("c", s, i)] = [("c", t, j)]
                    nbrs[("c", t, j)] = [("c", s, i)]
                for leg_no, (s, g) in zip(order, spots):
                    n = count.get((s, g), 0)
                    count[(s, g)] = n + 1
                    legs[("y", leg_no)] = (s, (4 * g + 2, n))
                    nbrs[("y", leg_no)] = ["T"]
                nbrs["T"] = [("y", 0), ("y", 1), ("y", 2)]
                j = JacobiDiagram2(legs, nbrs)
                exps = []
                for leg_no in range(3):
                    exps.append(stu_expand(j, schedule=lambda c, L=("y", leg_no): ("T", L)))
                for e in exps[1:]:
                    d = e - exps[0]
                    if d.terms:
                        yield [(key, int(c)) for key, c in d.terms.items()]


def relation_rows(k: int, keep: Callable[[Key], bool] | None = None,
                  ) -> Iterator[list[tuple[Key, int]]]:
    """4T relations of degree ``k`` with FI-zero and dropped columns removed.

    ``keep`` must be closed under deleting chords (like
    :class:`SelfChordBound`); parents it rejects are skipped entirely.
    """
    for parent in basis(k - 1, keep):
        for rel in four_term_relations(parent):
            row = [(key, c) for key, c in rel
                   if not has_isolated_chord(key) and (keep is None or keep(key))]
            if row:
                yield row


# ------------------------------------------------------------ elimination

class SparseEchelon:
    """Incremental row echelon form over GF(p), or over Q when ``p`` is None.

    Rows are dicts ``column -> value``; the pivot of a row is its smallest
    column.  Only leading terms are reduced, which suffices for rank and
    membership.
    """

    def __init__(self, p: int | None = None, max_rows: int | None = None):
        self.p = p
        self.pivots: dict[int, dict] = {}
        self.max_rows = max_rows

    def _normalize(self, row: dict) -> dict:
        if self.p is None:
            return {c: Fraction(v) for c, v in row.items() if v}
        return {c: v % self.p for c, v in row.items() if v % self.p}

    def reduce(self, row: dict) -> dict:
        p = self.p
        row = self._normalize(row)
        piv = self.pivots
        while row:
            c = min(row)
            prow = piv.get(c)
            if prow is None:
                return row
            f = row[c]
            for col, val in prow.items():
                nv = row.get(col, 0) - f * val
                if p is not None:
                    nv %= p
                if nv:
                    row[col] = nv
                else:
                    row.pop(col, None)
        return row

    def add(self, row: dict) -> bool:
        r = self.reduce(row)
        if not r:
            return False
        c = min(r)
        inv = (1 / r[c]) if self.p is None else pow(r[c], -1, self.p)
        if self.p is None:
            r = {k: v * inv for k, v in r.items()}
        else:
            r = {k: v * inv % self.p for k, v in r.items()}
        self.pivots[c] = r
        if self.max_rows is not None and len(self.pivots) > self.max_rows:
            raise ResourceLimitError(f"echelon form exceeded {self.max_rows} rows")
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)


class RelationReducer:
    """Row space of a relation list, absorbing short rows first.

    One-term rows kill a column and two-term rows identify two columns up
    to a scalar; both are handled by a union-find with multipliers
    (``x = f * parent(x)``).  Longer rows are rewritten in terms of class
    representatives until no new short rows appear, and what remains goes
    to a :class:`SparseEchelon`.  The row space is unchanged throughout.
    """

    def __init__(self, p: int | None = None, max_rows: int | None = None):
        self.p = p
        self.parent: dict[int, tuple[int, object]] = {}
        self.dead: set[int] = set()
        self.long: list[dict] = []
        self.max_rows = max_rows
        self.echelon: SparseEchelon | None = None
        self.columns: set[int] = set()

    def _one(self):
        return 1 if self.p is not None else Fraction(1)

    def _mul(self, a, b):
        return a * b % self.p if self.p is not None else a * b

    def _div(self, a, b):
        if self.p is None:
            return Fraction(a) / b
        return a * pow(b, -1, self.p) % self.p

    def find(self, x: int):
        """(root, f) with x = f * root; root is None when x is zero."""
        path = []
        f = self._one()
        y = x
        while y in self.parent:
            nxt, g = self.parent[y]
            path.append((y, f))
            f = self._mul(f, g)
            y = nxt
        root = None if y in self.dead else y
        # path compression
        for node, pre in path:
            self.parent[node] = (y, self._div(f, pre))
        return root, f

    def _express(self, row: dict) -> dict:
        out: dict = {}
        for col, c in row.items():
            root, f = self.find(col)
            if root is None:
                continue
            v = out.get(root, 0) + self._mul(c, f)
            if self.p is not None:
                v %= self.p
            if v:
                out[root] = v
            else:
                out.pop(root, None)
        return out

    def _absorb(self, row: dict) -> bool:
        """Apply a row of length <= 2 (already in root terms)."""
        if len(row) == 1:
            (x,) = row
            self.dead.add(x)
            return True
        (x, a), (y, b) = row.items()
        # a x + b y = 0  ->  x = (-b/a) y
        neg = (-b) % self.p if self.p is not None else -b
        self.parent[x] = (y, self._div(neg, a))
        return True

    def add(self, row: dict) -> None:
        self.columns.update(row)
        r = self._express(row)
        if not r:
            return
        if len(r) <= 2:
            self._absorb(r)
        else:
            self.long.append(r)
            if self.max_rows is not None and len(self.long) > self.max_rows:
                raise ResourceLimitError(f"more than {self.max_rows} stored relation rows")

    def settle(self) -> SparseEchelon:
        """Propagate short rows to a fixed point and eliminate the rest."""
        changed = True
        rows = self.long
        while changed:
            changed = False
            keep = []
            for r in rows:
                r = self._express(r)
                if not r:
                    continue
                if len(r) <= 2:
                    self._absorb(r)
                    changed = True
                else:
                    keep.append(r)
            rows = keep
        self.long = rows
        ech = SparseEchelon(self.p, self.max_rows)
        for r in rows:
            ech.add(self._express(r))
        self.echelon = ech
        return ech

    def rank(self) -> int:
        if self.echelon is None:
            self.settle()
        free = sum(1 for c in self.columns if c not in self.parent and c not in self.dead)
        return len(self.columns) - free + self.echelon.rank

    def contains(self, vec: dict) -> bool:
        if self.echelon is None:
            self.settle()
        r = self._express(vec)
        return not self.echelon.reduce(r)


def dense_rank_mod(rows: Sequence[Sequence[tuple[int, int]]], ncols: int, p: int) -> int:
    """Rank of a sparse row list over GF(p) by dense numpy elimination."""
    if p >= 2 ** 31:
        raise OutOfRangeError("prime must be below 2**31 for int64 arithmetic")
    M = np.zeros((len(rows), ncols), dtype=np.int64)
    for r, row in enumerate(rows):
        for c, v in row:
            M[r, c] = (M[r, c] + v) % p
    rank = 0
    nrows = M.shape[0]
    for c in range(ncols):
        if rank == nrows:
            break
        nz = np.flatnonzero(M[rank:, c])
        if nz.size == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            M[[rank, piv]] = M[[piv, rank]]
        inv = pow(int(M[rank, c]), -1, p)
        M[rank] = M[rank] * inv % p
        below = np.flatnonzero(M[rank + 1:, c]) + rank + 1
        if below.size:
            f = M[below, c][:, None]
            M[below] = (M[below] - f * M[rank][None, :]) % p
        rank += 1
    return rank


def _index(keys: Iterable[Key]) -> dict[Key, int]:
    return {k: i for i, k in enumerate(keys)}


def dimension(k: int, p: int | None = None) -> int:
    """dim A_k(2) by sparse elimination of FI + 4T (exact when ``p`` is None)."""
    if k == 0:
        return 1
    cols = [key for key in basis(k) if not has_isolated_chord(key)]
    idx = _index(cols)
    red = RelationReducer(p)
    for row in relation_rows(k):
        red.add({idx[key]: c for key, c in row})
    return len(cols) - red.rank()


def dimension_dense(k: int, p: int = DEFAULT_PRIMES[0]) -> int:
    """dim A_k(2) from STU-derived relations, FI as unit rows, dense rank mod p."""
    if k == 0:
        return 1
    cols = basis(k)
    idx = _index(cols)
    rows = [[(idx[key], 1)] for key in cols if has_isolated_chord(key)]
    if k >= 2:
        rows += [[(idx[key], c) for key, c in rel] for rel in stu_relations(k)]
    return len(cols) - dense_rank_mod(rows, len(cols), p)


# ------------------------------------------------------------ loop grading
#
# A connected diagram is nonzero in A(2) iff its preimage under the
# symmetrisation map is nonzero among uni-trivalent diagrams with legs
# coloured by strand, modulo AS and IHX.  Those relations keep the number
# of loops, so each loop degree can be tested on its own.  Trees map to
# H (x) Lie by choosing a root leg; one-loop graphs map to cyclic words
# modulo rotation and reversal with sign (-1)^legs.  Both maps kill AS and
# IHX, so a nonzero image certifies a nonzero element.

class LegGraph:
    """Uni-trivalent graph stored by half edges.

    ``slots[v][i] = (u, j)`` joins slot ``i`` of ``v`` to slot ``j`` of
    ``u``; trivalent slots are in cyclic order.  ``legs[v] = (strand, pos)``.
    Half edges keep multiple edges apart.
    """

    __slots__ = ("slots", "legs")

    def __init__(self, slots: dict, legs: dict):
        self.slots = {v: list(s) for v, s in slots.items()}
        self.legs = dict(legs)

    @classmethod
    def from_jacobi(cls, j: JacobiDiagram2) -> "LegGraph":
        slots = {v: [None] * len(ns) for v, ns in j.nbrs.items()}
        for v, ns in j.nbrs.items():
            for i, u in enumerate(ns):
                if slots[v][i] is not None:
                    continue
                for k, w in enumerate(j.nbrs[u]):
                    if w == v and slots[u][k] is None and (u, k) != (v, i):
                        slots[v][i], slots[u][k] = (u, k), (v, i)
                        break
        return cls(slots, {v: (s, tuple(p)) for v, (s, p) in j.legs.items()})

    def to_jacobi(self) -> JacobiDiagram2:
        return JacobiDiagram2(self.legs, {v: [u for u, _ in s] for v, s in self.slots.items()})

    def copy(self) -> "LegGraph":
        return LegGraph(self.slots, self.legs)

    def strand_order(self, s: int) -> list:
        return [v for v, _ in sorted(((v, p) for v, (t, p) in self.legs.items() if t == s),
                                     key=lambda item: item[1])]

    def loops(self) -> int:
        edges = sum(len(s) for s in self.slots.values()) // 2
        return edges - len(self.slots) + 1

    def merge(self, x, y, tag) -> "LegGraph":
        """``D(x below y) - D(y below x)`` for legs ``x``, ``y`` adjacent on a strand.

        The two legs become one leg at the old place of ``x`` on a new
        vertex with cyclic order (new leg, end of x, end of y).
        """
        g = self.copy()
        (X, i), (Y, j) = g.slots[x][0], g.slots[y][0]
        t, leg = ("m", tag), ("ml", tag)
        pos = g.legs[x]
        for v in (x, y):
            del g.slots[v], g.legs[v]
        g.slots[t] = [(leg, 0), (X, i), (Y, j)]
        g.slots[leg] = [(t, 0)]
        g.legs[leg] = pos
        g.slots[X][i] = (t, 1)
        g.slots[Y][j] = (t, 2)
        return g


def _union_below(lo: LegGraph, hi: LegGraph) -> LegGraph:
    top = {1: 0, 2: 0}
    for s, p in lo.legs.values():
        top[s] = max(top[s], p[0])
    slots, legs = {}, {}
    for tag, g in (("a", lo), ("b", hi)):
        for v, sl in g.slots.items():
            slots[(tag, v)] = [((tag, u), j) for u, j in sl]
        for v, (s, p) in g.legs.items():
            legs[(tag, v)] = (s, p if tag == "a" else (p[0] + top[s] + 1,) + p[1:])
    return LegGraph(slots, legs)


def commutator_graphs(u: JacobiDiagram2, v: JacobiDiagram2) -> list[LegGraph]:
    """Connected graphs summing to ``u v - v u`` in A(2).

    The legs of ``v`` are moved below those of ``u`` by adjacent swaps;
    each swap contributes the merged graph.
    """
    g = _union_below(LegGraph.from_jacobi(u), LegGraph.from_jacobi(v))
    out = []
    for s in (1, 2):
        cur = g.strand_order(s)
        for k in range(len(cur)):
            for m in range(len(cur) - 1 - k):
                x, y = cur[m], cur[m + 1]
                if x[0] == "a" and y[0] == "b":
                    out.append(g.merge(x, y, len(out)))
                    cur[m], cur[m + 1] = y, x
                    g.legs[x], g.legs[y] = g.legs[y], g.legs[x]
    return out


def _padd(a: dict, b: dict, scale=1) -> dict:
    out = dict(a)
    for w, c in b.items():
        out[w] = out.get(w, 0) + scale * c
    return {w: c for w, c in out.items() if c}


def _pmul(a: dict, b: dict) -> dict:
    out: dict = {}
    for w1, c1 in a.items():
        for w2, c2 in b.items():
            out[w1 + w2] = out.get(w1 + w2, 0) + c1 * c2
    return {w: c for w, c in out.items() if c}


def _lie(g: LegGraph, v, ps: int) -> dict:
    # bracket polynomial of the branch at v entered through slot ps
    if v in g.legs:
        return {(g.legs[v][0],): 1}
    sl = g.slots[v]
    a, b = sl[(ps + 1) % 3], sl[(ps + 2) % 3]
    A, B = _lie(g, *a), _lie(g, *b)
    return _padd(_pmul(A, B), _pmul(B, A), -1)


def tree_image(g: LegGraph) -> dict:
    """Sum over root legs of ``colour (x) bracket word`` for a tree."""
    if g.loops() != 0:
        raise UnsupportedInputError("tree_image needs a tree")
    out: dict = {}
    for r in g.legs:
        for w, c in _lie(g, *g.slots[r][0]).items():
            key = (g.legs[r][0],) + w
            out[key] = out.get(key, 0) + c
    return {w: c for w, c in out.items() if c}


def cyclic_word(w: tuple) -> tuple[tuple, int] | None:
    """Representative and sign of ``w`` modulo rotation and reversal with
    sign (-1)^len; None when the class is zero."""
    n = len(w)
    best, signs = None, set()
    for sign, base in ((1, w), ((-1) ** n, w[::-1])):
        for k in range(n):
            r = base[k:] + base[:k]
            if best is None or r < best:
                best, signs = r, {sign}
            elif r == best:
                signs.add(sign)
    if len(signs) > 1:
        return None
    return best, signs.pop()


def loop_image(g: LegGraph) -> dict:
    """Cyclic-word image of a one-loop graph."""
    if g.loops() != 1:
        raise UnsupportedInputError("loop_image needs exactly one loop")
    deg = {v: len(s) for v, s in g.slots.items()}
    cyc = set(g.slots)
    todo = [v for v in cyc if deg[v] == 1]
    while todo:
        v = todo.pop()
        cyc.discard(v)
        for u, _ in g.slots[v]:
            if u in cyc:
                deg[u] -= 1
                if deg[u] == 1:
                    todo.append(u)
    start = min(cyc, key=repr)
    out_slot = next(i for i, (u, _) in enumerate(g.slots[start]) if u in cyc)
    walk = []
    v, nxt = start, out_slot
    while True:
        u, j = g.slots[v][nxt]
        k = next(k for k, (w, _) in enumerate(g.slots[u]) if w in cyc and k != j)
        walk.append((u, j, k))
        if u == start:
            break
        v, nxt = u, k
    sign, prod = 1, {(): 1}
    for u, p, q in walk:
        sign *= 1 if (q - p) % 3 == 1 else -1
        prod = _pmul(prod, _lie(g, *g.slots[u][3 - p - q]))
    out: dict = {}
    for w, c in prod.items():
        rep = cyclic_word(w)
        if rep is not None:
            out[rep[0]] = out.get(rep[0], 0) + sign * rep[1] * c
    return {w: c for w, c in out.items() if c}


def graded_parts(graphs: Iterable[tuple[object, LegGraph]]) -> tuple[dict, dict]:
    """Tree and one-loop parts of a sum of connected trees with ordered legs.

    A tree equals its symmetrisation plus half the sum of its merges over
    all pairs of legs on a common strand, up to two loops.
    """
    tree: dict = {}
    loop: dict = {}
    tag = itertools.count()
    for c, g in graphs:
        tree = _padd(tree, tree_image(g), c)
        for s in (1, 2):
            for x, y in itertools.combinations(g.strand_order(s), 2):
                loop = _padd(loop, loop_image(g.merge(x, y, ("p", next(tag)))), Fraction(c) / 2)
    return tree, loop


# ------------------------------------------------------------ membership

@dataclass
class MembershipCertificate:
    member: bool
    degree: int
    method: str                    # "exact", "modular" or "graded"
    primes: tuple[int, ...] = ()
    bound: str = "none"
    rank: int = 0
    columns: int = 0
    note: str = ""

    def __bool__(self) -> bool:
        return self.member

    def summary(self) -> str:
        verdict = "in span" if self.member else "NOT in span"
        if self.method == "graded":
            verdict = "no witness" if self.member else "nonzero"
            return (f"degree {self.degree}: {verdict} over Q by loop grading of "
                    f"{self.columns} connected trees; {self.note}")
        where = f" mod {', '.join(map(str, self.primes))}" if self.primes else " over Q"
        return (f"degree {self.degree}: {verdict}{where}; quotient {self.bound}; "
                f"relation rank {self.rank} on {self.columns} columns. {self.note}").strip()


def _membership_one(v: DiagramVector, keep, p: int | None, max_rows=None):
    k = v.degree
    target = {key: c for key, c in v.terms.items()
              if not has_isolated_chord(key) and (keep is None or keep(key))}
    if not target:
        return True, 0, 0
    # columns are numbered in order of first appearance
    cols: dict[Key, int] = {}
    red = RelationReducer(p, max_rows)
    for row in relation_rows(k, keep):
        r = {}
        for key, c in row:
            i = cols.get(key)
            if i is None:
                i = cols[key] = len(cols)
            r[i] = c
        red.add(r)
    for key in target:
        if key not in cols:
            return False, red.rank(), len(cols)
    if p is None:
        t = {cols[key]: c for key, c in target.items()}
    else:
        t = {cols[key]: (c.numerator * pow(c.denominator, -1, p)) % p for key, c in target.items()}
    return red.contains(t), red.rank(), len(cols)


def in_relation_span(v: DiagramVector, primes: Sequence[int] | None = None, exact: bool | None = None,
                     bound: SelfChordBound | None = None,
                     max_rows: int | None = None) -> MembershipCertificate:
    """Decide whether ``v`` lies in the FI + 4T span of its degree.

    Degrees up to 5 are decided exactly over Q unless ``primes`` are given.
    Otherwise elimination runs modulo each prime.  With a ``bound`` the
    check runs in the quotient that also kills diagrams outside the bound,
    so only a negative answer is conclusive for the full span.
    """
    k = v.degree
    if any((len(a) + len(b)) != 2 * k for a, b in v.terms):
        raise OutOfRangeError("inhomogeneous vector")
    if exact is None:
        exact = k <= 5 and not primes
    bstr = str(bound) if bound else "none"
    if exact:
        member, rank, ncols = _membership_one(v, bound, None, max_rows)
        note = "" if member or bound is None else "quotient non-membership implies non-membership"
        if member and bound is not None:
            note = "membership in a quotient is inconclusive for the full span"
        return MembershipCertificate(member, k, "exact", (), bstr, rank, ncols, note)
    primes = tuple(primes or DEFAULT_PRIMES)
    if len(set(primes)) < len(primes):
        raise MalformedInputError("primes must be distinct")
    results = []
    rank = ncols = 0
    for p in primes:
        member, rank, ncols = _membership_one(v, bound, p, max_rows)
        results.append(member)
    member = all(results)
    note = ("outside the span mod every listed prime; a rational solution would "
            "survive reduction mod any prime not dividing its denominators")
    if member:
        note = "in the span mod every listed prime"
        if bound is not None:
            note += "; membership in a quotient is inconclusive for the full span"
    elif not all(not r for r in results):
        note = f"primes disagree: {results}"
    return MembershipCertificate(member, k, "modular", primes, bstr, rank, ncols, note)


def commutator_check(u: JacobiDiagram2 | DiagramVector | None = None,
                     v: JacobiDiagram2 | DiagramVector | None = None,
                     primes: Sequence[int] | None = None, exact: bool = False,
                     bounds: Sequence[SelfChordBound] | None = None,
                     max_rows: int | None = None,
                     method: str = "auto") -> tuple[bool, MembershipCertificate]:
    """True when ``u v - v u`` is nonzero in A(2).

    Defaults to the degree 3 and 4 linear trees (1,2,2,1) and (1,2,2,2,1).
    With ``method`` "graded" (or "auto" on two Jacobi diagrams) the
    commutator is written as a sum of connected trees and its tree and
    one-loop parts are computed exactly; a nonzero part is a certificate.
    With "eliminate" (or when "auto" finds both parts zero) the quotients
    from ``bounds`` are tried in order; the first one in which the
    commutator survives certifies non-commutativity.
    """
    if method not in ("auto", "graded", "eliminate"):
        raise MalformedInputError(f"unknown method {method!r}")
    u = tree_jacobi((1, 2, 2, 1)) if u is None else u
    v = tree_jacobi((1, 2, 2, 2, 1)) if v is None else v
    jacobi = isinstance(u, JacobiDiagram2) and isinstance(v, JacobiDiagram2)
    if method == "graded" and not jacobi:
        raise UnsupportedInputError("the graded certificate needs two Jacobi diagrams")
    if method != "eliminate" and jacobi:
        cert = graded_certificate(u, v)
        if not cert.member or method == "graded":
            return not cert.member, cert
    if isinstance(u, JacobiDiagram2):
        u = stu_expand(u)
    if isinstance(v, JacobiDiagram2):
        v = stu_expand(v)
    c = commutator(u, v)
    if bounds is None:
        bounds = [SelfChordBound(1, 1), SelfChordBound(2, 2), None]
    cert = None
    for b in bounds:
        cert = in_relation_span(c, primes=None if exact else primes, exact=exact,
                                bound=b, max_rows=max_rows)
        if not cert.member:
            return True, cert
    return False, cert


def graded_certificate(u: JacobiDiagram2, v: JacobiDiagram2) -> MembershipCertificate:
    """Exact tree and one-loop parts of ``u v - v u`` for connected ``u``, ``v``.

    ``member`` is False when either part is nonzero, which proves the
    commutator is nonzero.  Both parts zero leaves the question open.
    """
    for j in (u, v):
        if not _components_touch_strands(j) or LegGraph.from_jacobi(j).loops() != 0:
            raise UnsupportedInputError("the graded certificate needs two trees")
    graphs = commutator_graphs(u, v)
    tree, loop = graded_parts((1, g) for g in graphs)
    k = u.degree + v.degree
    if tree:
        note = f"tree part has {len(tree)} nonzero coefficients"
    elif loop:
        terms = " ".join(f"{'+' if c > 0 else '-'}{abs(c)}*w({''.join(map(str, w))})" for w, c in sorted(loop.items()))
        note = f"tree part zero; one-loop part {terms}"
    else:
        note = "tree and one-loop parts vanish; inconclusive"
    member = not tree and not loop
    return MembershipCertificate(member, k, "graded", (), "none", 0, len(graphs), note)
