import math
import random

import pytest
from hypothesis import given, strategies as st

from stringlinks.cli import fixture_text
from stringlinks.diagalg import (ChordDiagram2, DiagramVector, JacobiDiagram2, LegGraph,
                                 SelfChordBound, SparseEchelon, basis, chord_types, commutator,
                                 commutator_check, commutator_graphs, cyclic_word, dense_rank_mod,
                                 dimension, dimension_dense, four_term_relations, graded_certificate,
                                 graded_parts, has_isolated_chord, in_relation_span, load_jacobi,
                                 loop_image, stack_product, stu_expand, tree_image, tree_jacobi)
from stringlinks.errors import MalformedInputError, OutOfRangeError, UnsupportedInputError

CROSS = ((0,), (0,))        # one chord joining the strands


def vec(degree, *pairs):
    return DiagramVector.from_terms(degree, pairs)


def random_vector(rng, k, size=3):
    keys = basis(k)
    return DiagramVector.from_terms(k, [(rng.choice(keys), rng.randint(-3, 3)) for _ in range(size)])


def two_vertex_diagram(legs, u, v):
    nbrs = {"u": u, "v": v}
    for t in "uv":
        for x in nbrs[t]:
            if x in legs:
                nbrs[x] = [t]
    return JacobiDiagram2(legs, nbrs)


def random_tree(rng, max_degree=4):
    """Linear tree with random leaves and random cyclic orders."""
    leaves = rng.randint(3, max_degree + 1)
    j = tree_jacobi([rng.choice((1, 2)) for _ in range(leaves)])
    for t in j.trivalent():
        if rng.random() < 0.5:
            j = j.reversed_at(t)
    return j


# ------------------------------------------------------------ chord diagrams

def test_basis_sizes():
    for k in range(1, 5):
        assert len(basis(k)) == (2 * k + 1) * math.prod(range(1, 2 * k, 2))
        assert len(set(basis(k))) == len(basis(k))


def test_text_round_trip():
    for key in basis(3):
        d = ChordDiagram2(*key)
        assert ChordDiagram2.parse(d.to_text()) == d
    assert ChordDiagram2(*CROSS).to_text() == "strand1: 1  strand2: 1  chords: (s1:1,s2:1)"


@pytest.mark.parametrize("text", [
    "strand1: 2  strand2: 0  chords: (s1:1,s1:1)",
    "strand1: 1  strand2: 1  chords:",
    "strands: 2",
])
def test_text_rejects(text):
    with pytest.raises(MalformedInputError):
        ChordDiagram2.parse(text)


def test_noncanonical_words_rejected():
    with pytest.raises(MalformedInputError):
        ChordDiagram2((1, 0), (0, 1))


def test_chord_types_and_fi():
    assert chord_types(((0, 0, 1), (1,))) == (1, 1, 0)
    assert has_isolated_chord(((0, 0), ()))
    assert not has_isolated_chord(((0, 1, 0, 1), ()))


def test_four_term_relators_killed_by_chord_type_functionals():
    # each half of a relator is a difference of diagrams with equal chord types
    for parent in basis(2):
        for rel in four_term_relations(parent):
            assert sum(c for _, c in rel) == 0
            assert sum(c * chord_types(key)[1] for key, c in rel) == 0


# ------------------------------------------------------------ products

def test_unit_and_degree_additivity():
    rng = random.Random(1)
    v = random_vector(rng, 2)
    assert stack_product(DiagramVector.unit(), v) == v
    assert stack_product(v, DiagramVector.unit()) == v
    H = stu_expand(tree_jacobi((1, 2, 2, 1)))
    S = stu_expand(tree_jacobi((1, 2, 2, 2, 1)))
    assert (H * S).degree == 7


@given(st.integers(0, 10_000))
def test_stack_product_associative_and_bilinear(seed):
    rng = random.Random(seed)
    a, b, c = (random_vector(rng, rng.randint(1, 2)) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    b2 = random_vector(rng, b.degree)
    assert a * (b + b2) == a * b + a * b2


def test_inhomogeneous_terms_rejected():
    with pytest.raises(OutOfRangeError):
        DiagramVector.from_terms(2, [(CROSS, 1)])


# ------------------------------------------------------------ Jacobi diagrams

def test_chord_diagram_expands_to_itself():
    legs = {"a": (1, (1,)), "b": (2, (1,))}
    j = JacobiDiagram2(legs, {"a": ["b"], "b": ["a"]})
    assert stu_expand(j) == vec(1, (CROSS, 1))


def test_tripod_gives_a_difference_of_two_diagrams():
    j = tree_jacobi((1, 2, 2))
    v = stu_expand(j)
    assert v.degree == 2 and sorted(v.terms.values()) == [-1, 1]


def test_fixtures_match_tree_builder():
    assert stu_expand(load_jacobi(fixture_text("D_H.jacobi"))) == stu_expand(tree_jacobi((1, 2, 2, 1)))
    assert stu_expand(load_jacobi(fixture_text("D_S.jacobi"))) == stu_expand(tree_jacobi((1, 2, 2, 2, 1)))


def test_jacobi_validation():
    with pytest.raises(MalformedInputError):
        load_jacobi("leg a 1 1\nleg b 1 1\nchord a b")
    with pytest.raises(MalformedInputError):
        load_jacobi("leg a 1 1\nvertex u a b c")
    with pytest.raises(MalformedInputError):
        load_jacobi("bogus line")


def test_floating_component_rejected():
    nbrs = {"a": ["b"], "b": ["a"], "p": ["q", "q", "q"], "q": ["p", "p", "p"]}
    j = JacobiDiagram2({"a": (1, (1,)), "b": (2, (1,))}, nbrs)
    with pytest.raises(UnsupportedInputError):
        stu_expand(j)


def test_unknown_schedule():
    with pytest.raises(MalformedInputError):
        stu_expand(tree_jacobi((1, 2, 1)), schedule="sideways")


# ------------------------------------------------------------ relations

def test_small_dimensions_sparse_exact_modular_dense():
    dims = [dimension(k) for k in range(4)]
    assert dims == [dimension(k, p=2147483629) for k in range(4)]
    assert dims == [dimension_dense(k) for k in range(4)]
    assert dims[1] == 1


def test_dense_rank():
    assert dense_rank_mod([[(0, 1), (1, 1)], [(0, 2), (1, 2)], [(1, 5)]], 2, 101) == 2
    with pytest.raises(OutOfRangeError):
        dense_rank_mod([], 1, 2 ** 31 + 11)


def test_sparse_echelon_exact_and_modular():
    for p in (None, 7):
        e = SparseEchelon(p)
        assert e.add({0: 1, 1: 2})
        assert not e.add({0: 2, 1: 4})
        assert e.add({1: 1})
        assert not e.reduce({0: 3, 1: 1})
        assert e.rank == 2


def test_membership_basics():
    assert in_relation_span(DiagramVector(3)).member
    for parent in basis(1)[:2]:
        for rel in four_term_relations(parent):
            assert in_relation_span(DiagramVector.from_terms(2, rel)).member
    assert not in_relation_span(vec(1, (CROSS, 1))).member
    assert in_relation_span(vec(1, (((0, 0), ()), 1))).member      # FI
    with pytest.raises(OutOfRangeError):
        in_relation_span(DiagramVector(2, {CROSS: 1}))


def test_modular_certificate_lists_primes():
    cert = in_relation_span(vec(2, (((0, 1), (0, 1)), 1)), primes=[101, 103, 107])
    assert not cert.member and cert.primes == (101, 103, 107) and cert.method == "modular"
    with pytest.raises(MalformedInputError):
        in_relation_span(vec(1, (CROSS, 1)), primes=[101, 101])


def test_bounded_quotient_only_certifies_non_membership():
    cert = in_relation_span(vec(2, (((0, 1), (0, 1)), 1)), bound=SelfChordBound(0, 0))
    assert not cert.member
    cert = in_relation_span(vec(2, (((0, 1, 0), (1,)), 1)), bound=SelfChordBound(0, 0))
    assert cert.member and "inconclusive" in cert.note


def test_commutators_vanish_in_low_degree():
    cross = vec(1, (CROSS, 1))
    assert in_relation_span(commutator(cross, cross)).member
    for key in basis(2):
        assert in_relation_span(commutator(cross, vec(2, (key, 1)))).member


def test_commutator_check_small_degree():
    differ, cert = commutator_check(tree_jacobi((1, 2, 1)), tree_jacobi((1, 2, 1)), exact=True,
                                    bounds=[None])
    assert not differ and cert.member


@given(st.integers(0, 10_000))
def test_stu_schedule_invariance(seed):
    rng = random.Random(seed)
    j = random_tree(rng)
    first = stu_expand(j, "first")
    for sched in ("last", seed):
        assert in_relation_span(first - stu_expand(j, sched)).member


@given(st.integers(0, 10_000))
def test_antisymmetry(seed):
    rng = random.Random(seed)
    j = random_tree(rng)
    t = rng.choice(j.trivalent())
    assert in_relation_span(stu_expand(j) + stu_expand(j.reversed_at(t), seed)).member


@given(st.lists(st.sampled_from([1, 2]), min_size=4, max_size=4), st.integers(0, 2))
def test_ihx(labels, extra):
    heights = {1: 0, 2: 0}
    legs = {}
    for name, s in zip("abcd", labels):
        heights[s] += 1
        legs[name] = (s, (heights[s],))
    if extra:
        # an extra chord below everything raises the degree
        legs["e"], legs["f"] = (1, (0,)), (extra, (-1,))
    base = {}
    if extra:
        base = {"e": ["f"], "f": ["e"]}
    def build(u, v):
        j = two_vertex_diagram({k: legs[k] for k in "abcd"}, u, v)
        if extra:
            j = JacobiDiagram2({**j.legs, "e": legs["e"], "f": legs["f"]}, {**j.nbrs, **base})
        return stu_expand(j)
    I = build(["b", "a", "v"], ["u", "c", "d"])
    H = build(["v", "a", "c"], ["b", "u", "d"])
    X = build(["v", "a", "d"], ["b", "u", "c"])
    assert in_relation_span(I - H + X).member


# ------------------------------------------------------------ loop grading

def swapped(g, x, y):
    h = g.copy()
    h.legs[x], h.legs[y] = g.legs[y], g.legs[x]
    return h


def test_leg_graph_round_trip():
    j = tree_jacobi((1, 2, 2, 2, 1))
    g = LegGraph.from_jacobi(j)
    assert g.loops() == 0
    assert stu_expand(g.to_jacobi()) == stu_expand(j)


@pytest.mark.parametrize("strand", [1, 2])
def test_merge_is_the_stu_difference(strand):
    g = LegGraph.from_jacobi(tree_jacobi((1, 2, 2, 1)))
    x, y = g.strand_order(strand)
    d = (stu_expand(g.to_jacobi()) - stu_expand(swapped(g, x, y).to_jacobi())
         - stu_expand(g.merge(x, y, 0).to_jacobi()))
    assert in_relation_span(d).member


def test_commutator_graphs_sum_to_commutator():
    u, v = tree_jacobi((1, 2, 1)), tree_jacobi((2, 1, 2))
    total = DiagramVector(4)
    for g in commutator_graphs(u, v):
        assert g.loops() == 0
        total = total + stu_expand(g.to_jacobi())
    assert in_relation_span(total - commutator(stu_expand(u), stu_expand(v))).member


def test_cyclic_words():
    assert cyclic_word((2, 1, 1, 2)) == ((1, 1, 2, 2), 1)
    assert cyclic_word((1, 2, 1, 2)) == ((1, 2, 1, 2), 1)
    # odd length: a word equal to its own reversal up to rotation is zero
    assert cyclic_word((2, 1, 1)) is None
    assert cyclic_word((1, 1, 2, 1, 2)) is None
    assert cyclic_word((2, 2, 2, 1, 1, 2, 1)) == ((1, 1, 2, 1, 2, 2, 2), 1)
    assert cyclic_word((2, 2, 2, 1, 2, 1, 1)) == ((1, 1, 2, 1, 2, 2, 2), -1)


def test_tree_image_antisymmetry():
    j = tree_jacobi((1, 2, 2, 1))
    t = j.trivalent()[0]
    a = tree_image(LegGraph.from_jacobi(j))
    b = tree_image(LegGraph.from_jacobi(j.reversed_at(t)))
    assert a and {w: -c for w, c in a.items()} == b


@given(st.integers(0, 10_000))
def test_loop_image_respects_orientation_and_names(seed):
    rng = random.Random(seed)
    g = LegGraph.from_jacobi(random_tree(rng, 5))
    s = rng.choice([s for s in (1, 2) if len(g.strand_order(s)) >= 2])
    x, y = rng.sample(g.strand_order(s), 2)
    u = g.merge(x, y, 0)
    base = loop_image(u)
    # renaming vertices moves the starting point of the walk
    names = {v: ("r", rng.random()) for v in u.slots}
    r = LegGraph({names[v]: [(names[w], j) for w, j in sl] for v, sl in u.slots.items()},
                 {names[v]: p for v, p in u.legs.items()})
    assert loop_image(r) == base
    # reversing a cyclic order negates
    t = ("m", 0)
    f = u.copy()
    f.slots[t] = f.slots[t][::-1]
    for k, (w, j) in enumerate(f.slots[t]):
        f.slots[w][j] = (t, k)
    assert loop_image(f) == {w: -c for w, c in base.items()}


@given(st.integers(0, 10_000))
def test_graded_parts_survive_leg_swaps(seed):
    # T = T_swap + U in A(2); the one-loop part must see the same identity
    rng = random.Random(seed)
    g = LegGraph.from_jacobi(random_tree(rng, 6))
    s = rng.choice([s for s in (1, 2) if len(g.strand_order(s)) >= 2])
    order = g.strand_order(s)
    k = rng.randrange(len(order) - 1)
    x, y = order[k], order[k + 1]
    t1, l1 = graded_parts([(1, g)])
    t2, l2 = graded_parts([(1, swapped(g, x, y))])
    lu = loop_image(g.merge(x, y, "u"))
    assert t1 == t2
    keys = set(l1) | set(l2) | set(lu)
    assert all(l1.get(w, 0) - l2.get(w, 0) - lu.get(w, 0) == 0 for w in keys)


@pytest.mark.parametrize("a,b", [((1, 2, 1), (1, 2, 2, 1)), ((1, 2, 1), (1, 2, 2, 2, 1)),
                                 ((1, 2, 2, 1), (2, 1, 1, 2)), ((1, 2, 1), (1, 2, 1, 2, 1))])
def test_graded_parts_vanish_below_degree_seven(a, b):
    cert = graded_certificate(tree_jacobi(a), tree_jacobi(b))
    assert cert.member and "inconclusive" in cert.note


def test_graded_certificate_for_tree_commutator():
    differ, cert = commutator_check(method="graded")
    assert differ and cert.method == "graded"
    assert "w(1121222)" in cert.note
    _, swapped_cert = commutator_check(tree_jacobi((1, 2, 2, 2, 1)), tree_jacobi((1, 2, 2, 1)),
                                       method="graded")
    assert "-2*w(1121222)" in swapped_cert.note and "+2*w(1121222)" in cert.note


def test_graded_needs_trees():
    with pytest.raises(UnsupportedInputError):
        commutator_check(stu_expand(tree_jacobi((1, 2, 1))), None, method="graded")
    with pytest.raises(MalformedInputError):
        commutator_check(method="guess")
