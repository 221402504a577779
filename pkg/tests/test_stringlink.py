import random

import pytest
from hypothesis import given, strategies as st

from stringlinks.errors import (InsufficientClassError, MalformedInputError, OutOfRangeError,
                                RankMismatchError, ResourceLimitError)
from stringlinks.freegroup import FreeWord
from stringlinks.magnus import expand
from stringlinks.stringlink import (MorseWord, artin_longitudes, braid_permutation,
                                    chen_milnor, concordance_inverse, diagram, format_braid,
                                    from_braid, linking_number, longitude_series, milnor_mu,
                                    parse_braid, parse_morse, series_longitudes, stack,
                                    trivial, wirtinger)

BORROMEAN = "s1 s1 s2 s2 S1 S1 S2 S2"


def random_pure_braid(rng, n, length):
    while True:
        b = [rng.choice((1, -1)) * rng.randint(1, n - 1) for _ in range(rng.randint(0, length))]
        if braid_permutation(b, n) == list(range(1, n + 1)):
            return b


def test_full_twist_clasp_longitudes():
    L = from_braid("s1 s1", 2)
    lon = chen_milnor(L, 3)
    assert str(lon.longitudes[0]) == "x1 x2 x1'"
    assert str(lon.longitudes[1]) == "x1"
    assert milnor_mu(L, "12") == milnor_mu(L, "21") == 1
    assert linking_number(L, 1, 2) == linking_number(L, 2, 1) == 1


def test_borromean_triple_linking():
    L = from_braid(BORROMEAN, 3)
    lon = series_longitudes(L, 2)
    assert [lon.mu(i) for i in ("12", "13", "23")] == [0, 0, 0]
    # cyclic symmetry and sign under transposition
    vals = {i: lon.mu([int(c) for c in i]) for i in ("123", "231", "312", "132", "213", "321")}
    assert abs(vals["123"]) == 1
    assert vals["123"] == vals["231"] == vals["312"] == -vals["132"]


def test_wirtinger_relations_hold_in_the_nilpotent_quotient():
    L = from_braid(BORROMEAN, 3)
    D, pres = wirtinger(L)
    assert len(pres.relations) == len(D.crossings) == 8
    assert len(pres.relators()) == 8
    assert pres.meridians == [arcs[0] for arcs in D.strand_arcs]


def test_morse_round_trip_and_comments():
    text = "strands 2\n# clasp\nU2 X1 x1 A2\n"
    with pytest.raises(MalformedInputError):
        parse_morse(text)   # the cup/cap pair forms a separate closed loop
    L = parse_morse("strands 2\nX1 X1  # full twist\n")
    assert parse_morse(L.to_text()) == L


@pytest.mark.parametrize("text", [
    "strands 2\nX3",          # position out of range
    "strands 2\nQ1",          # unknown letter
    "strand 2\nX1",           # bad header
    "strands 2\nX1",          # strands swap ends
    "strands 1\nU1 A1",       # closed component
    "",
])
def test_malformed_morse(text):
    with pytest.raises(MalformedInputError):
        parse_morse(text)


def test_braid_parsing():
    assert parse_braid("s1 S2 s10") == [1, -2, 10]
    assert format_braid([1, -2]) == "s1 S2"
    with pytest.raises(MalformedInputError):
        parse_braid("t1")
    with pytest.raises(MalformedInputError):
        from_braid("s1", 2)
    with pytest.raises(OutOfRangeError):
        braid_permutation([3], 3)


def test_stack_and_inverse():
    L = from_braid("s1 s1", 2)
    assert stack(L, concordance_inverse(L)).crossing_count == 4
    assert milnor_mu(stack(L, concordance_inverse(L)), "12") == 0
    with pytest.raises(RankMismatchError):
        stack(L, trivial(3))


def test_index_validation_and_class():
    L = from_braid(BORROMEAN, 3)
    with pytest.raises(OutOfRangeError):
        milnor_mu(L, "1")
    with pytest.raises(OutOfRangeError):
        milnor_mu(L, "14")
    lon = chen_milnor(L, 2)
    with pytest.raises(InsufficientClassError):
        lon.mu((1, 2, 3))
    with pytest.raises(InsufficientClassError):
        series_longitudes(L, 4, q=3)


def test_word_back_end_budget():
    L = from_braid(BORROMEAN + " " + BORROMEAN, 3)
    with pytest.raises(ResourceLimitError):
        chen_milnor(L, 8, max_word_length=20)
    auto = longitude_series(L, 1, 4, method="auto", word_threshold=20)
    assert auto == longitude_series(L, 1, 4, method="series")


def test_linking_matches_mu_of_length_two():
    rng = random.Random(3)
    for _ in range(20):
        b = random_pure_braid(rng, 3, 10)
        L = from_braid(b, 3)
        lon = series_longitudes(L, 1)
        for i in range(1, 4):
            for j in range(1, 4):
                if i != j:
                    assert lon.mu((i, j)) == linking_number(L, i, j) == linking_number(L, j, i)


@given(st.integers(0, 10_000))
def test_word_and_series_back_ends_agree(seed):
    rng = random.Random(seed)
    n = rng.choice((2, 3))
    L = from_braid(random_pure_braid(rng, n, 10), n)
    words = chen_milnor(L, 4)
    series = series_longitudes(L, 3)
    for i in range(1, n + 1):
        assert words.series(i, 3) == series.series(i, 3)


@given(st.integers(0, 10_000))
def test_chen_milnor_matches_artin_action(seed):
    rng = random.Random(seed)
    n = rng.choice((2, 3))
    b = random_pure_braid(rng, n, 12)
    cm = chen_milnor(from_braid(b, n), 5)
    art = artin_longitudes(b, n)
    for i in range(n):
        assert expand(cm.longitudes[i], n, 4) == expand(art[i], n, 4)


@given(st.integers(0, 10_000))
def test_concordance_inverse_negates_first_nonvanishing_mu(seed):
    rng = random.Random(seed)
    L = from_braid(random_pure_braid(rng, 2, 10), 2)
    Li = concordance_inverse(L)
    assert milnor_mu(Li, "12") == -milnor_mu(L, "12")
    P = stack(L, Li)
    lon = series_longitudes(P, 3)
    assert all(not c for m, c in lon.series(1, 3).terms.items() if m)


def test_diagram_arcs_cover_strands():
    L = from_braid("s1 s2 s2 s1 s1 s1", 3)
    D = diagram(L)
    assert sum(len(a) for a in D.strand_arcs) == D.arc_count
    assert {c.sign for c in D.crossings} == {1}
