import json

import pytest
from hypothesis import given, strategies as st

from stringlinks.errors import MalformedInputError, OutOfRangeError, RankMismatchError
from stringlinks.freegroup import FreeWord
from stringlinks.magnus import (DenseSeries, TruncSeries, expand, format_series,
                                parse_series)

letters = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=10)


def test_inverse_generator_is_geometric_series():
    s = expand(FreeWord([-1], 2), 2, 4)
    assert format_series(s) == "1-X+XX-XXX+XXXX"


def test_commutator_expansion_starts_in_degree_two():
    s = expand(FreeWord([1, 2, -1, -2], 2), 2, 2)
    assert format_series(s) == "1+XY-YX"


def test_coefficient_lookup_and_cap():
    s = expand(FreeWord([1, 1], 2), 2, 3)
    assert s.coeff((1, 1)) == 1 and s[(1,)] == 2 and s.coeff((2,)) == 0
    with pytest.raises(OutOfRangeError):
        s.coeff((1, 1, 1, 1))


def test_mixing_caps_is_rejected():
    with pytest.raises(RankMismatchError):
        TruncSeries.unit(2, 3) * TruncSeries.unit(2, 4)


def test_parse_round_trip_and_zero():
    text = "1-XXXYXYYY+5XXYXXYYY"
    assert format_series(parse_series(text, 2, 8)) == text
    assert format_series(TruncSeries(2, 3)) == "0"
    with pytest.raises(MalformedInputError):
        parse_series("1+XQ", 2, 3)


def test_json_is_sorted_and_stable():
    s = expand(FreeWord([1, 2], 2), 2, 2)
    rows = json.loads(s.to_json())
    assert rows[0] == {"coeff": "1", "monomial": "1"}
    assert [r["monomial"] for r in rows] == ["1", "X", "Y", "XY"]


def test_many_variable_monomials_use_indexed_names():
    s = expand(FreeWord([4], 4), 4, 1)
    assert format_series(s) == "1+X4"
    assert parse_series("1+X4", 4, 1) == s


@given(letters, letters)
def test_expansion_is_multiplicative(a, b):
    wa, wb = FreeWord(a, 2), FreeWord(b, 2)
    assert expand(wa * wb, 2, 5) == expand(wa, 2, 5) * expand(wb, 2, 5)


@given(letters)
def test_dense_and_sparse_products_agree(a):
    acc = DenseSeries.unit(2, 5)
    for g in a:
        acc = acc * DenseSeries.letter(g, 2, 5)
    assert acc.to_sparse() == expand(FreeWord(a, 2), 2, 5)


@given(letters)
def test_format_parse_round_trip(a):
    s = expand(FreeWord(a, 2), 2, 4)
    assert parse_series(format_series(s), 2, 4) == s
