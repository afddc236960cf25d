import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from subshift_lab.substitution import (
    Substitution,
    WeightVector,
    char_poly,
    constant_length,
    eigenvector_for,
    gamma_of_word,
    is_primitive,
    iterate_prefix,
    matrix_of,
    matrix_to_json,
    parse_substitution,
    parse_substitution_json,
    poly_to_text,
    substitution_to_json,
    word,
)

IET4 = parse_substitution("1: 14\n2: 14224\n3: 14232324\n4: 142324")


def test_matrix_of_basic(twist2):
    sub, _ = twist2
    assert matrix_of(sub) == [[2, 1], [1, 2]]


def test_matrix_of_iet4_is_transpose_of_column_form():
    # occurrence counts in row convention; the column-convention rendition of
    # the same data is the transpose
    m = matrix_of(IET4)
    assert m == [[1, 0, 0, 1], [1, 2, 0, 2], [1, 3, 2, 2], [1, 2, 1, 2]]
    transpose = [[m[j][i] for j in range(4)] for i in range(4)]
    assert transpose == [[1, 1, 1, 1], [0, 2, 3, 2], [0, 0, 2, 1], [1, 2, 2, 2]]


def test_matrix_of_identity_substitution():
    sub = Substitution.from_words([[0], [1]])
    assert matrix_of(sub) == [[1, 0], [0, 1]]


def test_row_sums_are_image_lengths():
    for sub in (IET4, parse_substitution("1: 112\n2: 221")):
        m = matrix_of(sub)
        assert [sum(row) for row in m] == list(sub.image_lengths())


def test_primitivity():
    assert is_primitive(parse_substitution("1: 112\n2: 221"))
    assert not is_primitive(parse_substitution("1: 11\n2: 22"))
    assert is_primitive(parse_substitution("1: 12\n2: 13\n3: 23"))


def test_constant_length():
    assert constant_length(parse_substitution("1: 112\n2: 221")) == 3
    assert constant_length(parse_substitution("1: 12\n2: 13\n3: 23")) == 2
    assert constant_length(IET4) is None
    assert IET4.image_lengths() == (2, 5, 8, 6)


def test_char_poly_examples(twist2):
    assert char_poly(matrix_of(IET4)) == [1, -7, 11, -7, 1]
    assert char_poly([[1, 0], [0, 1]]) == [1, -2, 1]
    assert char_poly(matrix_of(twist2[0])) == [1, -4, 3]


def test_constant_length_right_perron():
    sub = parse_substitution("1: 112\n2: 221")
    m = matrix_of(sub)
    d = constant_length(sub)
    assert [sum(row) for row in m] == [d] * sub.alphabet_size  # M 1 = d 1


def test_eigenvector_examples(twist2, sync3):
    assert twist2[1].values == (Fraction(1), Fraction(-1))
    assert twist2[1].theta == 1
    assert sync3[1].values == (Fraction(1), Fraction(0), Fraction(-1))
    assert eigenvector_for([[2, 1], [1, 1]], 1) is None
    # absence matches the characteristic polynomial evaluated at theta
    from subshift_lab.linalg import poly_eval

    assert poly_eval(char_poly([[2, 1], [1, 1]]), 1) == -1


def test_eigenvector_present_iff_charpoly_root():
    from subshift_lab.linalg import poly_eval

    mats = [
        [[2, 1], [1, 2]],
        [[2, 1], [1, 1]],
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[3, 1, 0], [1, 1, 1], [0, 2, 2]],
    ]
    for m in mats:
        for theta in (1, -1):
            has_vec = eigenvector_for(m, theta) is not None
            assert has_vec == (poly_eval(char_poly(m), theta) == 0)


def test_eigenvector_normalization():
    gamma = eigenvector_for([[2, 1], [1, 2]], 1)
    assert gamma.values[0] > 0
    assert all(v.denominator == 1 for v in gamma.values)


def test_gamma_of_word(twist2, sync3):
    _, g = twist2
    assert gamma_of_word(g, word([0, 0, 1])) == 1
    assert gamma_of_word(g, b"") == 0
    assert gamma_of_word(sync3[1], word([0, 1, 2, 0, 1, 2])) == 0


def test_weight_vector_rejects_zero():
    with pytest.raises(ValueError):
        WeightVector((Fraction(0), Fraction(0)), Fraction(1))


@given(st.lists(st.integers(0, 1), max_size=30), st.lists(st.integers(0, 1), max_size=30))
def test_gamma_is_a_morphism(u, v):
    g = eigenvector_for([[2, 1], [1, 2]], 1)
    assert gamma_of_word(g, word(u + v)) == gamma_of_word(g, word(u)) + gamma_of_word(g, word(v))


@given(st.lists(st.integers(0, 2), min_size=1, max_size=20))
def test_gamma_against_image(w):
    sub = parse_substitution("1: 12\n2: 13\n3: 23")
    g = eigenvector_for(matrix_of(sub), 1)
    assert gamma_of_word(g, sub.apply(word(w))) == g.theta * gamma_of_word(g, word(w))


def test_gamma_image_identity_for_negative_eigenvalue():
    # 1 -> 122, 2 -> 211 has eigenvalue -1 for gamma = (1, -1)
    sub = parse_substitution("1: 122\n2: 211")
    g = eigenvector_for(matrix_of(sub), -1)
    assert g is not None and g.theta == -1
    for w in (word([0]), word([0, 1, 1, 0]), word([1, 1])):
        assert gamma_of_word(g, sub.apply(w)) == -gamma_of_word(g, w)


def test_iterate_prefix(twist2, sync3):
    sub, _ = twist2
    assert sub.render(iterate_prefix(sub, 0, 9)) == "112112221"
    assert iterate_prefix(sub, 0, 1) == word([0])
    assert sync3[0].render(iterate_prefix(sync3[0], 0, 4)) == "1213"


def test_iterate_prefix_rejects_non_growing():
    sub = parse_substitution("1: 1\n2: 22")
    with pytest.raises(ValueError):
        iterate_prefix(sub, 0, 5)


def test_iterate_prefix_consistency_across_lengths(twist2):
    sub, _ = twist2
    long = iterate_prefix(sub, 0, 200)
    for length in (1, 3, 27, 100):
        assert iterate_prefix(sub, 0, length) == long[:length]


# ---------------------------------------------------------------------------
# parsing and serialization
# ---------------------------------------------------------------------------


def test_parse_symbols():
    sub = parse_substitution("a: ab\nb: ba")
    assert sub.symbols == ("a", "b")
    assert sub.images == (word([0, 1]), word([1, 0]))


def test_parse_separated_tokens():
    sub = parse_substitution("1: 1,2\n2: 2 1")
    assert sub.images == (word([0, 1]), word([1, 0]))


def test_parse_rejects_malformed():
    with pytest.raises(ValueError):
        parse_substitution("1 112")
    with pytest.raises(ValueError):
        parse_substitution("1: 113\n2: 221")
    with pytest.raises(ValueError):
        parse_substitution("1: 12\n1: 21")
    with pytest.raises(ValueError):
        parse_substitution("1: \n2: 1")


def test_parse_json_roundtrip(twist2):
    sub, _ = twist2
    doc = substitution_to_json(sub)
    again = parse_substitution_json(json.dumps(doc))
    assert again.images == sub.images
    assert again.symbols == sub.symbols


def test_matrix_serialization():
    assert matrix_to_json([[10**30, 1], [0, 2]]) == [[str(10**30), "1"], ["0", "2"]]
    assert poly_to_text([1, -7, 11, -7, 1]) == "X^4 - 7*X^3 + 11*X^2 - 7*X + 1"
