import math
from fractions import Fraction

import pytest

from subshift_lab.linalg import poly_divmod
from subshift_lab.prefix_suffix import sample_point_with_coverage
from subshift_lab.salem import (
    closed_form_poly,
    divergence_probe,
    salem_check,
    salem_substitution,
)
from subshift_lab.substitution import char_poly, matrix_of


def test_family_images():
    sub = salem_substitution(1)
    assert sub.render(sub.image(2)) == "14232324"
    assert sub.render(sub.image(3)) == "142324"
    for n in (1, 2, 7):
        lengths = salem_substitution(n).image_lengths()
        assert lengths == (2, 5, 2 * n + 6, 2 * n + 4)
    with pytest.raises(ValueError):
        salem_substitution(0)


def test_salem_check_n1():
    report = salem_check(1)
    assert report.poly == [1, -7, 11, -7, 1]
    assert report.salem
    assert abs(report.s_value - 1.697224362268) < 1e-9
    assert report.trace_sum == 7 and report.trace_product == 9
    assert report.s_value + report.t_value == pytest.approx(7.0)
    assert report.s_value * report.t_value == pytest.approx(9.0)


def test_salem_check_n5():
    report = salem_check(5)
    assert report.poly == [1, -11, 15, -11, 1]
    assert report.salem


def test_family_closed_form_and_palindrome():
    for n in range(1, 51):
        poly = char_poly(matrix_of(salem_substitution(n)))
        assert poly == closed_form_poly(n)
        assert poly == poly[::-1]


def test_poly_divmod_detects_factors():
    # (X^2 + 1)(X^2 - 3X + 1) has a cyclotomic factor
    product = [1, -3, 2, -3, 1]
    quotient, remainder = poly_divmod(product, [1, 0, 1])
    assert all(r == 0 for r in remainder)
    assert quotient == [1, -3, 1]
    _, remainder = poly_divmod([1, -7, 11, -7, 1], [1, 0, 1])
    assert any(r != 0 for r in remainder)


def test_divergence_probe(twist2):
    sub, g = twist2
    point = sample_point_with_coverage(sub, seed=5, min_right=3**7, min_left=3**7)
    small = divergence_probe(sub, g, point, 3**5)
    big = divergence_probe(sub, g, point, 3**7)
    assert big.count_below_c > small.count_below_c
    assert big.certified_lower_bound > small.certified_lower_bound > 0
    assert big.forward_sum > small.forward_sum
    assert big.bound_c == Fraction(4)
    # each index below C contributes at least exp(-C)
    assert big.forward_sum + big.backward_sum >= big.count_below_c * math.exp(-4) - 1e-9


def test_divergence_probe_zero_horizon(twist2):
    sub, g = twist2
    point = sample_point_with_coverage(sub, seed=5, min_right=10)
    probe = divergence_probe(sub, g, point, 0)
    assert probe.forward_sum == 0.0 and probe.backward_sum == 0.0
    assert probe.count_below_c == 0


def test_divergence_probe_linear_growth_for_coboundary():
    # on the 2-periodic system the sums stay bounded, so every index counts
    from subshift_lab.substitution import eigenvector_for, parse_substitution

    sub = parse_substitution("1: 121\n2: 212")
    g = eigenvector_for(matrix_of(sub), 1)
    point = sample_point_with_coverage(sub, seed=2, min_right=3**6, min_left=1)
    probe = divergence_probe(sub, g, point, 3**6)
    assert probe.count_below_c >= 3**6  # every forward index is below C
