"""Exact and stochastic analysis of ergodic sums for substitution subshifts
whose occurrence matrix has eigenvalues of modulus one."""

from .substitution import (
    Substitution,
    WeightVector,
    char_poly,
    constant_length,
    eigenvector_for,
    gamma_of_word,
    is_primitive,
    iterate_prefix,
    matrix_of,
    parse_substitution,
    parse_substitution_json,
)

__all__ = [
    "Substitution",
    "WeightVector",
    "char_poly",
    "constant_length",
    "eigenvector_for",
    "gamma_of_word",
    "is_primitive",
    "iterate_prefix",
    "matrix_of",
    "parse_substitution",
    "parse_substitution_json",
]

__version__ = "0.1.0"
