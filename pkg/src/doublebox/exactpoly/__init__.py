"""Exact arithmetic layer: sparse rational polynomials and rational matrices."""

from .linalg import (
    RatMatrix,
    kernel_basis,
    rank,
    rref,
    span_basis,
    span_dimension,
    subspace_intersection,
)
from .poly import (
    SparsePoly,
    as_rational,
    coefficient_of,
    grlex_key,
    monomials_of_degree,
    partial_derivative,
    poly_mul,
    poly_sum,
    substitute_linear,
)

__all__ = [
    "RatMatrix",
    "SparsePoly",
    "as_rational",
    "coefficient_of",
    "grlex_key",
    "kernel_basis",
    "monomials_of_degree",
    "partial_derivative",
    "poly_mul",
    "poly_sum",
    "rank",
    "rref",
    "span_basis",
    "span_dimension",
    "subspace_intersection",
    "substitute_linear",
]
