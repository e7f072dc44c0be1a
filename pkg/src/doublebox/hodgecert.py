"""Exact linear-algebra certificates on the space of quadrics in seven variables.

Every certificate reduces a claim to the dimension of an explicit span or
intersection of spans inside the 28-dimensional space of quadrics, computed
over the rationals.  Index conventions follow the double-box labeling: Q
lives on x_5..x_7, Q' on x_1..x_3 and x_4 is the middle edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from .exactpoly import SparsePoly, monomials_of_degree, rank, span_basis, subspace_intersection
from .symanzik import SymanzikDecomposition

NVARS = 7
QUADRIC_BASIS: tuple[tuple[int, ...], ...] = tuple(monomials_of_degree(NVARS, 2))
_POSITION = {exp: i for i, exp in enumerate(QUADRIC_BASIS)}

FIRST_WITH_MIDDLE = (0, 1, 2, 3)  # x_1..x_4
LAST_WITH_MIDDLE = (3, 4, 5, 6)  # x_4..x_7


def quadric_vector(q: SparsePoly) -> tuple[Fraction, ...]:
    if q.nvars != NVARS:
        raise ValueError(f"expected a quadric in {NVARS} variables")
    if not q.is_zero() and not q.is_homogeneous(2):
        raise ValueError("expected a homogeneous quadric")
    vec = [Fraction(0)] * len(QUADRIC_BASIS)
    for exp, c in q.terms.items():
        vec[_POSITION[exp]] = c
    return tuple(vec)


def quadric_from_vector(vec: Sequence) -> SparsePoly:
    if len(vec) != len(QUADRIC_BASIS):
        raise ValueError(f"expected {len(QUADRIC_BASIS)} coordinates")
    return SparsePoly(NVARS, {exp: c for exp, c in zip(QUADRIC_BASIS, vec) if c})


def block_monomials(block: Sequence[int]) -> list[SparsePoly]:
    """All x_i x_j with i <= j in ``block``."""
    out = []
    for pos, i in enumerate(block):
        for j in block[pos:]:
            exp = [0] * NVARS
            exp[i] += 1
            exp[j] += 1
            out.append(SparsePoly.monomial(exp))
    return out


def gram_matrix(q: SparsePoly, block: Sequence[int]) -> list[list[Fraction]]:
    """Symmetric coefficient matrix of q restricted to the variables in ``block``."""
    rows = []
    for i in block:
        row = []
        for j in block:
            exp = [0] * q.nvars
            exp[i] += 1
            exp[j] += 1
            c = q.coefficient(exp)
            row.append(c if i == j else c / 2)
        rows.append(row)
    return rows


def gram_rank(q: SparsePoly, block: Sequence[int]) -> int:
    return rank(gram_matrix(q, block))


@dataclass(frozen=True)
class CertificateResult:
    name: str
    claimed: int
    computed: int
    witness_basis: tuple[SparsePoly, ...]
    details: dict = field(default_factory=dict, compare=False)
    companions: tuple["CertificateResult", ...] = ()

    @property
    def passed(self) -> bool:
        return self.computed == self.claimed

    @property
    def all_passed(self) -> bool:
        return self.passed and all(c.all_passed for c in self.companions)

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "claimed": self.claimed,
            "computed": self.computed,
            "pass": self.passed,
            "witness": [p.to_json() for p in self.witness_basis],
        }
        if self.details:
            out["details"] = self.details
        if self.companions:
            out["companions"] = [c.to_json() for c in self.companions]
        return out


def _as_polys(vectors) -> tuple[SparsePoly, ...]:
    return tuple(quadric_from_vector(v) for v in vectors)


def order2_vanishing_quadrics() -> CertificateResult:
    """Quadrics vanishing to order two on both conics.

    The degree-2 part of the square of each conic's ideal is spanned by the
    monomials in that conic's four vanishing coordinates (the block quadric
    only enters in degree 3).  The intersection of the two monomial spans is
    expected to be the line through x_4^2, which is also the kernel of the
    restriction map from quadrics on P^6 to second-order data along C u C'.
    """
    a = [quadric_vector(p) for p in block_monomials(FIRST_WITH_MIDDLE)]
    b = [quadric_vector(p) for p in block_monomials(LAST_WITH_MIDDLE)]
    basis = _as_polys(subspace_intersection(a, b))
    x4 = SparsePoly.var(NVARS, 3)
    return CertificateResult(
        "order2_vanishing_quadrics", 1, len(basis), basis,
        {"basis_is_x4_squared": list(basis) == [x4 * x4],
         "block_dimensions": [len(a), len(b)]},
    )


def _require_valid(decomp: SymanzikDecomposition) -> None:
    if (decomp.m, decomp.n) != (3, 3):
        raise ValueError("certificates are defined for the (3,1,3) double box")
    if not decomp.is_valid:
        raise ValueError("decomposition has a nonzero residual")


def injectivity_of_a(decomp: SymanzikDecomposition) -> CertificateResult:
    """Smoothness of both block conics, which makes the tangent map injective.

    d/dx_j for j in the last block goes to the linear form dQ/dx_j; these
    three forms are independent exactly when the Gram matrix of Q is
    invertible.  The same rank is required of Q'.  The computed value is the
    smaller of the two ranks.
    """
    _require_valid(decomp)
    rq = gram_rank(decomp.last_quadric, decomp.last_block)
    rqp = gram_rank(decomp.first_quadric, decomp.first_block)
    partials = tuple(decomp.last_quadric.partial_derivative(j) for j in decomp.last_block)
    return CertificateResult(
        "a_injectivity", 3, min(rq, rqp), partials,
        {"gram_rank_Q": rq, "gram_rank_Qprime": rqp},
    )


def _span_separation(psi: SparsePoly, quad: SparsePoly, quad_block, sum_block, target_block, name):
    xs = SparsePoly.variables(NVARS)
    linear = sum((xs[i] for i in sum_block), SparsePoly.zero(NVARS))
    gens = [psi.partial_derivative(k) for k in sum_block]
    gens += [quad.partial_derivative(k) * linear for k in quad_block]
    gen_vectors = [quadric_vector(g) for g in gens]
    span = span_basis(gen_vectors)
    target = [quadric_vector(p) for p in block_monomials(target_block)]
    inter = _as_polys(subspace_intersection(gen_vectors, target))
    return CertificateResult(
        name, 0, len(inter), inter,
        {"generator_count": len(gens), "generator_span_dimension": len(span)},
    )


def span_separation_certificate(decomp: SymanzikDecomposition) -> CertificateResult:
    """No nonzero combination of the tangent-image generators is a quadric in x_1..x_4.

    Generators: dPsi/dx_4..dPsi/dx_7 and (dQ'/dx_k)(x_4+..+x_7) for k = 1..3.
    Claimed intersection with span{x_i x_j : i, j <= 4} is zero.  The mirror
    statement (dPsi/dx_1..dPsi/dx_4, (dQ/dx_j)(x_1+..+x_4), block x_4..x_7)
    is attached as a companion.
    """
    _require_valid(decomp)
    psi = decomp.reconstruct()
    main = _span_separation(
        psi, decomp.first_quadric, decomp.first_block, LAST_WITH_MIDDLE, FIRST_WITH_MIDDLE,
        "span_separation",
    )
    mirror = _span_separation(
        psi, decomp.last_quadric, decomp.last_block, FIRST_WITH_MIDDLE, LAST_WITH_MIDDLE,
        "span_separation_mirror",
    )
    return replace(main, companions=(mirror,))


def degenerate_decomposition(decomp: SymanzikDecomposition) -> SymanzikDecomposition:
    """Same A-matrix with both block quadrics set to zero; Psi collapses to x_4·A."""
    zero = SparsePoly.zero(decomp.nvars)
    return replace(decomp, Q=zero, Qprime=zero, residual=zero)


MONOMIAL_CLASSES: dict[str, tuple[tuple[int, ...], tuple[int, ...]]] = {
    "(123)^2": ((0, 1, 2), (0, 1, 2)),
    "(123)(567)": ((0, 1, 2), (4, 5, 6)),
    "(4)(456)": ((3,), (3, 4, 5)),
    "(567)^2": ((4, 5, 6), (4, 5, 6)),
}
RESIDUAL_CLASS = "other"


def monomial_class_of(exp: Sequence[int]) -> str:
    idx = [i for i, e in enumerate(exp) for _ in range(e)]
    if len(idx) != 2:
        raise ValueError("not a quadratic monomial")
    i, j = idx
    for name, (left, right) in MONOMIAL_CLASSES.items():
        if (i in left and j in right) or (j in left and i in right):
            return name
    return RESIDUAL_CLASS


def monomial_class_split(q: SparsePoly) -> dict[str, SparsePoly]:
    """Partition a quadric's terms into the four monomial classes plus a residual class."""
    quadric_vector(q)
    parts: dict[str, dict] = {name: {} for name in (*MONOMIAL_CLASSES, RESIDUAL_CLASS)}
    for exp, c in q.terms.items():
        parts[monomial_class_of(exp)][exp] = c
    return {name: SparsePoly(NVARS, terms) for name, terms in parts.items()}
