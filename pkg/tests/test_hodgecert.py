from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from doublebox.exactpoly import SparsePoly, monomials_of_degree
from doublebox.graphkit import build_family_graph
from doublebox.hodgecert import (
    MONOMIAL_CLASSES,
    QUADRIC_BASIS,
    RESIDUAL_CLASS,
    block_monomials,
    degenerate_decomposition,
    gram_matrix,
    gram_rank,
    injectivity_of_a,
    monomial_class_split,
    order2_vanishing_quadrics,
    quadric_from_vector,
    quadric_vector,
    span_separation_certificate,
)
from doublebox.symanzik import decompose, double_box_decomposition, sample_kinematics

G313 = build_family_graph(3, 1, 3)
X = SparsePoly.variables(7)
quadrics = st.dictionaries(
    st.sampled_from(QUADRIC_BASIS), st.fractions(min_value=-9, max_value=9, max_denominator=5), max_size=10
).map(lambda t: SparsePoly(7, t))


def dec(seed):
    return double_box_decomposition(G313, sample_kinematics(G313, 4, seed))[1]


def test_quadric_basis_order():
    assert QUADRIC_BASIS == tuple(monomials_of_degree(7, 2))
    assert len(QUADRIC_BASIS) == 28
    assert QUADRIC_BASIS[0] == (2, 0, 0, 0, 0, 0, 0)


@given(quadrics)
def test_vector_round_trip(q):
    assert quadric_from_vector(quadric_vector(q)) == q


def test_vector_rejects_non_quadrics():
    with pytest.raises(ValueError):
        quadric_vector(X[0])
    with pytest.raises(ValueError):
        quadric_vector(SparsePoly.var(3, 0) ** 2)


def test_gram_matrix():
    q = X[4] ** 2 + 4 * X[4] * X[5] - X[6] ** 2
    assert gram_matrix(q, (4, 5, 6)) == [[1, 2, 0], [2, 0, 0], [0, 0, -1]]
    assert gram_rank(q, (4, 5, 6)) == 3
    assert gram_rank(X[4] ** 2, (4, 5, 6)) == 1
    assert gram_rank(X[4] * X[5], (4, 5, 6)) == 2


def test_order2_vanishing_is_x4_squared():
    cert = order2_vanishing_quadrics()
    assert cert.passed and cert.computed == 1
    assert list(cert.witness_basis) == [X[3] ** 2]
    assert cert.details["block_dimensions"] == [10, 10]
    assert len(block_monomials((0, 1, 2, 3))) == 10


@pytest.mark.parametrize("seed", range(5))
def test_generic_certificates(seed):
    d = dec(seed)
    inj = injectivity_of_a(d)
    assert inj.passed and inj.details == {"gram_rank_Q": 3, "gram_rank_Qprime": 3}
    sep = span_separation_certificate(d)
    assert sep.all_passed
    for cert in (sep, *sep.companions):
        assert cert.details["generator_span_dimension"] == 7
        assert cert.witness_basis == ()


def test_degenerate_quadrics_fail_injectivity():
    d = dec(1)
    for q, expected in ((X[4] ** 2, 1), (X[4] * X[5], 2)):
        bad = replace(d, Q=q)
        bad = replace(bad, residual=SparsePoly.zero(7))
        cert = injectivity_of_a(bad)
        assert not cert.passed and cert.details["gram_rank_Q"] == expected


def test_degenerate_instance_fails_span_separation():
    sep = span_separation_certificate(degenerate_decomposition(dec(1)))
    assert not sep.passed and sep.computed > 0
    for w in sep.witness_basis:
        assert w.support() <= {0, 1, 2, 3}


def test_certificates_reject_bad_input():
    d = dec(1)
    with pytest.raises(ValueError):
        injectivity_of_a(replace(d, residual=X[0] ** 3))
    g = build_family_graph(2, 1, 2)
    from doublebox.symanzik import massive_second_symanzik
    with pytest.raises(ValueError):
        span_separation_certificate(decompose(massive_second_symanzik(g, sample_kinematics(g, 4, 1)), 2, 2))


@given(st.fractions(min_value=-50, max_value=50, max_denominator=9).filter(bool))
@settings(max_examples=10)
def test_certificates_invariant_under_rescaling(lam):
    d = dec(3)
    from doublebox.exactpoly import RatMatrix
    scaled = replace(
        d, Q=d.Q.scale(lam), Qprime=d.Qprime.scale(lam),
        A_matrix=RatMatrix(d.A_matrix.rows, d.A_matrix.cols, tuple(lam * a for a in d.A_matrix.entries)),
    )
    assert injectivity_of_a(scaled).passed == injectivity_of_a(d).passed
    a, b = span_separation_certificate(scaled), span_separation_certificate(d)
    assert (a.computed, a.companions[0].computed) == (b.computed, b.companions[0].computed)


def test_monomial_class_examples():
    assert monomial_class_split(X[4] * X[5])["(567)^2"] == X[4] * X[5]
    assert monomial_class_split(X[0] * X[1])["(123)^2"] == X[0] * X[1]
    assert monomial_class_split(X[3] * X[4])["(4)(456)"] == X[3] * X[4]
    assert monomial_class_split(X[3] * X[0])[RESIDUAL_CLASS] == X[3] * X[0]
    assert monomial_class_split(X[0] * X[6])["(123)(567)"] == X[0] * X[6]


def test_monomial_classes_partition_all_28():
    total = sum((SparsePoly.monomial(e) for e in QUADRIC_BASIS), SparsePoly.zero(7))
    parts = monomial_class_split(total)
    assert set(parts) == set(MONOMIAL_CLASSES) | {RESIDUAL_CLASS}
    assert sum(len(p) for p in parts.values()) == 28
    assert {k: len(v) for k, v in parts.items()} == {
        "(123)^2": 6, "(123)(567)": 9, "(4)(456)": 3, "(567)^2": 6, RESIDUAL_CLASS: 4,
    }


@given(quadrics)
def test_class_split_reassembles(q):
    parts = monomial_class_split(q)
    assert sum(parts.values(), SparsePoly.zero(7)) == q


def test_certificate_json():
    data = order2_vanishing_quadrics().to_json()
    assert data["name"] == "order2_vanishing_quadrics"
    assert data["claimed"] == data["computed"] == 1 and data["pass"] is True
    assert SparsePoly.from_json(data["witness"][0]) == X[3] ** 2
