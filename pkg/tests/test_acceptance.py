"""Acceptance criteria 1-9, each at its stated tolerance.

Each test records one PASS/FAIL line, printed in the terminal summary.
"""

import time
from collections import Counter

import pytest

from doublebox.cli import main as cli_main
from doublebox.exactpoly import SparsePoly
from doublebox.graphkit import (
    build_family_graph,
    family_closed_form_phi,
    first_symanzik_enumerative,
    first_symanzik_matrix_tree,
    lift_to_edges,
)
from doublebox.hodgecert import (
    degenerate_decomposition,
    gram_rank,
    injectivity_of_a,
    order2_vanishing_quadrics,
    span_separation_certificate,
)
from doublebox.singularlocus import (
    classify_point,
    distinct_points,
    on_conics,
    projective_distance,
    resultant_solve,
    solve_isolated_singularities,
    verify_conic_singularity,
)
from doublebox.symanzik import (
    decompose,
    derive_seed,
    double_box_decomposition,
    massive_second_symanzik,
    sample_kinematics,
)

TOL = 1e-9
SEEDS = [derive_seed(0, i) for i in range(100)]
CORPUS = [(m, n) for m in range(1, 5) for n in range(1, 5)]
G313 = build_family_graph(3, 1, 3)
X = SparsePoly.variables(7)


@pytest.fixture(scope="module")
def double_boxes():
    return [double_box_decomposition(G313, sample_kinematics(G313, 4, s)) for s in SEEDS]


@pytest.fixture(scope="module")
def isolated_points(double_boxes):
    out = []
    for psi, d in double_boxes:
        raw = solve_isolated_singularities(d, TOL)
        classified = []
        for p in raw:
            try:
                classified.append(classify_point(psi, p, TOL))
            except ValueError:
                classified.append(p)
        out.append(classified)
    return out


def test_criterion_1_symanzik_oracles(criterion):
    first_symanzik_enumerative.cache_clear()
    start = time.perf_counter()
    bad = []
    for m, n in CORPUS:
        g = build_family_graph(m, 1, n)
        enum = first_symanzik_enumerative(g)
        if not (enum == first_symanzik_matrix_tree(g) == family_closed_form_phi(m, n)):
            bad.append((m, n))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10
    criterion(1, ok, f"{len(CORPUS)} families, mismatches {bad}, {elapsed:.2f}s (< 10s)")
    assert ok


def test_criterion_2_contraction_deletion(criterion):
    checked, bad = 0, []
    for m, n in CORPUS:
        g = build_family_graph(m, 1, n)
        phi = first_symanzik_enumerative(g)
        for k in g.edge_ids:
            if g.is_self_loop(k) or g.is_bridge(k):
                continue
            c, d = g.contract_edge(k), g.delete_edge(k)
            xe = SparsePoly.var(g.num_edges, g.variable_index(k))
            rhs = lift_to_edges(first_symanzik_matrix_tree(c), c, g) + xe * lift_to_edges(first_symanzik_matrix_tree(d), d, g)
            checked += 1
            if phi != rhs:
                bad.append((m, n, k))
    ok = not bad and checked > 0
    criterion(2, ok, f"{checked} edges checked, failures {bad}")
    assert ok


def test_criterion_3_decomposition(criterion):
    start = time.perf_counter()
    failures = 0
    for m, n in CORPUS:
        g = build_family_graph(m, 1, n)
        mid_sq = [0] * (m + n + 1)
        mid_sq[m] = 2
        for s in SEEDS:
            d = decompose(massive_second_symanzik(g, sample_kinematics(g, 4, s)), m, n)
            if not d.is_valid or d.A_matrix[m, 0] != 0 or d.a_poly().coefficient(mid_sq) != 0:
                failures += 1
    elapsed = time.perf_counter() - start
    ok = failures == 0 and elapsed < 60
    criterion(3, ok, f"{len(CORPUS) * len(SEEDS)} instances, {failures} failures, {elapsed:.1f}s (< 60s)")
    assert ok


def test_criterion_4_conic_singularity(criterion, double_boxes):
    passed = sum(verify_conic_singularity(psi, d).passed for psi, d in double_boxes)
    psi, d = double_boxes[0]
    perturbed = verify_conic_singularity(psi + X[0] * X[4] * X[5], d)
    named = perturbed.witness is not None and perturbed.witness[:2] == ("C", 0)
    ok = passed == len(double_boxes) and not perturbed.passed and named
    criterion(4, ok, f"{passed}/100 generic pass; perturbed fails={not perturbed.passed} "
                     f"witness={perturbed.witness[:2] if perturbed.witness else None}")
    assert ok


def test_criterion_5_isolated_singularities(criterion, double_boxes, isolated_points):
    good = 0
    counts = Counter()
    ranks = Counter()
    for (psi, d), pts in zip(double_boxes, isolated_points):
        distinct = distinct_points(pts, 1e3 * TOL)
        counts[len(distinct)] += 1
        ranks.update(p.hessian_rank for p in pts)
        seed_ok = (
            len(distinct) == 8
            and all(p.residual_psi < TOL and p.residual_grad < TOL for p in pts)
            and all(p.hessian_rank == 6 and p.is_odp for p in pts)
            and all(p.coordinates[3] == 0 for p in pts)
            and not any(on_conics(p.coordinates, d, 1e3 * TOL) for p in pts)
        )
        good += seed_ok

    # independent route on one instance
    _, d0 = double_boxes[0]
    ref = resultant_solve(d0, seed=0)
    ours = distinct_points(isolated_points[0], 1e3 * TOL)
    cross = len(ref) == len(ours) and all(
        min(projective_distance(z, p.coordinates) for p in ours) < 1e-6 for z in ref
    )
    ok = good >= 95 and cross
    criterion(5, ok, f"{good}/100 seeds with 8 distinct ODPs off the conics (need >= 95); "
                     f"distinct-count histogram {dict(counts)}; Hessian ranks {dict(ranks)}; "
                     f"resultant cross-check {'agrees' if cross else 'disagrees'} ({len(ref)} vs {len(ours)} points)")
    assert ok, (
        "with x4 = 0 the A-form is bilinear across the blocks, so on each line it factors as s*t*const "
        "and every root of the reduced system lies on one of the two conics"
    )


def test_criterion_6_order2_vanishing(criterion, isolated_points):
    cert = order2_vanishing_quadrics()
    basis_ok = cert.computed == 1 and list(cert.witness_basis) == [X[3] ** 2]
    worst = max(abs(p.coordinates[3]) ** 2 for pts in isolated_points for p in pts)
    ok = basis_ok and worst < 1e-8
    criterion(6, ok, f"dimension {cert.computed}, basis {[q.to_str() for q in cert.witness_basis]}, "
                     f"max |x4^2| on computed points {worst:.1e}")
    assert ok


def test_criterion_7_span_separation(criterion, double_boxes):
    good = 0
    for _, d in double_boxes:
        cert = span_separation_certificate(d)
        if cert.all_passed and all(c.details["generator_span_dimension"] == 7 for c in (cert, *cert.companions)):
            good += 1
    degenerate = span_separation_certificate(degenerate_decomposition(double_boxes[0][1]))
    ok = good == len(double_boxes) and not degenerate.passed
    criterion(7, ok, f"{good}/100 seeds span 7 with trivial intersection (and mirror); "
                     f"degenerate instance intersection dimension {degenerate.computed}")
    assert ok


def test_criterion_8_gram_ranks(criterion, double_boxes):
    good = sum(injectivity_of_a(d).details == {"gram_rank_Q": 3, "gram_rank_Qprime": 3} for _, d in double_boxes)
    r1 = gram_rank(X[4] ** 2, (4, 5, 6))
    r2 = gram_rank(X[4] * X[5], (4, 5, 6))
    ok = good == len(double_boxes) and (r1, r2) == (1, 2)
    criterion(8, ok, f"{good}/100 seeds with both Gram ranks 3; degenerate ranks {r1}, {r2}")
    assert ok


COMMANDS = [
    ("emit", "--family", "3,1,3", "--seed", "7"),
    ("emit", "--family", "1,1,1", "--seed", "7", "--format", "text"),
    ("decompose", "--family", "2,1,3", "--seed", "1"),
    ("singular", "--seed", "2"),
    ("certify", "--seed", "3"),
    ("verify", "--family", "3,1,3", "--seed", "11"),
    ("verify", "--seed", "11", "--inject-perturbation"),
    ("sweep", "--seeds", "3", "--seed", "4"),
    ("sweep", "--D", "1", "--seeds", "2"),
]


def test_criterion_9_determinism(criterion, tmp_path):
    mismatched = []
    for i, argv in enumerate(COMMANDS):
        outputs = []
        for run in range(2):
            out = tmp_path / f"{i}-{run}"
            code = cli_main([*argv, "--out", str(out)])
            outputs.append((code, {f.name: f.read_bytes() for f in sorted(out.iterdir())}))
        if outputs[0] != outputs[1]:
            mismatched.append(argv[0])
    ok = not mismatched
    criterion(9, ok, f"{len(COMMANDS)} command lines run twice; mismatches {mismatched}")
    assert ok
