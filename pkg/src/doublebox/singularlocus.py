"""Singular locus of the double-box cubic X = {Psi_{3,1,3} = 0} in P^6.

Exact checks (the conics C, C') run on rational polynomials.  The isolated
points are computed in complex double precision.  Residuals are measured for
Psi scaled so that its largest coefficient has magnitude 1, at points scaled
so that their largest coordinate is 1.

Coordinates are 0-based internally: index 3 is x_4, the middle edge.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exactpoly import SparsePoly
from .graphkit import TwoLoopGraph
from .hodgecert import gram_rank
from .symanzik import (
    KinematicData,
    SymanzikDecomposition,
    decompose,
    massive_second_symanzik,
    swap_quadric_labels,
)

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_RANK_TOL = 1e-6
EXPECTED_POINTS = 8
X4 = 3


# -- numeric evaluation of cubic forms ---------------------------------------


class CubicForm:
    """Dense symmetric-tensor view of a homogeneous cubic, normalized to max |coeff| = 1."""

    def __init__(self, psi: SparsePoly):
        if not psi.is_homogeneous(3):
            raise ValueError("expected a homogeneous cubic")
        n = psi.nvars
        self.nvars = n
        self.scale = max((abs(c) for c in psi.terms.values()), default=Fraction(1))
        T = np.zeros((n, n, n), dtype=complex)
        for exp, c in psi.terms.items():
            idx = [i for i, e in enumerate(exp) for _ in range(e)]
            perms = set(itertools.permutations(idx))
            share = float(c / self.scale) / len(perms)
            for p in perms:
                T[p] += share
        self.tensor = T

    def value(self, z):
        return np.einsum("ijk,...i,...j,...k->...", self.tensor, z, z, z)

    def gradient(self, z):
        return 3 * np.einsum("ijk,...j,...k->...i", self.tensor, z, z)

    def hessian(self, z):
        return 6 * np.einsum("ijk,...k->...ij", self.tensor, z)


def _numeric(p: SparsePoly):
    scale = max((abs(c) for c in p.terms.values()), default=Fraction(1))
    return [(exp, float(c / scale)) for exp, c in p.terms.items()]


def _eval_numeric(terms, z) -> complex:
    total = 0j
    for exp, c in terms:
        v = c
        for x, e in zip(z, exp):
            if e:
                v = v * x**e
        total += v
    return total


def normalize_point(z: Sequence[complex]) -> tuple[np.ndarray, int]:
    z = np.asarray(z, dtype=complex)
    k = int(np.argmax(np.abs(z)))
    if z[k] == 0:
        raise ValueError("the zero vector is not a projective point")
    return z / z[k], k


def projective_distance(p, q) -> float:
    """Sine of the angle between the lines spanned by p and q."""
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    cos2 = abs(np.vdot(p, q)) ** 2 / (np.vdot(p, p).real * np.vdot(q, q).real)
    return float(np.sqrt(max(0.0, 1.0 - cos2)))


# -- data ----------------------------------------------------------------------


@dataclass(frozen=True)
class SingularPoint:
    coordinates: tuple[complex, ...]
    residual_psi: float
    residual_grad: float
    chart_index: int
    hessian_rank: int | None = None
    is_odp: bool = False
    degenerate: bool = False
    newton_initial_residual: float | None = None

    def to_json(self) -> dict:
        return {
            "coordinates": [[repr(float(c.real)), repr(float(c.imag))] for c in self.coordinates],
            "residual_psi": repr(self.residual_psi),
            "residual_grad": repr(self.residual_grad),
            "chart_index": self.chart_index,
            "hessian_rank": self.hessian_rank,
            "is_odp": self.is_odp,
            "degenerate": self.degenerate,
            "newton_initial_residual": None if self.newton_initial_residual is None
            else repr(self.newton_initial_residual),
        }


@dataclass(frozen=True)
class ConicCheck:
    passed: bool
    witnesses: tuple[tuple[str, int, SparsePoly], ...] = ()  # (component, variable index, restriction)

    @property
    def witness(self) -> tuple[str, int, SparsePoly] | None:
        return self.witnesses[0] if self.witnesses else None

    def describe(self) -> str:
        if self.passed:
            return "all restricted partials are multiples of the block quadric"
        return "; ".join(
            f"{comp}: d/dx{var + 1} restricts to {poly.to_str()}, not a multiple of the quadric"
            for comp, var, poly in self.witnesses
        )


@dataclass(frozen=True)
class Diagnostic:
    name: str
    passed: bool
    value: object = None

    def to_json(self) -> dict:
        value = self.value
        if isinstance(value, float):
            value = repr(value)
        return {"name": self.name, "pass": self.passed, "value": value}


@dataclass(frozen=True)
class GenericityReport:
    gram_rank_Q: int
    gram_rank_Qprime: int
    s_point_count: int
    all_odp: bool
    min_pairwise_separation: float
    disjoint_from_conics: bool
    diagnostics: tuple[Diagnostic, ...]
    points: tuple[SingularPoint, ...] = ()
    off_hyperplane_points: tuple[SingularPoint, ...] = ()
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return all(d.passed for d in self.diagnostics)

    def diagnostic(self, name: str) -> Diagnostic:
        for d in self.diagnostics:
            if d.name == name:
                return d
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "pass": self.passed,
            "diagnostics": [d.to_json() for d in self.diagnostics],
            "points": [p.to_json() for p in self.points],
            "off_hyperplane_points": [p.to_json() for p in self.off_hyperplane_points],
        }


# -- conics --------------------------------------------------------------------


def _is_multiple(p: SparsePoly, q: SparsePoly) -> bool:
    if p.is_zero():
        return True
    if q.is_zero():
        return False
    exp, c = next(iter(q.terms.items()))
    return p == q * (p.coefficient(exp) / c)


def verify_conic_singularity(psi: SparsePoly, decomp: SymanzikDecomposition) -> ConicCheck:
    """Exact check that Psi is singular along both conic components.

    On C (first block and middle variable zero, last-block quadric zero)
    every partial of Psi must restrict to a multiple of the last-block
    quadric; on C' symmetrically with the first-block quadric.
    """
    if not decomp.is_valid:
        raise ValueError("decomposition has a nonzero residual")
    if psi.nvars != decomp.nvars:
        raise ValueError("polynomial and decomposition disagree on the number of variables")
    nv = decomp.nvars
    zero = SparsePoly.zero(nv)
    on_c = {i: zero for i in decomp.first_block + (decomp.middle,)}
    on_cp = {i: zero for i in (decomp.middle,) + decomp.last_block}
    failures = []
    for name, subs, quad in (("C", on_c, decomp.last_quadric), ("C'", on_cp, decomp.first_quadric)):
        for i in range(nv):
            restricted = psi.partial_derivative(i).substitute_linear(subs)
            if not _is_multiple(restricted, quad):
                failures.append((name, i, restricted))
    return ConicCheck(not failures, tuple(failures))


# -- structured solver ---------------------------------------------------------


def _binary_roots(a: complex, b: complex, c: complex, tol: float):
    """Roots [u:v] of a u^2 + b uv + c v^2; returns (roots, degenerate)."""
    size = max(abs(a), abs(b), abs(c))
    if size == 0:
        return [], True
    a, b, c = a / size, b / size, c / size
    eps = 1e3 * tol
    if abs(a) >= abs(c) and abs(a) > eps:
        disc = b * b - 4 * a * c
        sq = np.sqrt(complex(disc))
        # stable quadratic formula
        q = -0.5 * (b + sq) if abs(b + sq) >= abs(b - sq) else -0.5 * (b - sq)
        r1 = q / a
        r2 = c / q if q != 0 else r1
        roots = [(r1, 1.0), (r2, 1.0)]
    elif abs(c) > eps:
        # chart switch: roots in v/u
        disc = b * b - 4 * a * c
        sq = np.sqrt(complex(disc))
        q = -0.5 * (b + sq) if abs(b + sq) >= abs(b - sq) else -0.5 * (b - sq)
        r1 = q / c
        r2 = a / q if q != 0 else r1
        roots = [(1.0, r1), (1.0, r2)]
    else:
        # both leading coefficients vanish: u v (b) = 0
        disc = b * b
        roots = [(1.0, 0.0), (0.0, 1.0)]
    degenerate = abs(disc) <= eps * max(abs(b) ** 2, abs(4 * a * c), 1e-300)
    out = []
    for u, v in roots:
        vec = np.array([u, v], dtype=complex)
        out.append(vec / vec[np.argmax(np.abs(vec))])
    return out, degenerate


def _block_binary_form(quad: SparsePoly, block: Sequence[int]) -> tuple[complex, complex, complex]:
    """Coefficients of quad(y1, y2, -y1-y2) on a three-variable block."""
    nv = quad.nvars
    i, j, k = block
    subs = {k: -SparsePoly.var(nv, i) - SparsePoly.var(nv, j)}
    reduced = quad.substitute_linear(subs)
    scale = max((abs(c) for c in quad.terms.values()), default=Fraction(1))
    ex = lambda a, b: tuple(int(t == i) * a + int(t == j) * b for t in range(nv))
    return tuple(complex(float(reduced.coefficient(ex(a, b)) / scale)) for a, b in ((2, 0), (1, 1), (0, 2)))


def _embed_block(pair, block: Sequence[int], nv: int) -> np.ndarray:
    z = np.zeros(nv, dtype=complex)
    z[block[0]], z[block[1]] = pair
    z[block[2]] = -pair[0] - pair[1]
    return z


def _residuals(form: CubicForm, z) -> tuple[float, float]:
    return float(abs(form.value(z))), float(np.max(np.abs(form.gradient(z))))


def _newton_refine(form: CubicForm, z: np.ndarray, fixed: Sequence[int], tol: float, max_iter: int = 30):
    """Gauss-Newton on grad Psi = 0 with the coordinates in ``fixed`` held constant."""
    z, k = normalize_point(z)
    frozen = set(fixed) | {k}
    free = [i for i in range(form.nvars) if i not in frozen]
    best = z.copy()
    best_res = float(np.linalg.norm(form.gradient(z)))
    initial = best_res
    for _ in range(max_iter):
        if best_res <= 1e-3 * tol:
            break
        g = form.gradient(best)
        J = form.hessian(best)[:, free]
        step, *_ = np.linalg.lstsq(J, -g, rcond=None)
        trial = best.copy()
        trial[free] += step
        res = float(np.linalg.norm(form.gradient(trial)))
        if not np.isfinite(res) or res >= best_res:
            break
        best, best_res = trial, res
    return best, initial


def _make_point(form: CubicForm, z: np.ndarray, **extra) -> SingularPoint:
    z, k = normalize_point(z)
    rp, rg = _residuals(form, z)
    return SingularPoint(tuple(complex(c) for c in z), rp, rg, k, **extra)


def solve_isolated_singularities(
    decomp: SymanzikDecomposition, tolerance: float = DEFAULT_TOL
) -> list[SingularPoint]:
    """Solve Q = Q' = x4 = x1+x2+x3 = x5+x6+x7 = A = 0 by the 2·2·2 reduction.

    Each block quadric restricted to its sum-zero plane is a binary quadratic
    with two root directions; each of the four pairs spans a line in P^3 on
    which A is a binary quadratic in the line parameters.  All (up to) eight
    roots are returned, refined by Gauss-Newton against grad Psi with x4 held
    at exactly 0.  Roots from a (near) double root are flagged ``degenerate``.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if (decomp.m, decomp.n) != (3, 3):
        raise ValueError("the isolated-point solver is specific to the (3,1,3) double box")
    psi = decomp.reconstruct() + decomp.residual
    form = CubicForm(psi)
    first, last = decomp.first_block, decomp.last_block
    a_form = _numeric(decomp.a_poly())
    nv = decomp.nvars

    first_roots, deg_first = _binary_roots(*_block_binary_form(decomp.first_quadric, first), tolerance)
    last_roots, deg_last = _binary_roots(*_block_binary_form(decomp.last_quadric, last), tolerance)
    if deg_first or deg_last:
        log.warning("degenerate block quadric on its sum-zero plane")

    points = []
    for alpha, beta in itertools.product(first_roots, last_roots):
        pa = _embed_block(alpha, first, nv)
        pb = _embed_block(beta, last, nv)
        ca = _eval_numeric(a_form, pa)
        cb = _eval_numeric(a_form, pb)
        cab = _eval_numeric(a_form, pa + pb) - ca - cb
        line_roots, deg_line = _binary_roots(ca, cab, cb, tolerance)
        for s, t in line_roots:
            z = s * pa + t * pb
            z[X4] = 0.0
            refined, initial = _newton_refine(form, z, fixed=[X4], tol=tolerance)
            refined[X4] = 0.0
            points.append(_make_point(
                form, refined,
                degenerate=bool(deg_first or deg_last or deg_line),
                newton_initial_residual=initial,
            ))
    return points


def classify_point(
    psi: SparsePoly, p: SingularPoint, tolerance: float = DEFAULT_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> SingularPoint:
    """Numerical rank of the affine Hessian in the chart of the largest coordinate.

    A point with nondegenerate 6x6 affine Hessian is an ordinary double point.
    """
    form = CubicForm(psi)
    z, k = normalize_point(p.coordinates)
    rp, rg = _residuals(form, z)
    if rp > tolerance or rg > tolerance:
        raise ValueError(
            f"point is not a singular point of the hypersurface (|Psi|={rp:.3e}, |grad|={rg:.3e})"
        )
    H = form.hessian(z)
    affine = np.delete(np.delete(H, k, axis=0), k, axis=1)
    sv = np.linalg.svd(affine, compute_uv=False)
    rank = int(np.sum(sv > rank_tol * sv[0])) if sv[0] > 0 else 0
    return replace(
        p, coordinates=tuple(complex(c) for c in z), chart_index=k,
        residual_psi=rp, residual_grad=rg, hessian_rank=rank, is_odp=rank == affine.shape[0],
    )


def distinct_points(points: Sequence[SingularPoint], threshold: float) -> list[SingularPoint]:
    out: list[SingularPoint] = []
    for p in points:
        if all(projective_distance(p.coordinates, q.coordinates) > threshold for q in out):
            out.append(p)
    return out


def on_conics(coords: Sequence[complex], decomp: SymanzikDecomposition, threshold: float) -> bool:
    z, _ = normalize_point(coords)
    c_side = [decomp.middle, *decomp.first_block]
    cp_side = [decomp.middle, *decomp.last_block]
    return bool(np.max(np.abs(z[c_side])) < threshold or np.max(np.abs(z[cp_side])) < threshold)


# -- independent route: resultant elimination -----------------------------------


def resultant_solve(decomp: SymanzikDecomposition, seed: int = 0, digits: int = 60) -> list[np.ndarray]:
    """Solve the reduced P^3 system by resultants, independently of the 2·2·2 structure.

    The coordinates (x1, x2, x5, x6) are mixed by a random rational matrix,
    dehomogenized, and two variables are eliminated with resultants.  The
    univariate result is solved at high precision and back-substituted.
    Returns the distinct solutions embedded in P^6, normalized.
    """
    import mpmath
    import sympy as sp

    if (decomp.m, decomp.n) != (3, 3):
        raise ValueError("resultant cross-check is specific to the (3,1,3) double box")
    nv = decomp.nvars
    first, last = decomp.first_block, decomp.last_block
    u = sp.symbols("u1:5")
    v = sp.symbols("v1:4")

    def to_sympy(p: SparsePoly):
        img = [0] * nv
        img[first[0]], img[first[1]], img[first[2]] = u[0], u[1], -u[0] - u[1]
        img[last[0]], img[last[1]], img[last[2]] = u[2], u[3], -u[2] - u[3]
        expr = 0
        for exp, c in p.terms.items():
            term = sp.Rational(c.numerator, c.denominator)
            for i, e in enumerate(exp):
                if e:
                    term *= img[i] ** e
            expr += term
        return sp.expand(expr)

    rng = np.random.default_rng(seed)
    while True:
        M = sp.Matrix(4, 4, [int(x) for x in rng.integers(-5, 6, size=16)])
        if M.det() != 0:
            break
    mixed = M * sp.Matrix([v[0], v[1], v[2], 1])
    subs = {u[i]: mixed[i] for i in range(4)}
    eqs = [sp.expand(to_sympy(p).subs(subs)) for p in
           (decomp.first_quadric, decomp.last_quadric, decomp.a_poly())]

    g1 = sp.resultant(eqs[0], eqs[2], v[0])
    g2 = sp.resultant(eqs[1], eqs[2], v[0])
    h = sp.Poly(sp.resultant(g1, g2, v[1]), v[2])
    if h.is_zero:
        raise ArithmeticError("resultant vanished identically; choose another seed")
    h = h.sqf_part()

    mpmath.mp.dps = digits
    coeff_scale = [max(abs(c) for c in sp.Poly(e, *v).coeffs()) for e in eqs]
    f_num = [sp.lambdify(v, e / s, "mpmath") for e, s in zip(eqs, coeff_scale)]
    g1p = sp.Poly(g1, v[1], v[2])
    eq0 = sp.Poly(eqs[0], v[0], v[1], v[2])
    accept = mpmath.mpf(10) ** (-(digits // 3))

    def univariate_roots(poly, var, values):
        coeffs = sp.Poly(poly.as_expr().subs(values), var).all_coeffs()
        coeffs = [mpmath.mpmathify(sp.N(c, digits)) for c in coeffs]
        while coeffs and abs(coeffs[0]) < mpmath.mpf(10) ** (-digits // 2) * max(abs(c) for c in coeffs):
            coeffs = coeffs[1:]
        if len(coeffs) < 2:
            return []
        return mpmath.polyroots(coeffs, maxsteps=200, extraprec=4 * digits)

    sols = []
    for r3 in h.nroots(n=digits, maxsteps=200):
        r3 = mpmath.mpmathify(sp.N(r3, digits))
        for r2 in univariate_roots(g1p, v[1], {v[2]: r3}):
            for r1 in univariate_roots(eq0, v[0], {v[1]: r2, v[2]: r3}):
                point = (r1, r2, r3)
                if all(abs(f(*point)) < accept * (1 + max(abs(x) for x in point)) ** 2 for f in f_num):
                    uu = [complex(sum(complex(M[i, j]) * complex(w) for j, w in enumerate((*point, 1)))) for i in range(4)]
                    z = np.zeros(nv, dtype=complex)
                    z[list(first)] = [uu[0], uu[1], -uu[0] - uu[1]]
                    z[list(last)] = [uu[2], uu[3], -uu[2] - uu[3]]
                    sols.append(normalize_point(z)[0])
    out: list[np.ndarray] = []
    for z in sols:
        if all(projective_distance(z, w) > 1e-8 for w in out):
            out.append(z)
    return out


# -- off-hyperplane probe ---------------------------------------------------------


def probe_off_hyperplane(
    psi: SparsePoly, *, starts: int = 256, seed: int = 0, tolerance: float = DEFAULT_TOL,
    max_iter: int = 60,
) -> list[SingularPoint]:
    """Multi-start Gauss-Newton for singular points in the chart x4 = 1.

    The conics lie in {x4 = 0}, so anything found here is a singular point
    off that hyperplane.  This is a search, not a completeness certificate:
    an empty result does not prove there are none.
    """
    form = CubicForm(psi)
    rng = np.random.default_rng(seed)
    free = [i for i in range(form.nvars) if i != X4]
    z = rng.normal(size=(starts, form.nvars)) + 1j * rng.normal(size=(starts, form.nvars))
    z[:, X4] = 1.0
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            g = form.gradient(z)
            J = form.hessian(z)[:, :, free]
            step = -(np.linalg.pinv(J) @ g[..., None])[..., 0]
            step[~np.isfinite(step)] = 0
            z[:, free] += step
            blown = ~np.isfinite(z).all(axis=1) | (np.abs(z).max(axis=1) > 1e8)
            z[blown] = 0
            z[blown, X4] = 1.0
    found: list[SingularPoint] = []
    for row in z:
        if not np.isfinite(row).all():
            continue
        zn, _ = normalize_point(row)
        if abs(zn[X4]) < 1e-6:
            continue
        refined, initial = _newton_refine(form, zn, fixed=[], tol=tolerance)
        pt = _make_point(form, refined, newton_initial_residual=initial)
        # stalls near the conics creep below tol slowly; genuine isolated
        # points converge quadratically far past it
        if pt.residual_grad > 1e-3 * tolerance or pt.residual_psi > 1e-3 * tolerance:
            continue
        if all(projective_distance(pt.coordinates, q.coordinates) > 1e-6 for q in found):
            found.append(classify_point(psi, pt, tolerance))
    found.sort(key=lambda p: tuple((round(c.real, 9), round(c.imag, 9)) for c in p.coordinates))
    return found


# -- genericity report -------------------------------------------------------------


def genericity_report(
    graph: TwoLoopGraph, kin: KinematicData, tolerance: float = DEFAULT_TOL, *,
    seed: int | None = None, probe: bool = True, probe_starts: int = 256,
) -> GenericityReport:
    """Run the panel of genericity diagnostics on one double-box instance."""
    if graph.family != (3, 1, 3):
        raise ValueError("genericity diagnostics are defined for the (3,1,3) double box")
    psi = massive_second_symanzik(graph, kin)
    sep_threshold = 1e3 * tolerance
    diags: list[Diagnostic] = []
    if psi.is_zero():
        diags.append(Diagnostic("psi_nonzero", False, 0))
        return GenericityReport(0, 0, 0, False, 0.0, False, tuple(diags), seed=seed)
    diags.append(Diagnostic("psi_nonzero", True, len(psi)))

    decomp = swap_quadric_labels(decompose(psi, 3, 3))
    diags.append(Diagnostic("decomposition_residual_zero", decomp.is_valid, len(decomp.residual)))
    rq = gram_rank(decomp.Q, decomp.last_block)
    rqp = gram_rank(decomp.Qprime, decomp.first_block)
    diags.append(Diagnostic("gram_rank_Q", rq == 3, rq))
    diags.append(Diagnostic("gram_rank_Qprime", rqp == 3, rqp))
    if not decomp.is_valid:
        return GenericityReport(rq, rqp, 0, False, 0.0, False, tuple(diags), seed=seed)

    raw = solve_isolated_singularities(decomp, tolerance)
    classified = []
    for p in raw:
        try:
            classified.append(classify_point(psi, p, tolerance))
        except ValueError:
            classified.append(p)
    distinct = distinct_points(classified, sep_threshold)
    seps = [projective_distance(p.coordinates, q.coordinates)
            for p, q in itertools.combinations(classified, 2)]
    min_sep = min(seps) if seps else 0.0
    residual_ok = all(p.residual_psi < tolerance and p.residual_grad < tolerance for p in classified)
    all_odp = bool(classified) and all(p.is_odp for p in classified)
    disjoint = bool(classified) and not any(on_conics(p.coordinates, decomp, sep_threshold) for p in classified)

    diags.append(Diagnostic("reduction_nondegenerate", not any(p.degenerate for p in raw),
                            sum(p.degenerate for p in raw)))
    diags.append(Diagnostic("s_point_count", len(distinct) == EXPECTED_POINTS, len(distinct)))
    diags.append(Diagnostic("min_pairwise_separation", min_sep > sep_threshold, min_sep))
    diags.append(Diagnostic("residuals_below_tolerance", residual_ok,
                            max((max(p.residual_psi, p.residual_grad) for p in classified), default=0.0)))
    diags.append(Diagnostic("all_odp", all_odp,
                            [p.hessian_rank for p in classified]))
    diags.append(Diagnostic("disjoint_from_conics", disjoint,
                            sum(on_conics(p.coordinates, decomp, sep_threshold) for p in classified)))

    off: list[SingularPoint] = []
    if probe:
        off = probe_off_hyperplane(psi, starts=probe_starts, seed=0, tolerance=tolerance)
        diags.append(Diagnostic("no_singular_points_off_x4_hyperplane", not off, len(off)))

    return GenericityReport(
        gram_rank_Q=rq,
        gram_rank_Qprime=rqp,
        s_point_count=len(distinct),
        all_odp=all_odp,
        min_pairwise_separation=min_sep,
        disjoint_from_conics=disjoint,
        diagnostics=tuple(diags),
        points=tuple(classified),
        off_hyperplane_points=tuple(off),
        seed=seed,
    )
