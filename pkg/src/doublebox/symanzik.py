"""Kinematic data, second Symanzik polynomials and their block decomposition.

For a graph of the (m, 1, n) family, with first block x_1..x_m, middle edge
x_{m+1} and last block x_{m+2}..x_{m+n+1}, the massive second Symanzik
polynomial splits as

    Psi = Q(first)·(x_{m+1} + sum(last)) + Q'(last)·(sum(first) + x_{m+1})
          + x_{m+1}·A,

    A = (x_1, .., x_{m+1}) · M · (x_{m+1}, .., x_{m+n+1})^T,   M[m, 0] = 0.

Every cubic monomial shape occurs in exactly one of the three pieces, so
``decompose`` reads Q, Q' and M off single coefficients and reports the
exact residual Psi - reconstruction.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .exactpoly import RatMatrix, SparsePoly, as_rational
from .graphkit import (
    TwoLoopGraph,
    cut_classify,
    first_symanzik_enumerative,
    two_forest_cuts,
)

NON_GENERIC_D1 = "d1-non-generic"

Q_FIRST = "q-first"
Q_LAST = "q-last"


def derive_seed(master: int, index: int) -> int:
    """Per-instance seed: first 8 bytes of sha256("<master>:<index>")."""
    digest = hashlib.sha256(f"{int(master)}:{int(index)}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def parse_signature(text: str | None, dimension: int) -> tuple[int, ...]:
    if text is None:
        return (1,) * dimension
    signs = []
    for ch in text.strip():
        if ch == "+":
            signs.append(1)
        elif ch in "-−":
            signs.append(-1)
        else:
            raise ValueError(f"bad signature character {ch!r}")
    if len(signs) != dimension:
        raise ValueError(f"signature has {len(signs)} entries but D = {dimension}")
    return tuple(signs)


def quadratic_form(vec: Sequence[Fraction], signature: Sequence[int]) -> Fraction:
    return sum((s * v * v for s, v in zip(signature, vec)), Fraction(0))


@dataclass(frozen=True)
class KinematicData:
    dimension: int
    signature: tuple[int, ...]
    momenta: Mapping[int, tuple[Fraction, ...]]
    masses_squared: Mapping[int, Fraction]
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        sig = tuple(int(s) for s in self.signature)
        if len(sig) != self.dimension or any(s not in (1, -1) for s in sig):
            raise ValueError("signature must be a list of ±1 of length D")
        momenta = {int(v): tuple(as_rational(x) for x in w) for v, w in self.momenta.items()}
        for v, w in momenta.items():
            if len(w) != self.dimension:
                raise ValueError(f"momentum at vertex {v} has length {len(w)}")
        total = [sum((w[i] for w in momenta.values()), Fraction(0)) for i in range(self.dimension)]
        if any(total):
            raise ValueError("momenta violate conservation (sum is nonzero)")
        object.__setattr__(self, "signature", sig)
        object.__setattr__(self, "momenta", dict(sorted(momenta.items())))
        object.__setattr__(self, "masses_squared", dict(sorted(
            (int(e), as_rational(m)) for e, m in self.masses_squared.items()
        )))
        object.__setattr__(self, "flags", tuple(self.flags))

    def check_graph(self, graph: TwoLoopGraph) -> None:
        if set(self.momenta) != set(graph.vertices):
            raise ValueError("kinematics must carry exactly one momentum per vertex")
        if set(self.masses_squared) != set(graph.edge_ids):
            raise ValueError("kinematics must carry exactly one mass per edge")

    def scaled_momenta(self, factor) -> "KinematicData":
        f = as_rational(factor)
        return replace(self, momenta={v: tuple(f * x for x in w) for v, w in self.momenta.items()})

    def to_json(self) -> dict:
        return {
            "D": self.dimension,
            "signature": list(self.signature),
            "momenta": {str(v): [str(x) for x in w] for v, w in self.momenta.items()},
            "masses2": {str(e): str(m) for e, m in self.masses_squared.items()},
            "flags": list(self.flags),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "KinematicData":
        return cls(
            int(data["D"]),
            tuple(data["signature"]),
            {int(v): tuple(Fraction(x) for x in w) for v, w in data["momenta"].items()},
            {int(e): Fraction(m) for e, m in data["masses2"].items()},
            tuple(data.get("flags", ())),
        )


def _random_rational(rng: np.random.Generator) -> Fraction:
    num = int(rng.integers(-10**4, 10**4, endpoint=True))
    den = int(rng.integers(1, 100, endpoint=True))
    return Fraction(num, den)


def sample_kinematics(
    graph: TwoLoopGraph,
    D: int,
    seed: int,
    signature: Sequence[int] | None = None,
    *,
    zero_momenta: bool = False,
    zero_masses: bool = False,
) -> KinematicData:
    """Seeded random rational momenta (one per vertex) and squared masses (one per edge).

    Numerators are drawn from [-10^4, 10^4], denominators from [1, 100]. The
    last vertex receives minus the sum of the others, so momentum is conserved.
    """
    if D < 1:
        raise ValueError("D must be at least 1")
    rng = np.random.default_rng(int(seed))
    verts = sorted(graph.vertices)
    momenta = {}
    for v in verts[:-1]:
        momenta[v] = tuple(Fraction(0) if zero_momenta else _random_rational(rng) for _ in range(D))
    momenta[verts[-1]] = tuple(-sum((momenta[v][i] for v in verts[:-1]), Fraction(0)) for i in range(D))
    masses = {e: Fraction(0) if zero_masses else _random_rational(rng) for e in graph.edge_ids}
    flags = (NON_GENERIC_D1,) if D == 1 else ()
    sig = tuple(signature) if signature is not None else (1,) * D
    return KinematicData(D, sig, momenta, masses, flags)


def cut_coefficient(
    graph: TwoLoopGraph, kin: KinematicData, triple: Sequence[int], component: int = 0
) -> Fraction:
    """Squared total momentum entering one side of a 2-forest cut."""
    cut = cut_classify(graph, triple)
    if len(cut.removed_edges) != 3 or not cut.is_forest or cut.component_count != 2:
        raise ValueError(f"edges {sorted(cut.removed_edges)} do not cut the graph into a 2-forest")
    side = cut.component_vertex_sets[component]
    flow = [sum((kin.momenta[v][i] for v in side), Fraction(0)) for i in range(kin.dimension)]
    return quadratic_form(flow, kin.signature)


def second_symanzik(graph: TwoLoopGraph, kin: KinematicData) -> SparsePoly:
    kin.check_graph(graph)
    nv = graph.num_edges
    terms = {}
    for triple, (side, _) in two_forest_cuts(graph):
        flow = [sum((kin.momenta[v][i] for v in side), Fraction(0)) for i in range(kin.dimension)]
        c = quadratic_form(flow, kin.signature)
        if c:
            exp = [0] * nv
            for k in triple:
                exp[graph.variable_index(k)] = 1
            terms[tuple(exp)] = c
    return SparsePoly(nv, terms)


def mass_form(graph: TwoLoopGraph, kin: KinematicData) -> SparsePoly:
    return SparsePoly.linear_form([kin.masses_squared[k] for k in graph.edge_ids])


def massive_second_symanzik(graph: TwoLoopGraph, kin: KinematicData) -> SparsePoly:
    """(sum_e m_e^2 x_e)·phi + psi."""
    kin.check_graph(graph)
    return mass_form(graph, kin) * first_symanzik_enumerative(graph) + second_symanzik(graph, kin)


# -- decomposition ------------------------------------------------------------


def _mono(nvars: int, *indices: int) -> tuple[int, ...]:
    exp = [0] * nvars
    for i in indices:
        exp[i] += 1
    return tuple(exp)


def _block_quadric(psi: SparsePoly, block: Sequence[int], partner: int) -> SparsePoly:
    nv = psi.nvars
    terms = {}
    for a_pos, a in enumerate(block):
        for b in block[a_pos:]:
            c = psi.coefficient(_mono(nv, a, b, partner))
            if c:
                terms[_mono(nv, a, b)] = c
    return SparsePoly(nv, terms)


@dataclass(frozen=True)
class SymanzikDecomposition:
    """Q, Q', the A-matrix and the exact residual of a block decomposition.

    ``convention`` records which block Q lives on: ``"q-first"`` puts Q on
    the first block x_1..x_m, ``"q-last"`` (double box only) puts Q on the
    last block x_5..x_7 and Q' on x_1..x_3.  ``A_matrix`` has rows indexed by
    x_1..x_{m+1} and columns by x_{m+1}..x_{m+n+1}.
    """

    m: int
    n: int
    Q: SparsePoly
    Qprime: SparsePoly
    A_matrix: RatMatrix
    residual: SparsePoly
    convention: str = Q_FIRST

    @property
    def nvars(self) -> int:
        return self.m + self.n + 1

    @property
    def middle(self) -> int:
        return self.m

    @property
    def first_block(self) -> tuple[int, ...]:
        return tuple(range(self.m))

    @property
    def last_block(self) -> tuple[int, ...]:
        return tuple(range(self.m + 1, self.m + self.n + 1))

    @property
    def first_quadric(self) -> SparsePoly:
        """The block quadric in x_1..x_m, whatever the naming convention."""
        return self.Q if self.convention == Q_FIRST else self.Qprime

    @property
    def last_quadric(self) -> SparsePoly:
        return self.Qprime if self.convention == Q_FIRST else self.Q

    @property
    def is_valid(self) -> bool:
        return self.residual.is_zero()

    def a_poly(self) -> SparsePoly:
        nv = self.nvars
        rows = list(self.first_block) + [self.middle]
        cols = [self.middle] + list(self.last_block)
        terms: dict = {}
        for r, i in enumerate(rows):
            for c, j in enumerate(cols):
                a = self.A_matrix[r, c]
                if a:
                    exp = _mono(nv, i, j)
                    terms[exp] = terms.get(exp, 0) + a
        return SparsePoly(nv, terms)

    def reconstruct(self) -> SparsePoly:
        nv = self.nvars
        xs = SparsePoly.variables(nv)
        zero = SparsePoly.zero(nv)
        s_first = sum((xs[i] for i in self.first_block), zero)
        s_last = sum((xs[i] for i in self.last_block), zero)
        mid = xs[self.middle]
        return (self.first_quadric * (mid + s_last)
                + self.last_quadric * (s_first + mid)
                + mid * self.a_poly())

    def bilinear_block(self) -> RatMatrix:
        """Rows x_1..x_{m+1}, columns x_{m+2}..x_{m+n+1}: the part of A that is
        bilinear in (first block + middle) × (last block)."""
        rows = [[self.A_matrix[r, c] for c in range(1, self.n + 1)] for r in range(self.m + 1)]
        return RatMatrix.from_rows(rows, self.n)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "convention": self.convention,
            "Q": self.Q.to_json(),
            "Qprime": self.Qprime.to_json(),
            "A_matrix": self.A_matrix.to_json(),
            "residual": self.residual.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SymanzikDecomposition":
        return cls(
            int(data["m"]), int(data["n"]),
            SparsePoly.from_json(data["Q"]),
            SparsePoly.from_json(data["Qprime"]),
            RatMatrix.from_json(data["A_matrix"]),
            SparsePoly.from_json(data["residual"]),
            data.get("convention", Q_FIRST),
        )


def decompose(psi: SparsePoly, m: int, n: int) -> SymanzikDecomposition:
    """Split a cubic in m+n+1 variables into Q, Q' and the A-matrix.

    Q is read from the coefficients of (first-block quadratic)·x_{m+1}, Q'
    from (last-block quadratic)·x_{m+1}, and A from the monomials containing
    x_{m+1} together with one variable of each side.  Whatever the three
    pieces fail to reproduce is returned as ``residual`` rather than raised.
    """
    if m < 1 or n < 1:
        raise ValueError("block sizes must be positive")
    nv = m + n + 1
    if psi.nvars != nv:
        raise ValueError(f"expected a polynomial in {nv} variables, got {psi.nvars}")
    if not psi.is_homogeneous(3):
        raise ValueError("decompose expects a homogeneous cubic")
    mid = m
    first = list(range(m))
    last = list(range(m + 1, nv))
    Q = _block_quadric(psi, first, mid)
    Qp = _block_quadric(psi, last, mid)
    rows = []
    for i in first + [mid]:
        row = []
        for j in [mid] + last:
            if i == mid and j == mid:
                row.append(Fraction(0))
            else:
                row.append(psi.coefficient(_mono(nv, i, j, mid)))
        rows.append(row)
    partial = SymanzikDecomposition(m, n, Q, Qp, RatMatrix.from_rows(rows), SparsePoly.zero(nv))
    residual = psi - partial.reconstruct()
    return replace(partial, residual=residual)


def swap_quadric_labels(d: SymanzikDecomposition) -> SymanzikDecomposition:
    """Swap the Q/Q' names between the two labelings of the double box.

    The graph-side convention puts Q on x_1..x_3; the singular-locus code puts Q on
    x_5..x_7.  Polynomial content and reconstruction are unchanged, and the
    map is an involution.
    """
    if (d.m, d.n) != (3, 3):
        raise ValueError("relabeling is defined for the (3,1,3) double box only")
    other = Q_LAST if d.convention == Q_FIRST else Q_FIRST
    return replace(d, Q=d.Qprime, Qprime=d.Q, convention=other)


def double_box_decomposition(graph: TwoLoopGraph, kin: KinematicData) -> tuple[SparsePoly, SymanzikDecomposition]:
    """Psi_{3,1,3} and its decomposition in the singular-locus labeling."""
    if graph.family != (3, 1, 3):
        raise ValueError("expected the (3,1,3) double box")
    psi = massive_second_symanzik(graph, kin)
    return psi, swap_quadric_labels(decompose(psi, 3, 3))
