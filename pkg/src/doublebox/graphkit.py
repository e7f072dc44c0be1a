"""Multigraphs for the (m, b, n) two-loop family and the cuts behind Symanzik polynomials.

Vertex convention for ``build_family_graph(m, b, n)``: vertex 1 and vertex 2
are the two trivalent vertices.  The three strands run from vertex 1 to
vertex 2; their interior (subdivision) vertices are numbered consecutively
along the first strand, then the middle strand, then the last strand.  Edge
ids run 1..m along the first strand, m+1..m+b along the middle strand and
m+b+1..m+b+n along the last strand, each strand traversed from vertex 1 to
vertex 2.  For b = 1 this matches the edge variables x_1..x_{m+n+1}.

Polynomials produced here use one variable per edge, ordered by increasing
edge id: variable index ``i`` is the ``i``-th smallest edge id.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .exactpoly import SparsePoly

Edge = tuple[int, int, int]  # (id, endpoint_a, endpoint_b)


class _UnionFind:
    def __init__(self, items: Iterable[int]):
        self.parent = {v: v for v in items}

    def find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


@dataclass(frozen=True)
class TwoLoopGraph:
    """A finite multigraph with labeled vertices and edges.

    Despite the name, any multigraph can be represented (the minors used in
    contraction-deletion checks have other loop numbers); operations that
    need loop number 2 check it themselves.
    """

    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    family: tuple[int, int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))
        object.__setattr__(self, "edges", tuple(
            sorted((int(k), int(a), int(b)) for k, a, b in self.edges)
        ))
        if self.family is not None:
            object.__setattr__(self, "family", tuple(int(x) for x in self.family))
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        ids = [e[0] for e in self.edges]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate edge ids")
        vs = set(self.vertices)
        for k, a, b in self.edges:
            if a not in vs or b not in vs:
                raise ValueError(f"edge {k} has an endpoint outside the vertex set")

    @property
    def edge_ids(self) -> tuple[int, ...]:
        return tuple(e[0] for e in self.edges)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    def edge(self, edge_id: int) -> Edge:
        for e in self.edges:
            if e[0] == edge_id:
                return e
        raise KeyError(f"unknown edge id {edge_id}")

    def variable_index(self, edge_id: int) -> int:
        try:
            return self.edge_ids.index(edge_id)
        except ValueError:
            raise KeyError(f"unknown edge id {edge_id}") from None

    def component_count(self, removed: Iterable[int] = ()) -> int:
        return cut_classify(self, removed).component_count

    def is_connected(self) -> bool:
        return self.component_count() == 1

    @property
    def loop_number(self) -> int:
        return self.num_edges - self.num_vertices + self.component_count()

    def is_self_loop(self, edge_id: int) -> bool:
        _, a, b = self.edge(edge_id)
        return a == b

    def is_bridge(self, edge_id: int) -> bool:
        self.edge(edge_id)
        return self.component_count([edge_id]) > self.component_count()

    def delete_edge(self, edge_id: int) -> "TwoLoopGraph":
        self.edge(edge_id)
        return TwoLoopGraph(self.vertices, tuple(e for e in self.edges if e[0] != edge_id))

    def contract_edge(self, edge_id: int) -> "TwoLoopGraph":
        """Merge the endpoints of a non-loop edge; parallel edges may become loops."""
        _, a, b = self.edge(edge_id)
        if a == b:
            raise ValueError(f"edge {edge_id} is a self-loop and cannot be contracted")
        keep, gone = min(a, b), max(a, b)
        edges = []
        for k, u, v in self.edges:
            if k == edge_id:
                continue
            edges.append((k, keep if u == gone else u, keep if v == gone else v))
        return TwoLoopGraph(tuple(v for v in self.vertices if v != gone), tuple(edges))

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"id": k, "ends": [a, b]} for k, a, b in self.edges],
            "family": list(self.family) if self.family is not None else None,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TwoLoopGraph":
        fam = data.get("family")
        return cls(
            tuple(data["vertices"]),
            tuple((e["id"], e["ends"][0], e["ends"][1]) for e in data["edges"]),
            tuple(fam) if fam is not None else None,
        )


@dataclass(frozen=True)
class CutResult:
    removed_edges: frozenset[int]
    component_count: int
    component_vertex_sets: tuple[frozenset[int], ...]
    is_forest: bool


def build_family_graph(m: int, b: int, n: int) -> TwoLoopGraph:
    """The two-loop graph with three strands of m, b and n edges between two vertices."""
    for name, val in (("m", m), ("b", b), ("n", n)):
        if not isinstance(val, int) or val < 1:
            raise ValueError(f"{name} must be a positive integer, got {val!r}")
    u, v = 1, 2
    next_vertex = 3
    next_edge = 1
    vertices = [u, v]
    edges: list[Edge] = []
    for length in (m, b, n):
        interior = list(range(next_vertex, next_vertex + length - 1))
        next_vertex += length - 1
        vertices.extend(interior)
        path = [u] + interior + [v]
        for a, c in zip(path, path[1:]):
            edges.append((next_edge, a, c))
            next_edge += 1
    return TwoLoopGraph(tuple(vertices), tuple(edges), (m, b, n))


def cut_classify(g: TwoLoopGraph, removed: Iterable[int]) -> CutResult:
    removed = frozenset(int(e) for e in removed)
    unknown = removed - set(g.edge_ids)
    if unknown:
        raise KeyError(f"unknown edge id(s) {sorted(unknown)}")
    uf = _UnionFind(g.vertices)
    acyclic = True
    for k, a, b in g.edges:
        if k in removed:
            continue
        if not uf.union(a, b):
            acyclic = False
    groups: dict[int, set[int]] = {}
    for v in g.vertices:
        groups.setdefault(uf.find(v), set()).add(v)
    comps = tuple(sorted((frozenset(s) for s in groups.values()), key=min))
    return CutResult(removed, len(comps), comps, acyclic)


def _require_two_loops(g: TwoLoopGraph) -> None:
    if not g.is_connected():
        raise ValueError("graph is not connected")
    if g.loop_number != 2:
        raise ValueError(f"expected loop number 2, got {g.loop_number}")


@lru_cache(maxsize=256)
def first_symanzik_enumerative(g: TwoLoopGraph) -> SparsePoly:
    """Sum of x_i x_j over edge pairs whose removal leaves a spanning tree."""
    _require_two_loops(g)
    nv = g.num_edges
    terms = {}
    for i, j in itertools.combinations(range(nv), 2):
        cut = cut_classify(g, (g.edge_ids[i], g.edge_ids[j]))
        if cut.is_forest and cut.component_count == 1:
            exp = [0] * nv
            exp[i] = exp[j] = 1
            terms[tuple(exp)] = 1
    return SparsePoly(nv, terms)


def _determinant(matrix: Sequence[Sequence[SparsePoly]], nvars: int) -> SparsePoly:
    # Laplace expansion row by row with memoization over used-column sets.
    size = len(matrix)
    layer: dict[int, SparsePoly] = {0: SparsePoly.one(nvars)}
    for r in range(size):
        nxt: dict[int, SparsePoly] = {}
        for used, acc in layer.items():
            for c in range(size):
                if used >> c & 1 or matrix[r][c].is_zero():
                    continue
                higher = bin(used >> (c + 1)).count("1")
                term = acc * matrix[r][c]
                if higher % 2:
                    term = -term
                key = used | (1 << c)
                nxt[key] = nxt[key] + term if key in nxt else term
        layer = nxt
    return layer.get((1 << size) - 1, SparsePoly.zero(nvars))


def kirchhoff_polynomial(g: TwoLoopGraph) -> SparsePoly:
    """Reduced-Laplacian determinant: sum over spanning trees T of prod_{e in T} a_e."""
    if not g.is_connected():
        raise ValueError("graph is not connected")
    nv = g.num_edges
    index = {v: i for i, v in enumerate(g.vertices[1:])}
    size = len(index)
    zero = SparsePoly.zero(nv)
    lap = [[zero] * size for _ in range(size)]
    for pos, (_, a, b) in enumerate(g.edges):
        if a == b:
            continue
        w = SparsePoly.var(nv, pos)
        ia, ib = index.get(a), index.get(b)
        if ia is not None:
            lap[ia][ia] = lap[ia][ia] + w
        if ib is not None:
            lap[ib][ib] = lap[ib][ib] + w
        if ia is not None and ib is not None:
            lap[ia][ib] = lap[ia][ib] - w
            lap[ib][ia] = lap[ib][ia] - w
    return _determinant(lap, nv)


def first_symanzik_matrix_tree(g: TwoLoopGraph) -> SparsePoly:
    """First Symanzik polynomial via the matrix-tree theorem.

    The Kirchhoff polynomial in weights a_e is converted by sending each
    spanning-tree monomial prod_{e in T} a_e to prod_{e not in T} x_e
    (equivalently prod_e x_e * K(1/x)).  Works for any connected multigraph.
    """
    kirchhoff = kirchhoff_polynomial(g)
    terms = {}
    for exp, c in kirchhoff.terms.items():
        if any(e > 1 for e in exp):
            raise ArithmeticError("matrix-tree determinant is not multilinear")
        terms[tuple(1 - e for e in exp)] = c
    return SparsePoly(g.num_edges, terms)


@lru_cache(maxsize=256)
def two_forest_cuts(g: TwoLoopGraph) -> tuple[tuple[tuple[int, int, int], tuple[frozenset[int], frozenset[int]]], ...]:
    """Edge triples whose removal leaves a spanning 2-forest, with its two vertex sets."""
    _require_two_loops(g)
    out = []
    for triple in itertools.combinations(g.edge_ids, 3):
        cut = cut_classify(g, triple)
        if cut.is_forest and cut.component_count == 2:
            out.append((triple, cut.component_vertex_sets))
    return tuple(out)


def lift_to_edges(p: SparsePoly, source: TwoLoopGraph, target: TwoLoopGraph) -> SparsePoly:
    """Re-express a polynomial in ``source``'s edge variables in ``target``'s."""
    positions = [target.variable_index(k) for k in source.edge_ids]
    return p.embed(target.num_edges, positions)


def family_closed_form_phi(m: int, n: int) -> SparsePoly:
    """x_{m+1}(sum of all other variables) + (x_1+..+x_m)(x_{m+2}+..+x_{m+n+1})."""
    nv = m + n + 1
    xs = SparsePoly.variables(nv)
    zero = SparsePoly.zero(nv)
    first = sum(xs[:m], zero)
    last = sum(xs[m + 1:], zero)
    return xs[m] * (first + last) + first * last
