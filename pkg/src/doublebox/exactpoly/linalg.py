"""Dense linear algebra over the rationals: rank, kernels, subspace intersection."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .poly import as_rational

Vector = tuple[Fraction, ...]


def _bitsize(x: Fraction) -> int:
    return x.numerator.bit_length() + x.denominator.bit_length()


@dataclass(frozen=True)
class RatMatrix:
    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )
        object.__setattr__(self, "entries", tuple(as_rational(e) for e in self.entries))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "RatMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise ValueError("ragged rows")
        return cls(len(rows), cols, tuple(x for r in rows for x in r))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols, (Fraction(0),) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls(n, n, tuple(Fraction(int(i == j)) for i in range(n) for j in range(n)))

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "RatMatrix":
        return RatMatrix(
            self.cols, self.rows,
            tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)),
        )

    def matvec(self, v: Sequence) -> Vector:
        if len(v) != self.cols:
            raise ValueError("dimension mismatch")
        return tuple(sum((a * b for a, b in zip(self.row(i), v)), Fraction(0))
                     for i in range(self.rows))

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch")
        t = other.transpose()
        return RatMatrix(self.rows, other.cols, tuple(
            sum((a * b for a, b in zip(self.row(i), t.row(j))), Fraction(0))
            for i in range(self.rows) for j in range(other.cols)
        ))

    def rank(self) -> int:
        return rank(self)

    def kernel_basis(self) -> list[Vector]:
        return kernel_basis(self)

    def to_json(self) -> list[list[str]]:
        return [[str(x) for x in self.row(i)] for i in range(self.rows)]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[str]]) -> "RatMatrix":
        return cls.from_rows([[Fraction(x) for x in r] for r in data])


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns.

    Pivots are chosen per column as the candidate with the smallest
    numerator+denominator bit length, which keeps fraction growth down.
    """
    m = [[as_rational(x) for x in r] for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        best = None
        for i in range(r, len(m)):
            if m[i][c]:
                if best is None or _bitsize(m[i][c]) < _bitsize(m[best][c]):
                    best = i
        if best is None:
            continue
        m[r], m[best] = m[best], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        prow = m[r]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], prow)]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def _rows_of(m) -> tuple[list[list[Fraction]], int]:
    if isinstance(m, RatMatrix):
        return m.to_rows(), m.cols
    rows = [list(r) for r in m]
    return rows, (len(rows[0]) if rows else 0)


def rank(m) -> int:
    rows, ncols = _rows_of(m)
    return len(rref(rows, ncols)[1])


def kernel_basis(m) -> list[Vector]:
    """Basis of the right null space, one vector per free column."""
    rows, ncols = _rows_of(m)
    reduced, pivots = rref(rows, ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            v[pc] = -row[free]
        basis.append(tuple(v))
    return basis


def span_basis(vectors: Sequence[Sequence]) -> list[Vector]:
    """Canonical (row-reduced) basis of the span of ``vectors``."""
    vectors = [list(v) for v in vectors]
    if not vectors:
        return []
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise ValueError("vectors have different dimensions")
    reduced, _ = rref(vectors, dims.pop())
    return [tuple(r) for r in reduced]


def span_dimension(vectors: Sequence[Sequence]) -> int:
    return len(span_basis(vectors))


def subspace_intersection(basis_a: Sequence[Sequence], basis_b: Sequence[Sequence]) -> list[Vector]:
    """Canonical basis of span(A) ∩ span(B)."""
    dims = {len(v) for v in list(basis_a) + list(basis_b)}
    if len(dims) > 1:
        raise ValueError("dimension mismatch between subspaces")
    if not basis_a or not basis_b:
        return []
    n = dims.pop()
    a = [list(map(as_rational, v)) for v in basis_a]
    b = [list(map(as_rational, v)) for v in basis_b]
    # columns: a_1..a_k, -b_1..-b_l ; kernel vectors give a-combinations in the intersection
    system = [[v[i] for v in a] + [-v[i] for v in b] for i in range(n)]
    combos = kernel_basis(system)
    k = len(a)
    vectors = []
    for c in combos:
        vectors.append([sum((c[j] * a[j][i] for j in range(k)), Fraction(0)) for i in range(n)])
    return span_basis(vectors)
