"""
Helpers over sympy ``DomainMatrix`` for exact subspace computations.

Matrix spaces are handled through their vectorisation (row-major), and a
space is always stored as the nonzero rows of its reduced row echelon form,
which makes span bases canonical. Positions exposed to callers are 1-based
``(row, col)`` pairs to match the ``e_ij`` matrix-unit vocabulary.
"""

from __future__ import annotations

from typing import Any, Iterable, List, Optional, Sequence, Set, Tuple

from sympy.polys.matrices import DomainMatrix

Position = Tuple[int, int]


def matrix(rows: Sequence[Sequence[Any]], n_rows: int, n_cols: int, domain) -> DomainMatrix:
    """Build a DomainMatrix from already-converted domain elements."""
    data = [list(r) for r in rows]
    if len(data) != n_rows or any(len(r) != n_cols for r in data):
        raise ValueError(f"expected a {n_rows}x{n_cols} matrix")
    return DomainMatrix(data, (n_rows, n_cols), domain)


def convert(rows: Sequence[Sequence[Any]], domain) -> DomainMatrix:
    """Build a DomainMatrix converting python ints / domain elements."""
    data = [[domain.convert(x) for x in r] for r in rows]
    n_cols = len(data[0]) if data else 0
    return DomainMatrix(data, (len(data), n_cols), domain)


def zeros(n_rows: int, n_cols: int, domain) -> DomainMatrix:
    return DomainMatrix.zeros((n_rows, n_cols), domain)


def identity(n: int, domain) -> DomainMatrix:
    return DomainMatrix.eye(n, domain)


def unit(n_rows: int, n_cols: int, pos: Position, domain) -> DomainMatrix:
    """The matrix unit ``e_{pos}`` (1-based)."""
    rows = [[domain.zero] * n_cols for _ in range(n_rows)]
    rows[pos[0] - 1][pos[1] - 1] = domain.one
    return DomainMatrix(rows, (n_rows, n_cols), domain)


def to_rows(m: DomainMatrix) -> List[List[Any]]:
    return m.to_list()


def entry(m: DomainMatrix, pos: Position) -> Any:
    return m.to_list()[pos[0] - 1][pos[1] - 1]


def support(m: DomainMatrix) -> Set[Position]:
    """1-based positions of the nonzero entries."""
    return {
        (i + 1, j + 1)
        for i, row in enumerate(m.to_list())
        for j, x in enumerate(row)
        if x != m.domain.zero
    }


def nonzero_entries(m: DomainMatrix) -> List[Tuple[int, int, Any]]:
    return [
        (i + 1, j + 1, x)
        for i, row in enumerate(m.to_list())
        for j, x in enumerate(row)
        if x != m.domain.zero
    ]


def is_zero(m: DomainMatrix) -> bool:
    return all(x == m.domain.zero for row in m.to_list() for x in row)


def scale(m: DomainMatrix, c: Any) -> DomainMatrix:
    rows = [[x * c for x in row] for row in m.to_list()]
    return DomainMatrix(rows, m.shape, m.domain)


def rank(m: DomainMatrix) -> int:
    if m.shape[0] == 0 or m.shape[1] == 0:
        return 0
    return m.rank()


def vectorize(m: DomainMatrix) -> List[Any]:
    return [x for row in m.to_list() for x in row]


def unvectorize(vec: Sequence[Any], n_rows: int, n_cols: int, domain) -> DomainMatrix:
    rows = [list(vec[i * n_cols:(i + 1) * n_cols]) for i in range(n_rows)]
    return DomainMatrix(rows, (n_rows, n_cols), domain)


def row_space(vectors: Iterable[Sequence[Any]], length: int, domain) -> List[List[Any]]:
    """Canonical basis (nonzero RREF rows) of the span of ``vectors``."""
    data = [list(v) for v in vectors]
    if not data or length == 0:
        return []
    reduced, pivots = DomainMatrix(data, (len(data), length), domain).rref()
    rows = reduced.to_list()
    return [rows[i] for i in range(len(pivots))]


def solve(a: DomainMatrix, b: Sequence[Any]) -> Optional[List[Any]]:
    """One solution ``x`` of ``a x = b`` (free variables zero), or ``None``."""
    n_rows, n_cols = a.shape
    domain = a.domain
    if n_cols == 0:
        return [] if all(x == domain.zero for x in b) else None
    if n_rows == 0:
        return [domain.zero] * n_cols
    aug = [list(row) + [b[i]] for i, row in enumerate(a.to_list())]
    reduced, pivots = DomainMatrix(aug, (n_rows, n_cols + 1), domain).rref()
    if n_cols in pivots:
        return None
    rows = reduced.to_list()
    x = [domain.zero] * n_cols
    for i, col in enumerate(pivots):
        x[col] = rows[i][n_cols]
    return x


def coordinates(vec: Sequence[Any], basis: Sequence[Sequence[Any]], domain) -> Optional[List[Any]]:
    """Coefficients expressing ``vec`` in ``basis`` (rows), or ``None``."""
    if not basis:
        return [] if all(x == domain.zero for x in vec) else None
    length = len(vec)
    columns = [[basis[k][i] for k in range(len(basis))] for i in range(length)]
    return solve(DomainMatrix(columns, (length, len(basis)), domain), list(vec))


def in_span(vec: Sequence[Any], basis: Sequence[Sequence[Any]], domain) -> bool:
    return coordinates(vec, basis, domain) is not None


def nullspace(m: DomainMatrix) -> List[List[Any]]:
    """Basis of ``{x : m x = 0}`` as a list of vectors."""
    n_rows, n_cols = m.shape
    domain = m.domain
    if n_cols == 0:
        return []
    if n_rows == 0:
        return identity(n_cols, domain).to_list()
    kernel = m.nullspace()
    if kernel.shape[0] == 0:
        return []
    return [row for row in kernel.to_list() if any(x != domain.zero for x in row)]


class MatrixSpace:
    """
    Subspace of ``n_rows x n_cols`` matrices with a canonical RREF basis.

    Parameters
    ----------
    n_rows, n_cols : int
        Matrix shape.
    domain
        sympy field domain.
    mats : iterable of DomainMatrix
        Spanning set.
    """

    def __init__(self, n_rows: int, n_cols: int, domain, mats: Iterable[DomainMatrix] = ()) -> None:
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.domain = domain
        self._rows = row_space((vectorize(m) for m in mats), n_rows * n_cols, domain)

    @classmethod
    def from_vectors(cls, n_rows: int, n_cols: int, domain, vectors: Iterable[Sequence[Any]]) -> "MatrixSpace":
        space = cls(n_rows, n_cols, domain)
        space._rows = row_space(vectors, n_rows * n_cols, domain)
        return space

    @property
    def dim(self) -> int:
        return len(self._rows)

    @property
    def vectors(self) -> List[List[Any]]:
        return [list(r) for r in self._rows]

    @property
    def basis(self) -> List[DomainMatrix]:
        return [unvectorize(r, self.n_rows, self.n_cols, self.domain) for r in self._rows]

    def contains(self, m: DomainMatrix) -> bool:
        return in_span(vectorize(m), self._rows, self.domain)

    def coordinates(self, m: DomainMatrix) -> Optional[List[Any]]:
        return coordinates(vectorize(m), self._rows, self.domain)

    def contains_space(self, other: "MatrixSpace") -> bool:
        return all(in_span(v, self._rows, self.domain) for v in other._rows)

    def __add__(self, other: "MatrixSpace") -> "MatrixSpace":
        return MatrixSpace.from_vectors(
            self.n_rows, self.n_cols, self.domain, self._rows + other._rows
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MatrixSpace):
            return NotImplemented
        return (self.n_rows, self.n_cols) == (other.n_rows, other.n_cols) and self._rows == other._rows

    def support(self) -> Set[Position]:
        """Union of the supports of the basis matrices."""
        cols = self.n_cols
        return {
            (k // cols + 1, k % cols + 1)
            for row in self._rows
            for k, x in enumerate(row)
            if x != self.domain.zero
        }

    def project(self, positions: Sequence[Position]) -> List[List[Any]]:
        """Canonical basis of the projection onto the given coordinates."""
        idx = [(i - 1) * self.n_cols + (j - 1) for i, j in positions]
        return row_space(([row[k] for k in idx] for row in self._rows), len(idx), self.domain)


__all__ = [
    "MatrixSpace",
    "Position",
    "convert",
    "coordinates",
    "entry",
    "identity",
    "in_span",
    "is_zero",
    "matrix",
    "nonzero_entries",
    "nullspace",
    "rank",
    "row_space",
    "scale",
    "solve",
    "support",
    "to_rows",
    "unit",
    "unvectorize",
    "vectorize",
    "zeros",
]
