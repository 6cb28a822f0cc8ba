"""Immutable dense integer matrices with exact arithmetic.

Entries are plain Python ints, so nothing ever overflows.  Every operation
returns a new :class:`IntMatrix`; the elementary operations are the three
unimodular moves (add a multiple, swap, negate) used by the SNF engine and
the reduction pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union


class DimensionError(ValueError):
    """Raised on ragged input or incompatible shapes."""


@dataclass(frozen=True)
class AddMultiple:
    """Row (or column) ``target += factor * source``."""

    target: int
    source: int
    factor: int


@dataclass(frozen=True)
class Swap:
    first: int
    second: int


@dataclass(frozen=True)
class Negate:
    index: int


ElementaryOp = Union[AddMultiple, Swap, Negate]


class IntMatrix:
    """A rows x cols matrix of arbitrary-precision integers."""

    __slots__ = ("_rows", "rows", "cols")

    def __init__(self, rows: Iterable[Iterable[int]]):
        data = tuple(tuple(int(x) for x in r) for r in rows)
        if not data or not data[0]:
            raise DimensionError("matrix must have at least one entry")
        width = len(data[0])
        for r in data:
            if len(r) != width:
                raise DimensionError("ragged rows: expected length %d, got %d" % (width, len(r)))
        object.__setattr__(self, "_rows", data)
        object.__setattr__(self, "rows", len(data))
        object.__setattr__(self, "cols", width)

    def __setattr__(self, name, value):
        raise AttributeError("IntMatrix is immutable")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, values: Sequence[int]) -> "IntMatrix":
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def block_diag(cls, blocks: Sequence["IntMatrix"]) -> "IntMatrix":
        n = sum(b.rows for b in blocks)
        m = sum(b.cols for b in blocks)
        out = [[0] * m for _ in range(n)]
        r0 = c0 = 0
        for b in blocks:
            for i, row in enumerate(b._rows):
                out[r0 + i][c0:c0 + b.cols] = row
            r0 += b.rows
            c0 += b.cols
        return cls(out)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def entries(self) -> tuple[int, ...]:
        """Row-major flat view."""
        return tuple(x for r in self._rows for x in r)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix(zip(*self._rows))

    def row(self, i: int) -> tuple[int, ...]:
        return self._rows[i]

    def col(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self._rows)

    def diagonal(self) -> tuple[int, ...]:
        return tuple(self._rows[i][i] for i in range(min(self.rows, self.cols)))

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self._rows]

    def is_diagonal(self) -> bool:
        return all(x == 0 for i, r in enumerate(self._rows) for j, x in enumerate(r) if i != j)

    def __getitem__(self, key):
        i, j = key
        return self._rows[i][j]

    def __iter__(self):
        return iter(self._rows)

    def __eq__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self):
        return hash(self._rows)

    def __repr__(self):
        return "IntMatrix(%r)" % (self.tolist(),)

    def __str__(self):
        return to_text(self)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        return mat_mul(self, other)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise DimensionError("shape mismatch %s vs %s" % (self.shape, other.shape))
        return IntMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)])

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-1) * other

    def __rmul__(self, scalar: int) -> "IntMatrix":
        return IntMatrix([[scalar * x for x in r] for r in self._rows])

    def __neg__(self) -> "IntMatrix":
        return (-1) * self


def mat_from_rows(rows: Sequence[Sequence[int]]) -> IntMatrix:
    return IntMatrix(rows)


def _check_index(i: int, n: int, what: str) -> None:
    if not 0 <= i < n:
        raise IndexError("%s index %d out of range [0, %d)" % (what, i, n))


def _apply_to_rows(rows: list[list[int]], op: ElementaryOp) -> None:
    """In-place elementary action on a list of row lists."""
    n = len(rows)
    if isinstance(op, AddMultiple):
        _check_index(op.target, n, "row")
        _check_index(op.source, n, "row")
        if op.factor == 0:
            raise ValueError("add-multiple needs a nonzero factor")
        if op.target == op.source:
            raise ValueError("add-multiple needs distinct rows")
        src = rows[op.source]
        rows[op.target] = [a + op.factor * b for a, b in zip(rows[op.target], src)]
    elif isinstance(op, Swap):
        _check_index(op.first, n, "row")
        _check_index(op.second, n, "row")
        rows[op.first], rows[op.second] = rows[op.second], rows[op.first]
    elif isinstance(op, Negate):
        _check_index(op.index, n, "row")
        rows[op.index] = [-a for a in rows[op.index]]
    else:
        raise TypeError("unknown elementary operation %r" % (op,))


def elementary_row_op(M: IntMatrix, op: ElementaryOp) -> IntMatrix:
    """Left-multiply ``M`` by the elementary matrix described by ``op``."""
    rows = M.tolist()
    _apply_to_rows(rows, op)
    return IntMatrix(rows)


def elementary_col_op(M: IntMatrix, op: ElementaryOp) -> IntMatrix:
    """Right-multiply ``M`` by the elementary matrix described by ``op``."""
    cols = M.T.tolist()
    _apply_to_rows(cols, op)
    return IntMatrix(cols).T


def mat_mul(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    if A.cols != B.rows:
        raise DimensionError("cannot multiply %dx%d by %dx%d" % (A.rows, A.cols, B.rows, B.cols))
    bt = list(zip(*B))
    return IntMatrix([[sum(a * b for a, b in zip(r, c)) for c in bt] for r in A])


def det(M: IntMatrix) -> int:
    """Exact determinant by Bareiss fraction-free elimination."""
    if not M.is_square:
        raise DimensionError("determinant of non-square %dx%d matrix" % M.shape)
    a = M.tolist()
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                # exact division is guaranteed by Sylvester's identity
                row_i[j] = (pivot * row_i[j] - aik * row_k[j]) // prev
        prev = pivot
    return sign * a[n - 1][n - 1]


def is_unimodular(M: IntMatrix) -> bool:
    return M.is_square and det(M) in (1, -1)


def delete_row_col(M: IntMatrix, i: int, j: int) -> IntMatrix:
    _check_index(i, M.rows, "row")
    _check_index(j, M.cols, "column")
    return IntMatrix([[x for c, x in enumerate(r) if c != j] for rr, r in enumerate(M) if rr != i])


def delete_indices(M: IntMatrix, drop: Iterable[int]) -> IntMatrix:
    """Remove the same set of row and column positions from a square matrix."""
    drop = set(drop)
    keep = [i for i in range(M.rows) if i not in drop]
    return IntMatrix([[M[i, j] for j in keep] for i in keep])


def to_text(M: IntMatrix) -> str:
    """Serialize as ``"rows cols"`` followed by whitespace-separated rows."""
    lines = ["%d %d" % M.shape]
    lines.extend(" ".join(str(x) for x in r) for r in M)
    return "\n".join(lines) + "\n"


def from_text(text: str) -> IntMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix text")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError("header must be 'rows cols', got %r" % lines[0])
    rows, cols = (int(x) for x in header)
    body = [[int(x) for x in ln.split()] for ln in lines[1:]]
    if len(body) != rows:
        raise ValueError("expected %d rows, found %d" % (rows, len(body)))
    for r in body:
        if len(r) != cols:
            raise ValueError("expected %d columns, found a row of %d" % (cols, len(r)))
    return IntMatrix(body)


def read_matrix(path) -> IntMatrix:
    with open(path) as fh:
        return from_text(fh.read())


def write_matrix(M: IntMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_text(M))
