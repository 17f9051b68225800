"""Sparse GF(2) boundary matrices stored column-major.

Columns hold strictly ascending row indices. Indices are 1-based and 0 is
the "empty column" sentinel returned by :meth:`BoundaryMatrix.low`.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Iterable, Sequence

from .metrics import TraceCounters


class MatrixFormatError(ValueError):
    """Raised for malformed or non-upper-triangular boundary matrices."""


class BoundaryMatrix:
    """An ``m x m`` strictly upper-triangular matrix over GF(2).

    Distinct columns may be mutated concurrently; a column must not be read
    while another thread is writing it.
    """

    def __init__(self, columns: Sequence[Iterable[int]], dims: Sequence[int] | None = None):
        m = len(columns)
        self._cols: list[list[int]] = []
        for j, col in enumerate(columns, start=1):
            rows = sorted(set(col))
            if rows and (rows[0] < 1 or rows[-1] >= j):
                raise MatrixFormatError(f"column {j} is not strictly upper-triangular: {rows}")
            self._cols.append(rows)
        if dims is None:
            dims = [0] * m
        if len(dims) != m:
            raise ValueError(f"expected {m} dimensions, got {len(dims)}")
        self.dims: list[int] = list(dims)
        self._nnz = sum(len(c) for c in self._cols)
        self._nnz_lock = threading.Lock()

    @classmethod
    def from_complex(cls, simplices: Sequence[Sequence[int]]) -> "BoundaryMatrix":
        """Build the boundary matrix of an ordered list of vertex tuples.

        The ordering must be compatible: each face appears before its cofaces.
        """
        index = {tuple(s): j for j, s in enumerate(simplices, start=1)}
        columns = []
        for j, s in enumerate(simplices, start=1):
            s = tuple(s)
            if len(s) == 1:
                columns.append([])
                continue
            col = []
            for k in range(len(s)):
                face = s[:k] + s[k + 1:]
                i = index.get(face)
                if i is None or i >= j:
                    raise MatrixFormatError(f"face {face} of simplex {j} missing or out of order")
                col.append(i)
            columns.append(col)
        return cls(columns, [len(s) - 1 for s in simplices])

    @property
    def m(self) -> int:
        return len(self._cols)

    @property
    def nnz(self) -> int:
        return self._nnz

    @property
    def max_dim(self) -> int:
        return max(self.dims, default=0)

    def column(self, j: int) -> list[int]:
        return self._cols[j - 1]

    def columns(self) -> list[list[int]]:
        return [list(c) for c in self._cols]

    def low(self, j: int) -> int:
        if not 1 <= j <= self.m:
            raise IndexError(f"column {j} out of range 1..{self.m}")
        col = self._cols[j - 1]
        return col[-1] if col else 0

    def lows(self) -> list[int]:
        return [c[-1] if c else 0 for c in self._cols]

    def add_columns(self, src: int, dst: int, counters: TraceCounters | None = None) -> list[int]:
        """Replace column ``dst`` by ``dst + src`` over GF(2).

        Every row where at least one operand is nonzero costs one XOR,
        so the count is the size of the union of both supports.
        """
        if src >= dst:
            raise ValueError(f"column addition must go left to right, got {src} -> {dst}")
        a = self._cols[src - 1]
        b = self._cols[dst - 1]
        acc = set(b)
        acc.symmetric_difference_update(a)
        new = sorted(acc)
        self._cols[dst - 1] = new
        with self._nnz_lock:
            self._nnz += len(new) - len(b)
        if counters is not None:
            counters.col_adds += 1
            counters.xor_ops += (len(a) + len(b) + len(new)) // 2
        return new

    def clear_column(self, j: int) -> None:
        old = self._cols[j - 1]
        self._cols[j - 1] = []
        with self._nnz_lock:
            self._nnz -= len(old)

    def copy(self) -> "BoundaryMatrix":
        return BoundaryMatrix(self._cols, self.dims)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BoundaryMatrix):
            return NotImplemented
        return self._cols == other._cols and self.dims == other.dims

    def __repr__(self) -> str:
        return f"BoundaryMatrix(m={self.m}, nnz={self.nnz})"


def compute_leftcol(matrix: BoundaryMatrix) -> list[int]:
    """Leftmost column holding a nonzero in each row (0 for an empty row)."""
    left = [0] * matrix.m
    for j in range(1, matrix.m + 1):
        for i in matrix.column(j):
            if left[i - 1] == 0:
                left[i - 1] = j
    return left


def compute_beta(matrix: BoundaryMatrix) -> list[int]:
    """Largest row whose leftmost nonzero sits in each column.

    Single left-to-right pass: each row is claimed by the first column that
    touches it, so the work is one visit per nonzero.
    """
    visited = bytearray(matrix.m + 1)
    beta = [0] * matrix.m
    for j in range(1, matrix.m + 1):
        best = 0
        for i in matrix.column(j):
            if not visited[i]:
                visited[i] = 1
                if i > best:
                    best = i
        beta[j - 1] = best
    return beta


def is_reduced(low: Sequence[int]) -> bool:
    """True when the nonzero entries of ``low`` are pairwise distinct."""
    seen = set()
    for v in low:
        if v:
            if v in seen:
                return False
            seen.add(v)
    return True


def write_matrix(matrix: BoundaryMatrix, path: str | Path) -> None:
    """Write ``m`` then ``j d i1 ... ik`` per column.

    Empty dimension-0 columns are omitted; an empty column of higher
    dimension is written as ``j d`` so that dimensions survive a round trip.
    """
    lines = [str(matrix.m)]
    for j in range(1, matrix.m + 1):
        col = matrix.column(j)
        d = matrix.dims[j - 1]
        if col or d > 0:
            lines.append(" ".join(map(str, [j, d, *col])))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path: str | Path) -> BoundaryMatrix:
    text = Path(path).read_text().split("\n")
    rows = [line.split() for line in text if line.strip()]
    if not rows or len(rows[0]) != 1:
        raise MatrixFormatError("first line must hold the matrix size m")
    try:
        m = int(rows[0][0])
        columns: list[list[int]] = [[] for _ in range(m)]
        dims = [0] * m
        for fields in rows[1:]:
            if len(fields) < 2:
                raise MatrixFormatError(f"column line needs at least 'j d': {' '.join(fields)}")
            j, d, *idx = (int(x) for x in fields)
            if not 1 <= j <= m:
                raise MatrixFormatError(f"column index {j} out of range 1..{m}")
            rows_j = idx
            if rows_j != sorted(set(rows_j)):
                raise MatrixFormatError(f"column {j}: row indices must be strictly ascending")
            columns[j - 1] = rows_j
            dims[j - 1] = d
    except ValueError as exc:
        if isinstance(exc, MatrixFormatError):
            raise
        raise MatrixFormatError(str(exc)) from exc
    return BoundaryMatrix(columns, dims)
