"""Sequential reference reducers: the standard algorithm and the twist.

Both are single-threaded and serve as oracles for the parallel reducer.
"""

from __future__ import annotations

from .boundary import BoundaryMatrix
from .metrics import ReductionResult, Trace, TraceCounters


class _Sweep:
    """Shared bookkeeping for a column-by-column sweep."""

    def __init__(self, matrix: BoundaryMatrix, trace: Trace | None):
        self.matrix = matrix
        self.trace = trace
        m = matrix.m
        self.low = [0] + matrix.lows()
        self.pivot_of_row = [0] * (m + 1)
        self.column_adds = [0] * m
        self.cleared: set[int] = set()
        self.visited = bytearray(m + 1)
        self.unresolved = sum(1 for j in range(1, m + 1) if self.low[j])
        self.paired = 0
        self.estimate = set(range(1, m + 1)) - set(self.low)
        if trace is not None:
            trace.begin(self.low[1:])

    def set_low(self, j: int, new: int) -> None:
        old = self.low[j]
        if old == new:
            return
        self.low[j] = new
        if self.trace is not None:
            self.trace.low_changed(j, old, new)

    def reduce_column(self, j: int, counters: TraceCounters) -> None:
        matrix = self.matrix
        while True:
            v = self.low[j]
            if v == 0:
                break
            j0 = self.pivot_of_row[v]
            if j0 == 0:
                break
            col = matrix.add_columns(j0, j, counters)
            self.column_adds[j - 1] += 1
            self.set_low(j, col[-1] if col else 0)
        v = self.low[j]
        if v:
            self.pivot_of_row[v] = j

    def finish_iteration(self, iteration: int, j: int, was_empty: bool, counters: TraceCounters) -> None:
        self.visited[j] = 1
        if not was_empty:
            self.unresolved -= 1
        v = self.low[j]
        if v:
            self.paired += 1
            self.estimate.discard(j)
            self.estimate.discard(v)
        if self.trace is not None:
            self.trace.record(
                iteration,
                counters,
                unresolved=self.unresolved,
                m=self.matrix.m,
                estimate=self.estimate,
                pivots=self.paired,
                cleared=len(self.cleared),
            )

    def result(self, iterations: int) -> ReductionResult:
        return ReductionResult(
            low=self.low[1:],
            converged=True,
            iterations=iterations,
            column_adds=self.column_adds,
            cleared=self.cleared,
        )


def reduce_standard(matrix: BoundaryMatrix, trace: Trace | None = None) -> ReductionResult:
    """Reduce ``matrix`` in place, left to right, one iteration per column."""
    sweep = _Sweep(matrix, trace)
    for j in range(1, matrix.m + 1):
        counters = TraceCounters()
        was_empty = sweep.low[j] == 0
        sweep.reduce_column(j, counters)
        sweep.finish_iteration(j, j, was_empty, counters)
    return sweep.result(matrix.m)


def reduce_twist(matrix: BoundaryMatrix, trace: Trace | None = None) -> ReductionResult:
    """Reduce by dimension, highest first, clearing each discovered partner.

    Every column of dimension >= 1 is one iteration, including columns that
    were already cleared when the sweep reaches them.
    """
    sweep = _Sweep(matrix, trace)
    by_dim: dict[int, list[int]] = {}
    for j, d in enumerate(matrix.dims, start=1):
        by_dim.setdefault(d, []).append(j)
    iteration = 0
    for d in range(matrix.max_dim, 0, -1):
        for j in by_dim.get(d, ()):
            iteration += 1
            counters = TraceCounters()
            was_empty = sweep.low[j] == 0
            sweep.reduce_column(j, counters)
            v = sweep.low[j]
            if v and sweep.low[v]:
                matrix.clear_column(v)
                sweep.cleared.add(v)
                sweep.set_low(v, 0)
                if not sweep.visited[v]:
                    sweep.unresolved -= 1
            sweep.finish_iteration(iteration, j, was_empty, counters)
    return sweep.result(iteration)
