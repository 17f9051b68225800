"""Parallel multi-scale reduction.

The reducer certifies final ``low`` values ("pivots") without column
additions wherever the sparsity pattern allows, then lets every pivot
reduce the columns that share its low value. Those neighbourhoods are
pairwise disjoint, so each one can be handled by a separate worker.

One iteration is: local-injection search over every dimension, optional
compression clearing, one round of neighbourhood additions, and an
essential-set update. New pivots found during the additions are merged at
the iteration barrier, so the trace does not depend on worker count.
"""

from __future__ import annotations

import bisect
import enum
import logging
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

from .boundary import BoundaryMatrix, compute_beta, is_reduced
from .metrics import ReductionResult, Trace, TraceCounters

log = logging.getLogger(__name__)


class SchedulePolicy(str, enum.Enum):
    ALL = "all"
    BIG_NBHD = "big-nbhd"
    NEG_FIRST = "neg-first"
    # Application-specific; named so the option surface is stable.
    PERSISTENCE = "persistence"


@dataclass(frozen=True)
class PmsOptions:
    max_iter: int | None = None
    enable_compression_clearing: bool = False
    processor_cap: int | None = None
    schedule_policy: SchedulePolicy = SchedulePolicy.ALL
    # 0 runs the neighbourhood round serially; >0 uses that many threads.
    workers: int = 0

    def __post_init__(self):
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.processor_cap is not None and self.processor_cap < 1:
            raise ValueError("processor_cap must be >= 1")
        if self.workers < 0:
            raise ValueError("workers must be >= 0")
        policy = SchedulePolicy(self.schedule_policy)
        object.__setattr__(self, "schedule_policy", policy)
        if policy is SchedulePolicy.PERSISTENCE:
            raise NotImplementedError("persistence-weighted scheduling is not implemented")


class ReductionState:
    """Mutable state of one reduction.

    ``low`` and ``beta`` are padded so that ``low[j]`` is column ``j``.
    ``buckets`` maps each nonzero low value to the columns currently
    holding it.
    """

    def __init__(self, matrix: BoundaryMatrix, trace: Trace | None = None):
        self.matrix = matrix
        self.trace = trace
        m = matrix.m
        self.m = m
        self.low = [0] + matrix.lows()
        self.beta = [0] + compute_beta(matrix)
        self.pivots: set[int] = set()
        self.paired: set[int] = {j for j in range(1, m + 1) if self.beta[j] > 0}
        self.essential_estimate: set[int] = set(range(1, m + 1))
        self.cleared: set[int] = set()
        self.pins: dict[int, int] = {}
        self.column_adds = [0] * m
        self.iter = 0
        self.buckets: dict[int, set[int]] = {}
        for j in range(1, m + 1):
            v = self.low[j]
            if v:
                self.buckets.setdefault(v, set()).add(j)
        self.columns_of_dim: dict[int, list[int]] = {}
        for j, d in enumerate(matrix.dims, start=1):
            self.columns_of_dim.setdefault(d, []).append(j)
        if trace is not None:
            trace.begin(self.low[1:])

    def set_low(self, j: int, new: int) -> None:
        old = self.low[j]
        if old == new:
            return
        if old:
            bucket = self.buckets[old]
            bucket.discard(j)
            if not bucket:
                del self.buckets[old]
        if new:
            self.buckets.setdefault(new, set()).add(j)
        self.low[j] = new
        if self.trace is not None:
            self.trace.low_changed(j, old, new)

    def clear(self, j: int) -> None:
        self.matrix.clear_column(j)
        self.set_low(j, 0)
        self.cleared.add(j)

    def promote(self, j: int) -> None:
        """Certify ``low(j)`` as final and clear its positive partner."""
        v = self.low[j]
        self.pivots.add(j)
        self.paired.add(j)
        self.paired.add(v)
        if self.low[v]:
            self.clear(v)

    def unresolved(self) -> int:
        return sum(1 for j in range(1, self.m + 1) if self.low[j] and j not in self.pivots)

    def current_low(self) -> list[int]:
        return self.low[1:]


def phase0_init(state: ReductionState) -> set[int]:
    """Certify every column whose low already equals its beta lower bound."""
    found = {j for j in range(1, state.m + 1) if state.low[j] and state.low[j] == state.beta[j]}
    for j in sorted(found):
        state.promote(j)
    return found


def find_local_injections(state: ReductionState, d: int) -> set[int]:
    """Certify dimension-``d`` columns whose low no earlier column can match.

    ``lowerbound`` tracks the largest low value seen twice so far; a column
    above it whose low is new cannot be reduced further.
    """
    found = set()
    seen: set[int] = set()
    lowerbound = 0
    low = state.low
    for j in state.columns_of_dim.get(d, ()):
        v = low[j]
        if not v:
            continue
        if j not in state.pivots and v > lowerbound:
            if v not in seen:
                found.add(j)
            else:
                lowerbound = v
        seen.add(v)
    for j in sorted(found):
        state.promote(j)
    return found


def clear_by_compression(state: ReductionState) -> int:
    """Narrow each unresolved column's final low to the unpaired candidates.

    The candidates are rows of dimension ``d - 1`` between ``beta_j`` and
    ``low(j)`` that are not yet paired, plus zero when ``beta_j`` is zero.
    A single candidate zero clears the column; a single row index either
    certifies the column or pins its target. Returns the number of actions
    that certified a pivot or lowered some column's low; a pin whose target
    column is already empty is recorded but does not count.
    """
    actions = 0
    rows_of_dim = state.columns_of_dim
    for d in range(1, state.matrix.max_dim + 1):
        rows = rows_of_dim.get(d - 1, [])
        for j in rows_of_dim.get(d, ()):
            v = state.low[j]
            if not v or j in state.pivots:
                continue
            pin = state.pins.get(j)
            if pin is not None:
                if pin == v:
                    state.promote(j)
                    actions += 1
                continue
            b = state.beta[j]
            candidates = [0] if b == 0 else []
            lo = max(b, 1)
            k = bisect.bisect_right(rows, v) - 1
            while k >= 0 and rows[k] >= lo and len(candidates) < 2:
                i = rows[k]
                if i not in state.paired:
                    candidates.append(i)
                k -= 1
            if len(candidates) != 1:
                continue
            i = candidates[0]
            if i == 0:
                state.clear(j)
            elif i == v:
                state.promote(j)
            else:
                state.pins[j] = i
                state.paired.add(j)
                state.paired.add(i)
                if not state.low[i]:
                    continue
                state.clear(i)
            actions += 1
    return actions


def _neighbourhoods(state: ReductionState) -> list[tuple[int, list[int]]]:
    out = []
    for p in sorted(state.pivots):
        bucket = state.buckets.get(state.low[p])
        if bucket is None or len(bucket) < 2:
            continue
        nbhd = sorted(c for c in bucket if c != p)
        if nbhd[0] < p:
            raise AssertionError(f"pivot {p} has an earlier column {nbhd[0]} with the same low")
        out.append((p, nbhd))
    return out


def _schedule(state: ReductionState, candidates: list[tuple[int, list[int]]], opts: PmsOptions):
    cap = opts.processor_cap
    if cap is None or cap >= len(candidates):
        return candidates
    policy = opts.schedule_policy
    if policy is SchedulePolicy.BIG_NBHD:
        ranked = sorted(candidates, key=lambda c: (-len(c[1]), c[0]))
    elif policy is SchedulePolicy.NEG_FIRST:
        def known_negative(nbhd):
            return sum(1 for c in nbhd if state.beta[c] > 0 or c in state.pins)
        ranked = sorted(candidates, key=lambda c: (-known_negative(c[1]), c[0]))
    else:
        ranked = candidates
    return sorted(ranked[:cap])


def _reduce_neighbourhood(matrix: BoundaryMatrix, pivot: int, nbhd: list[int]):
    counters = TraceCounters()
    updates = []
    for col in nbhd:
        new = matrix.add_columns(pivot, col, counters)
        updates.append((col, new[-1] if new else 0))
    return updates, counters


def phase2_parallel_reduce(
    state: ReductionState,
    opts: PmsOptions,
    counters: TraceCounters,
    executor: Executor | None = None,
) -> int:
    """Add each scheduled pivot into every column of its neighbourhood.

    Returns the number of column additions performed.
    """
    scheduled = _schedule(state, _neighbourhoods(state), opts)
    if not scheduled:
        return 0
    claimed: set[int] = set()
    for _, nbhd in scheduled:
        if not claimed.isdisjoint(nbhd):
            raise AssertionError("neighbourhoods overlap; parallel additions would race")
        claimed.update(nbhd)

    matrix = state.matrix
    if executor is None:
        results = [_reduce_neighbourhood(matrix, p, nbhd) for p, nbhd in scheduled]
    else:
        futures = [executor.submit(_reduce_neighbourhood, matrix, p, nbhd) for p, nbhd in scheduled]
        results = [f.result() for f in futures]

    # barrier: merge in pivot order
    touched = []
    adds = 0
    for updates, worker_counters in results:
        counters.merge(worker_counters)
        adds += worker_counters.col_adds
        for col, new in updates:
            state.column_adds[col - 1] += 1
            state.set_low(col, new)
            touched.append(col)
    for col in sorted(touched):
        v = state.low[col]
        if v and (v == state.beta[col] or state.pins.get(col) == v):
            state.promote(col)
    return adds


def estimate_essential(state: ReductionState) -> set[int]:
    """Drop paired indices and every current low value from the estimate."""
    current = set(state.low)
    state.essential_estimate = {
        e for e in state.essential_estimate if e not in state.paired and e not in current
    }
    return state.essential_estimate


def _record(state: ReductionState, counters: TraceCounters) -> None:
    if state.trace is not None:
        state.trace.record(
            state.iter,
            counters,
            unresolved=state.unresolved(),
            m=state.m,
            estimate=state.essential_estimate,
            pivots=len(state.pivots),
            cleared=len(state.cleared),
        )


def reduce_pms(
    matrix: BoundaryMatrix,
    opts: PmsOptions | None = None,
    trace: Trace | None = None,
    observer: Callable[[ReductionState], None] | None = None,
) -> ReductionResult:
    """Reduce ``matrix`` in place.

    Stops at the first iteration that makes no progress, or after
    ``opts.max_iter`` iterations; in the latter case the result is flagged
    as not converged unless ``low`` is already injective. ``observer`` is
    called with the state after initialisation and after every recorded
    iteration.
    """
    opts = opts or PmsOptions()
    state = ReductionState(matrix, trace)
    phase0_init(state)
    estimate_essential(state)
    _record(state, TraceCounters())
    if observer is not None:
        observer(state)

    executor = ThreadPoolExecutor(max_workers=opts.workers) if opts.workers > 0 else None
    fixpoint = False
    try:
        while opts.max_iter is None or state.iter < opts.max_iter:
            counters = TraceCounters()
            new_pivots = 0
            for d in range(1, matrix.max_dim + 1):
                new_pivots += len(find_local_injections(state, d))
            compressed = clear_by_compression(state) if opts.enable_compression_clearing else 0
            adds = phase2_parallel_reduce(state, opts, counters, executor)
            if not (new_pivots or compressed or adds):
                fixpoint = True
                break
            state.iter += 1
            estimate_essential(state)
            _record(state, counters)
            if observer is not None:
                observer(state)
            log.debug("iter %d: %d new pivots, %d additions", state.iter, new_pivots, adds)
    finally:
        if executor is not None:
            executor.shutdown()

    low = state.current_low()
    return ReductionResult(
        low=low,
        converged=fixpoint or is_reduced(low),
        iterations=state.iter,
        column_adds=state.column_adds,
        cleared=state.cleared,
        pins=dict(state.pins),
    )
