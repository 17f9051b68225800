"""Per-iteration measurements: operation counts, relative l1 error,
unreduced proportion and essential-estimate precision."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import AbstractSet, Iterable, Sequence

TRACE_COLUMNS = (
    "iter",
    "algo",
    "col_adds",
    "xor_ops",
    "col_adds_cum",
    "xor_ops_cum",
    "rel_l1_err",
    "unreduced_frac",
    "essential_precision",
    "pivots",
    "cleared",
)

TRACE_HEADER_NOTES = (
    "xor_ops counts each row where at least one operand column is nonzero (1+1, 1+0, 0+1)",
    "std/twist: one iteration per visited column; twist counts already-cleared columns too",
    "std/twist: a column is unreduced until visited unless it is empty",
    "pms: iteration 0 is the initialisation pass",
)


@dataclass
class TraceCounters:
    """Column-addition and XOR counters for one iteration (or one worker)."""

    col_adds: int = 0
    xor_ops: int = 0

    def merge(self, other: "TraceCounters") -> None:
        self.col_adds += other.col_adds
        self.xor_ops += other.xor_ops


def rel_l1_error(low: Sequence[int], lowstar: Sequence[int]) -> float:
    if len(low) != len(lowstar):
        raise ValueError("low and lowstar differ in length")
    dist = sum(abs(a - b) for a, b in zip(low, lowstar))
    norm = sum(lowstar)
    if norm == 0:
        return 0.0 if dist == 0 else math.inf
    return dist / norm


def unreduced_proportion(resolved: Sequence[bool]) -> float:
    if not resolved:
        return 0.0
    return sum(1 for r in resolved if not r) / len(resolved)


def essential_precision(estimate: AbstractSet[int], truth: AbstractSet[int]) -> float:
    if not truth <= estimate:
        missing = sorted(truth - estimate)[:5]
        raise AssertionError(f"essential estimate dropped true essential indices {missing}")
    if not estimate:
        return 1.0
    return len(truth) / len(estimate)


def essential_indices(lowstar: Sequence[int]) -> frozenset[int]:
    """Positive columns whose index is not the pair of any negative column."""
    targets = {v for v in lowstar if v}
    return frozenset(j for j, v in enumerate(lowstar, start=1) if v == 0 and j not in targets)


@dataclass(frozen=True)
class Reference:
    """Known final state used to score intermediate iterations."""

    lowstar: tuple[int, ...]
    essential: frozenset[int]

    @classmethod
    def from_lowstar(cls, lowstar: Sequence[int]) -> "Reference":
        return cls(tuple(lowstar), essential_indices(lowstar))


@dataclass
class ReductionResult:
    """Final ``low`` vector of a run plus per-column bookkeeping.

    ``converged`` is False only for a run stopped by its iteration cap.
    """

    low: list[int]
    converged: bool
    iterations: int
    column_adds: list[int]
    cleared: set[int]
    pins: dict[int, int] = field(default_factory=dict)


@dataclass
class IterationRecord:
    iter: int
    algo: str
    col_adds: int
    xor_ops: int
    col_adds_cum: int
    xor_ops_cum: int
    rel_l1_err: float
    unreduced_frac: float
    essential_precision: float
    pivots: int
    cleared: int


@dataclass
class Trace:
    """Collects one record per iteration.

    Reducers report low changes through :meth:`low_changed` so that the
    l1 distance to the reference is kept up to date in O(1) per change.
    Without a reference, error and precision are recorded as NaN.
    """

    algo: str
    reference: Reference | None = None
    records: list[IterationRecord] = field(default_factory=list)
    _dist: int = 0
    _norm: int = 0
    _cum: TraceCounters = field(default_factory=TraceCounters)

    def begin(self, low: Sequence[int]) -> None:
        self.records.clear()
        self._cum = TraceCounters()
        if self.reference is not None:
            ref = self.reference.lowstar
            if len(ref) != len(low):
                raise ValueError("reference lowstar does not match the matrix size")
            self._dist = sum(abs(a - b) for a, b in zip(low, ref))
            self._norm = sum(ref)

    def low_changed(self, j: int, old: int, new: int) -> None:
        if self.reference is not None:
            star = self.reference.lowstar[j - 1]
            self._dist += abs(new - star) - abs(old - star)

    @property
    def current_error(self) -> float:
        if self.reference is None:
            return math.nan
        if self._norm == 0:
            return 0.0 if self._dist == 0 else math.inf
        return self._dist / self._norm

    def record(
        self,
        iteration: int,
        counters: TraceCounters,
        unresolved: int,
        m: int,
        estimate: AbstractSet[int] | None,
        pivots: int,
        cleared: int,
    ) -> IterationRecord:
        self._cum.merge(counters)
        if self.reference is not None and estimate is not None:
            precision = essential_precision(estimate, self.reference.essential)
        else:
            precision = math.nan
        rec = IterationRecord(
            iter=iteration,
            algo=self.algo,
            col_adds=counters.col_adds,
            xor_ops=counters.xor_ops,
            col_adds_cum=self._cum.col_adds,
            xor_ops_cum=self._cum.xor_ops,
            rel_l1_err=self.current_error,
            unreduced_frac=unresolved / m if m else 0.0,
            essential_precision=precision,
            pivots=pivots,
            cleared=cleared,
        )
        self.records.append(rec)
        return rec

    @property
    def total_col_adds(self) -> int:
        return self._cum.col_adds

    @property
    def total_xor_ops(self) -> int:
        return self._cum.xor_ops


def _fmt(value: object) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trace_to_csv(records: Iterable[IterationRecord], notes: bool = True) -> str:
    buf = io.StringIO()
    if notes:
        for note in TRACE_HEADER_NOTES:
            buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for rec in records:
        row = asdict(rec)
        writer.writerow([_fmt(row[c]) for c in TRACE_COLUMNS])
    return buf.getvalue()


def write_trace(records: Iterable[IterationRecord], path: str | Path) -> None:
    Path(path).write_text(trace_to_csv(records))


def read_trace(path: str | Path) -> list[IterationRecord]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append(
            IterationRecord(
                iter=int(row["iter"]),
                algo=row["algo"],
                col_adds=int(row["col_adds"]),
                xor_ops=int(row["xor_ops"]),
                col_adds_cum=int(row["col_adds_cum"]),
                xor_ops_cum=int(row["xor_ops_cum"]),
                rel_l1_err=float(row["rel_l1_err"]),
                unreduced_frac=float(row["unreduced_frac"]),
                essential_precision=float(row["essential_precision"]),
                pivots=int(row["pivots"]),
                cleared=int(row["cleared"]),
            )
        )
    return out


def first_iteration(records: Sequence[IterationRecord], metric: str, threshold: float, below: bool = True) -> int | None:
    """Iteration number of the first record whose ``metric`` crosses ``threshold``.

    ``below=True`` looks for ``metric <= threshold`` (error, unreduced
    fraction); otherwise ``metric >= threshold`` (precision).
    """
    for rec in records:
        value = getattr(rec, metric)
        if math.isnan(value):
            continue
        if (value <= threshold) if below else (value >= threshold):
            return rec.iter
    return None
