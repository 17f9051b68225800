"""Experiment grid: sample, build, reduce with every algorithm, summarise."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .baseline import reduce_standard, reduce_twist
from .boundary import BoundaryMatrix
from .complex import build_vietoris_rips
from .ensembles import DEFAULT_JITTER, sample
from .metrics import Reference, Trace, first_iteration, write_trace
from .pms import PmsOptions, reduce_pms

log = logging.getLogger(__name__)

ALGOS = ("std", "twist", "pms")
ERROR_LEVELS = (0.1, 0.01, 0.001, 0.0001, 0.0)
UNREDUCED_LEVELS = (0.9, 0.5, 0.1, 0.05, 0.01)
PRECISION_LEVELS = (0.1, 0.5, 0.9, 0.95, 1.0)


@dataclass(frozen=True)
class BuildParams:
    r_max: float = 5.0
    divisions: int = 10
    max_dim: int = 5
    jitter: float = DEFAULT_JITTER


@dataclass
class RunSummary:
    ensemble: str
    seed: int
    m: int
    nnz: int
    traces: dict[str, Trace] = field(default_factory=dict)

    def as_dict(self) -> dict:
        out: dict = {"ensemble": self.ensemble, "seed": self.seed, "m": self.m, "nnz": self.nnz}
        for algo, tr in self.traces.items():
            recs = tr.records
            out[f"{algo}_iterations"] = recs[-1].iter if recs else 0
            out[f"{algo}_col_adds"] = tr.total_col_adds
            out[f"{algo}_xor_ops"] = tr.total_xor_ops
            for lvl in ERROR_LEVELS:
                out[f"{algo}_iters_err_le_{lvl:g}"] = first_iteration(recs, "rel_l1_err", lvl)
            for lvl in UNREDUCED_LEVELS:
                out[f"{algo}_iters_unreduced_le_{lvl:g}"] = first_iteration(recs, "unreduced_frac", lvl)
            for lvl in PRECISION_LEVELS:
                out[f"{algo}_iters_precision_ge_{lvl:g}"] = first_iteration(
                    recs, "essential_precision", lvl, below=False
                )
        if {"pms", "std", "twist"} <= self.traces.keys():
            pms_adds = self.traces["pms"].total_col_adds
            for base in ("std", "twist"):
                denom = self.traces[base].total_col_adds
                out[f"ratio_pms_{base}"] = pms_adds / denom if denom else None
        return out


def run_matrix(matrix: BoundaryMatrix, opts: PmsOptions, algos: Sequence[str] = ALGOS) -> dict[str, Trace]:
    """Reduce copies of ``matrix`` with each algorithm, scored against std."""
    reference = Reference.from_lowstar(reduce_standard(matrix.copy()).low)
    runners = {
        "std": lambda mat, tr: reduce_standard(mat, tr),
        "twist": lambda mat, tr: reduce_twist(mat, tr),
        "pms": lambda mat, tr: reduce_pms(mat, opts, tr),
    }
    traces = {}
    for algo in algos:
        trace = Trace(algo, reference)
        start = time.perf_counter()
        runners[algo](matrix.copy(), trace)
        log.info("%s: %d iterations, %d column additions (%.2fs)",
                 algo, len(trace.records), trace.total_col_adds, time.perf_counter() - start)
        traces[algo] = trace
    return traces


def run_bench(
    ensemble: str,
    n: int,
    seeds: Sequence[int],
    params: BuildParams,
    opts: PmsOptions,
    out_dir: str | Path | None = None,
) -> list[RunSummary]:
    summaries = []
    for seed in seeds:
        cloud = sample(ensemble, n, seed, jitter=params.jitter)
        filtration = build_vietoris_rips(cloud, params.r_max, params.divisions, params.max_dim)
        matrix = filtration.boundary_matrix()
        log.info("%s seed %d: m=%d nnz=%d", ensemble, seed, matrix.m, matrix.nnz)
        summary = RunSummary(ensemble, seed, matrix.m, matrix.nnz, run_matrix(matrix, opts))
        summaries.append(summary)
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            for algo, trace in summary.traces.items():
                write_trace(trace.records, out / f"{ensemble}_seed{seed}_{algo}.csv")
    if out_dir is not None:
        rows = [s.as_dict() for s in summaries]
        Path(out_dir, "summary.json").write_text(json.dumps(rows, indent=1) + "\n")
        Path(out_dir, "summary.txt").write_text(format_summary(summaries))
    return summaries


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def format_summary(summaries: Sequence[RunSummary]) -> str:
    """Plain-text tables: addition ratios and iterations to each threshold."""
    lines = ["# ratio of total column additions (pms / baseline)", "seed  m  pms/std  pms/twist"]
    dicts = [s.as_dict() for s in summaries]
    for d in dicts:
        lines.append(f"{d['seed']}  {d['m']}  {_cell(d.get('ratio_pms_std'))}  {_cell(d.get('ratio_pms_twist'))}")
    sections = [
        ("iterations to relative l1 error <=", "err_le", ERROR_LEVELS),
        ("iterations to unreduced proportion <=", "unreduced_le", UNREDUCED_LEVELS),
        ("iterations to essential precision >=", "precision_ge", PRECISION_LEVELS),
    ]
    for title, key, levels in sections:
        for d in dicts:
            lines.append("")
            lines.append(f"# {title} (seed {d['seed']})")
            lines.append("level  " + "  ".join(ALGOS))
            for lvl in levels:
                cells = [_cell(d.get(f"{a}_iters_{key}_{lvl:g}")) for a in ALGOS]
                lines.append(f"{lvl:g}  " + "  ".join(cells))
    return "\n".join(lines) + "\n"
