"""Persistent-homology boundary-matrix reduction over GF(2)."""

from .baseline import reduce_standard, reduce_twist
from .boundary import BoundaryMatrix, compute_beta, compute_leftcol, is_reduced
from .complex import Filtration, Interval, PointCloud, build_vietoris_rips, extract_pairs
from .metrics import Reference, ReductionResult, Trace, TraceCounters
from .pms import PmsOptions, SchedulePolicy, reduce_pms

__all__ = [
    "BoundaryMatrix",
    "Filtration",
    "Interval",
    "PmsOptions",
    "PointCloud",
    "ReductionResult",
    "Reference",
    "SchedulePolicy",
    "Trace",
    "TraceCounters",
    "build_vietoris_rips",
    "compute_beta",
    "compute_leftcol",
    "extract_pairs",
    "is_reduced",
    "reduce_pms",
    "reduce_standard",
    "reduce_twist",
]
