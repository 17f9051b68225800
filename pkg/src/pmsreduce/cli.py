"""Command-line driver.

Exit codes: 0 success (reduction reached its fixpoint), 2 reduction stopped
at --max-iter before converging, 1 any error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import ALGOS, BuildParams, run_bench, format_summary
from .baseline import reduce_standard, reduce_twist
from .boundary import MatrixFormatError, read_matrix, write_matrix
from .complex import (
    build_vietoris_rips,
    extract_pairs,
    index_filtration,
    read_cloud,
    read_filtration,
    write_barcode,
    write_cloud,
    write_filtration,
)
from .ensembles import DEFAULT_JITTER, ENSEMBLES, sample
from .metrics import Reference, Trace, write_trace
from .pms import PmsOptions, SchedulePolicy, reduce_pms

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARTIAL = 2

log = logging.getLogger("pmsreduce")


class _Parser(argparse.ArgumentParser):
    # usage errors must not collide with the "partial" exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_build_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r-max", type=float, default=5.0, help="largest grid scale (default 5)")
    p.add_argument("--divisions", type=_positive_int, default=10, help="number of grid scales (default 10)")
    p.add_argument("--max-dim", type=_positive_int, default=5, help="maximum simplex dimension (default 5)")


def _add_pms_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iter", type=_positive_int, default=None)
    p.add_argument("--processor-cap", type=_positive_int, default=None,
                   help="neighbourhoods reduced per iteration (default unbounded)")
    p.add_argument("--policy", choices=[s.value for s in SchedulePolicy if s is not SchedulePolicy.PERSISTENCE],
                   default="all")
    p.add_argument("--compress-clear", action="store_true", help="enable clearing by compression")
    p.add_argument("--workers", type=int, default=0,
                   help="threads for the neighbourhood round; 0 simulates serially")


def _pms_options(args) -> PmsOptions:
    return PmsOptions(
        max_iter=args.max_iter,
        enable_compression_clearing=args.compress_clear,
        processor_cap=args.processor_cap,
        schedule_policy=SchedulePolicy(args.policy),
        workers=args.workers,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pmsreduce", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="sample a point cloud to CSV")
    p.add_argument("ensemble", choices=ENSEMBLES)
    p.add_argument("n", type=_positive_int)
    p.add_argument("seed", type=int)
    p.add_argument("out", type=Path)
    p.add_argument("--jitter", type=float, default=DEFAULT_JITTER)

    p = sub.add_parser("build", help="build a Vietoris-Rips boundary matrix from a CSV cloud")
    p.add_argument("cloud", type=Path)
    p.add_argument("out", type=Path)
    _add_build_flags(p)
    p.add_argument("--filtration-out", type=Path, help="also write the simplex list (scales, vertices)")

    p = sub.add_parser("reduce", help="reduce a boundary-matrix file")
    p.add_argument("matrix", type=Path)
    p.add_argument("--algo", choices=ALGOS, default="pms")
    _add_pms_flags(p)
    p.add_argument("--trace-out", type=Path)
    p.add_argument("--barcode-out", type=Path)
    p.add_argument("--filtration", type=Path,
                   help="simplex list from 'build --filtration-out'; without it, barcode scales are simplex indices")

    p = sub.add_parser("bench", help="run std, twist and pms over several seeds")
    p.add_argument("ensemble", choices=ENSEMBLES)
    p.add_argument("n", type=_positive_int)
    p.add_argument("--seeds", "--seed", type=int, nargs="+", dest="seeds", default=[1, 2, 3])
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--jitter", type=float, default=DEFAULT_JITTER)
    _add_build_flags(p)
    _add_pms_flags(p)
    return parser


def cmd_sample(args) -> int:
    cloud = sample(args.ensemble, args.n, args.seed, jitter=args.jitter)
    write_cloud(cloud, args.out)
    return EXIT_OK


def cmd_build(args) -> int:
    cloud = read_cloud(args.cloud)
    filtration = build_vietoris_rips(cloud, args.r_max, args.divisions, args.max_dim)
    matrix = filtration.boundary_matrix()
    write_matrix(matrix, args.out)
    if args.filtration_out:
        write_filtration(filtration, args.filtration_out)
    print(f"m={matrix.m} nnz={matrix.nnz}")
    return EXIT_OK


def cmd_reduce(args) -> int:
    matrix = read_matrix(args.matrix)
    if args.filtration:
        filtration = read_filtration(args.filtration)
        if len(filtration) != matrix.m:
            raise ValueError(f"filtration has {len(filtration)} simplices, matrix has {matrix.m} columns")
    else:
        filtration = index_filtration(matrix.dims)
    reference = Reference.from_lowstar(reduce_standard(matrix.copy()).low)
    trace = Trace(args.algo, reference)
    if args.algo == "std":
        result = reduce_standard(matrix, trace)
    elif args.algo == "twist":
        result = reduce_twist(matrix, trace)
    else:
        result = reduce_pms(matrix, _pms_options(args), trace)
    if args.trace_out:
        write_trace(trace.records, args.trace_out)
    if args.barcode_out:
        if result.converged:
            write_barcode(extract_pairs(filtration, result.low), args.barcode_out)
        else:
            log.warning("run stopped before converging; no barcode written")
    state = "fixpoint" if result.converged else "partial"
    print(f"algo={args.algo} iterations={result.iterations} col_adds={trace.total_col_adds} "
          f"xor_ops={trace.total_xor_ops} status={state}")
    return EXIT_OK if result.converged else EXIT_PARTIAL


def cmd_bench(args) -> int:
    params = BuildParams(args.r_max, args.divisions, args.max_dim, args.jitter)
    summaries = run_bench(args.ensemble, args.n, args.seeds, params, _pms_options(args), args.out_dir)
    sys.stdout.write(format_summary(summaries))
    return EXIT_OK


COMMANDS = {"sample": cmd_sample, "build": cmd_build, "reduce": cmd_reduce, "bench": cmd_bench}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (MatrixFormatError, ValueError, OSError) as exc:
        print(f"pmsreduce: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
