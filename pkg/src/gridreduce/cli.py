"""Command-line front end: generate datasets, run reductions, evaluate, export.

Subcommands
-----------
gen     write a synthetic dataset CSV
reduce  run one reduction (snn | scaling | kmedoids), optionally partitioned,
        and write representatives CSV plus a .prov provenance sidecar
eval    score reduced files against their original dataset as a report CSV
export  convert a representatives CSV to csv / ply / vtk for viewers

Exit codes are stable for scripting: 0 success, 1 usage error, 2 data error,
3 internal error. Errors print a single ``error: <category>: <message>``
line on stderr. All commands are deterministic given their flags and seed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .errors import DataError
from .evaluate import MethodConfig, ReductionReport, run_reduction
from .export import (
    format_report_row,
    provenance_sidecar_path,
    read_provenance,
    read_reduced_csv,
    write_ply,
    write_provenance,
    write_reduced_csv,
    write_reduced_rows,
    write_report_csv,
    write_vtk,
)
from .grid import NULL_SENTINEL, GridSpec
from .ingest import SyntheticSpec, export_csv, generate_synthetic, load_brick, load_csv, separated_blobs

__all__ = ["main"]

DEFAULT_SENTINEL = NULL_SENTINEL
DEFAULT_PEAK = 0.00332  # nominal attribute scale of the synthetic volumes


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _dims(text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(p) for p in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NXxNYxNZ, got {text!r}") from None
    if len(parts) != 3 or any(p < 1 for p in parts):
        raise argparse.ArgumentTypeError(f"dims must be three positive integers, got {text!r}")
    return parts


def _divisions(text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected DX,DY,DZ, got {text!r}") from None
    if len(parts) != 3 or any(p < 1 for p in parts):
        raise argparse.ArgumentTypeError(f"divisions must be three positive integers, got {text!r}")
    return parts


def _blob(text: str) -> tuple[tuple[float, float, float], float, float]:
    try:
        vals = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected CX,CY,CZ,RADIUS,PEAK, got {text!r}") from None
    if len(vals) != 5:
        raise argparse.ArgumentTypeError(f"expected 5 comma-separated numbers, got {text!r}")
    return ((vals[0], vals[1], vals[2]), vals[3], vals[4])


def _gen_dataset(args, dims):
    if args.style == "clusters":
        return separated_blobs(dims=dims, n_blobs=args.blobs, seed=args.seed)
    if args.blob:
        blobs = tuple(args.blob)
    else:
        if args.blobs < 0:
            raise _UsageError("--blobs must be >= 0")
        rng = np.random.default_rng(args.seed)
        blobs = tuple(
            (tuple(rng.uniform(0.15, 0.85, 3)), 0.12, DEFAULT_PEAK)
            for _ in range(args.blobs)
        )
    spec = SyntheticSpec(
        dims=dims,
        blobs=blobs,
        noise_fraction=args.noise_fraction,
        null_fraction=args.null_fraction,
        seed=args.seed,
    )
    return generate_synthetic(spec)


def _cmd_gen(args) -> int:
    d = _gen_dataset(args, args.dims)
    export_csv(d, args.out)
    null_count = d.n_points - d.nonnull_count
    print(f"points={d.n_points} nonnull={d.nonnull_count} null={null_count}")
    print(f"wrote {args.out}")
    return 0


def _load_input(args):
    sources = [args.input_csv is not None, args.input_brick is not None, args.synthetic]
    if sum(sources) != 1:
        raise _UsageError("exactly one of --input-csv, --input-brick, --synthetic is required")
    if args.input_csv is not None:
        return load_csv(args.input_csv, null_sentinel=args.sentinel)
    if args.input_brick is not None:
        if args.input_dims is None:
            raise _UsageError("--input-brick requires --input-dims NXxNYxNZ")
        spec = GridSpec(args.input_dims, ("value",), args.sentinel)
        return load_brick(args.input_brick, spec)
    return _gen_dataset(args, args.input_dims or (48, 48, 12))


def _add_input_flags(parser) -> None:
    parser.add_argument("--input-csv", help="dataset CSV produced by gen or export_csv")
    parser.add_argument("--input-brick", help="raw big-endian float32 volume brick")
    parser.add_argument("--input-dims", type=_dims, default=None,
                        help="grid dims of the brick / synthetic input")
    parser.add_argument("--sentinel", type=float, default=DEFAULT_SENTINEL,
                        help="null sentinel value (default: 1e35 at float32 precision)")
    parser.add_argument("--synthetic", action="store_true",
                        help="generate the input in memory from the gen flags")
    parser.add_argument("--style", choices=("volume", "clusters"), default="volume")
    parser.add_argument("--blobs", type=int, default=3)
    parser.add_argument("--blob", type=_blob, action="append", default=None)
    parser.add_argument("--noise-fraction", type=float, default=0.0)
    parser.add_argument("--null-fraction", type=float, default=0.0)


def _cmd_reduce(args) -> int:
    d = _load_input(args)
    if args.method == "snn":
        if (args.eps is None) != (args.min_pts is None):
            raise _UsageError("provide both --eps and --min-pts or neither")
        options = {
            "k": args.k,
            "eps": args.eps,
            "min_pts": args.min_pts,
            "eps_percentile": args.eps_percentile,
            "core_fraction": args.core_fraction,
            "n_parts": args.parts,
            "axis": args.axis,
            "workers": args.threads,
        }
    elif args.method == "scaling":
        if (args.divisions is None) == (args.edge is None):
            raise _UsageError("scaling needs exactly one of --divisions or --edge")
        options = {"divisions": args.divisions} if args.divisions else {"edge": args.edge}
    else:
        if args.clusters is None:
            raise _UsageError("kmedoids needs --clusters")
        options = {
            "n_clusters": args.clusters,
            "per_cluster": args.per_cluster,
            "max_swap_iters": args.max_swap_iters,
            "sample_size": args.sample_size,
            "seed": args.seed,
        }
    reduced = run_reduction(d, MethodConfig(args.method, options))
    write_reduced_csv(reduced, args.out)
    write_provenance(reduced, provenance_sidecar_path(args.out))
    print(
        f"method={args.method} source={d.n_points} nonnull={d.nonnull_count} "
        f"representatives={reduced.n_representatives}"
    )
    print(f"wrote {args.out}")
    return 0


def _report_from_files(original, reduced_path) -> ReductionReport:
    idx, attrs, attr_names, labels, _roles = read_reduced_csv(reduced_path)
    if len(attr_names) != original.spec.n_attrs:
        raise DataError(
            f"{reduced_path}: {len(attr_names)} attributes, original has {original.spec.n_attrs}"
        )
    sidecar = provenance_sidecar_path(reduced_path)
    meta = read_provenance(sidecar) if sidecar.exists() else {}
    method = meta.get("method", Path(reduced_path).stem)
    from .evaluate import representation_distances  # local import to keep CLI import light

    dists = representation_distances(original, idx, attrs)
    nonnull = original.nonnull_count
    return ReductionReport(
        method=method,
        reduction_ratio=idx.shape[0] / nonnull,
        coverage_radius=float(dists.max()),
        mean_nn_error=float(dists.mean()),
        cluster_count=int(meta.get("param.cluster_count", 0)),
        core_fraction=float(meta.get("param.core_count", 0)) / nonnull,
        noise_fraction=float(meta.get("param.noise_count", 0)) / nonnull,
        runtime_ms=0,
    )


def _cmd_eval(args) -> int:
    original = _load_original(args)
    reports = []
    for reduced_path in args.reduced:
        try:
            reports.append(_report_from_files(original, reduced_path))
        except (DataError, ValueError, OSError) as exc:
            reports.append(ReductionReport(method=Path(reduced_path).stem, error=str(exc)))
    if args.out:
        write_report_csv(reports, args.out)
        print(f"wrote {args.out}")
    else:
        from .evaluate import REPORT_FIELDS

        print(",".join(REPORT_FIELDS) + ",error")
        for report in reports:
            print(format_report_row(report))
    return 0


def _load_original(args):
    sources = [args.original_csv is not None, args.original_brick is not None]
    if sum(sources) != 1:
        raise _UsageError("exactly one of --original-csv, --original-brick is required")
    if args.original_csv is not None:
        return load_csv(args.original_csv, null_sentinel=args.sentinel)
    if args.original_dims is None:
        raise _UsageError("--original-brick requires --original-dims")
    spec = GridSpec(args.original_dims, ("value",), args.sentinel)
    return load_brick(args.original_brick, spec)


def _cmd_export(args) -> int:
    idx, attrs, attr_names, labels, roles = read_reduced_csv(args.input)
    if args.format == "csv":
        write_reduced_rows(args.out, attr_names, idx, attrs, labels, roles)
    elif args.format == "ply":
        write_ply(args.out, idx, attrs, attr_name=attr_names[0], labels=labels)
    else:
        write_vtk(args.out, idx, attrs, attr_name=attr_names[0], labels=labels)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridreduce", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="write a synthetic dataset CSV")
    p_gen.add_argument("--dims", type=_dims, default=(48, 48, 12),
                       help="grid size NXxNYxNZ (default 48x48x12)")
    p_gen.add_argument("--style", choices=("volume", "clusters"), default="volume",
                       help="volume: smooth field on the whole grid; "
                            "clusters: separated groups, background null")
    p_gen.add_argument("--blobs", type=int, default=3, help="number of blobs (default 3)")
    p_gen.add_argument("--blob", type=_blob, action="append", default=None,
                       metavar="CX,CY,CZ,R,PEAK",
                       help="explicit blob (volume style); repeatable, overrides --blobs")
    p_gen.add_argument("--noise-fraction", type=float, default=0.0)
    p_gen.add_argument("--null-fraction", type=float, default=0.0)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="output CSV path")
    p_gen.set_defaults(func=_cmd_gen)

    p_red = sub.add_parser("reduce", help="run one reduction method")
    _add_input_flags(p_red)
    p_red.add_argument("--method", choices=("snn", "scaling", "kmedoids"), required=True)
    p_red.add_argument("--k", type=int, default=20, help="neighbor list size (snn)")
    p_red.add_argument("--eps", type=int, default=None, help="similarity floor override (snn)")
    p_red.add_argument("--min-pts", type=int, default=None, help="core density override (snn)")
    p_red.add_argument("--eps-percentile", type=float, default=0.30)
    p_red.add_argument("--core-fraction", type=float, default=0.40)
    p_red.add_argument("--divisions", type=_divisions, default=None, metavar="DX,DY,DZ",
                       help="boxes per axis (scaling)")
    p_red.add_argument("--edge", type=int, default=None,
                       help="box edge length in cells (scaling alternative)")
    p_red.add_argument("--clusters", type=int, default=None, help="cluster count (kmedoids)")
    p_red.add_argument("--per-cluster", type=int, default=1,
                       help="representatives per cluster, medoid included (kmedoids)")
    p_red.add_argument("--max-swap-iters", type=int, default=100)
    p_red.add_argument("--sample-size", type=int, default=None,
                       help="kmedoids sampling threshold (default 100000)")
    p_red.add_argument("--parts", type=int, default=1, help="partition count (snn)")
    p_red.add_argument("--axis", choices=("x", "y", "z", "auto"), default="auto")
    p_red.add_argument("--memory-cap", type=int, default=None, metavar="BYTES",
                       help="advisory memory cap; slabs are always processed sequentially")
    p_red.add_argument("--seed", type=int, default=0)
    p_red.add_argument("--threads", type=int, default=1,
                       help="worker threads for the neighbor search")
    p_red.add_argument("--out", required=True, help="representatives CSV path")
    p_red.set_defaults(func=_cmd_reduce)

    p_eval = sub.add_parser("eval", help="score reduced files against their original")
    p_eval.add_argument("--original-csv")
    p_eval.add_argument("--original-brick")
    p_eval.add_argument("--original-dims", type=_dims, default=None)
    p_eval.add_argument("--sentinel", type=float, default=DEFAULT_SENTINEL)
    p_eval.add_argument("reduced", nargs="+", help="representatives CSV files")
    p_eval.add_argument("--out", default=None, help="report CSV path (default: stdout)")
    p_eval.set_defaults(func=_cmd_eval)

    p_exp = sub.add_parser("export", help="convert representatives for external viewers")
    p_exp.add_argument("--input", required=True, help="representatives CSV")
    p_exp.add_argument("--format", choices=("csv", "ply", "vtk"), required=True)
    p_exp.add_argument("--out", required=True)
    p_exp.set_defaults(func=_cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 1
    except (DataError, ValueError) as exc:
        message = str(exc).replace("\n", " ")
        print(f"error: data: {message}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - exit-code contract
        message = str(exc).replace("\n", " ")
        print(f"error: internal: {type(exc).__name__}: {message}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
