"""Command-line surface: order export, pattern dumps, simulation, sweeps.

Exit codes: 0 on success, 2 for bad input (unknown schemes, malformed files,
missing paths), 1 for internal failures such as solver divergence.  Errors go
to standard error; results go to files.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
import time
import tracemalloc
from pathlib import Path

import numpy as np

from hadafold.core import fwht_in_place, history_to_pattern, serial_to_history
from hadafold.fileio import read_pgm, write_pbm, write_permutation, write_pgm
from hadafold.harness import (
    CSV_HEADER,
    SweepRow,
    format_row,
    load_measurement_set,
    parse_config,
    run_simulate,
    run_sweep,
)
from hadafold.metrics import mssim, psnr
from hadafold.orderings import (
    SCHEMES,
    cake_cutting_order,
    get_ordering,
    natural_order,
    origami_order,
    russian_dolls_order,
    sequency_order,
    weight_order,
)
from hadafold.reconstruct import (
    SolverConfig,
    SolverDivergence,
    linear_reconstruct,
    tv_reconstruct,
)

_BUILDERS = {
    "NA": natural_order,
    "SE": sequency_order,
    "RD": russian_dolls_order,
    "OR": origami_order,
    "CC": cake_cutting_order,
    "WH": weight_order,
}

_PATTERNS_README = """\
Hadamard basis patterns, one PBM file per rank.

Files are named pattern_<rank>.pbm and follow the {scheme} ordering at
k = {k} (N = {n} patterns of {side}x{side} cells).  Each pattern is the
Hadamard row of the serial listed by the ordering, reshaped row-major.
Convention: +1 cells are white (PBM bit 0), -1 cells are black (PBM bit 1).
"""


def cmd_order(args) -> int:
    perm = get_ordering(args.scheme, args.k)
    write_permutation(args.out, perm)
    print(f"wrote {args.out} ({args.scheme} k={args.k}, {perm.n} ranks)")
    return 0


def cmd_patterns(args) -> int:
    perm = get_ordering(args.scheme, args.k)
    if not 1 <= args.count <= perm.n:
        raise ValueError(f"count must be in [1, {perm.n}], got {args.count}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    width = len(str(args.count))
    for rank in range(1, args.count + 1):
        pattern = history_to_pattern(serial_to_history(perm.serial_at(rank), args.k))
        write_pbm(out_dir / f"pattern_{rank:0{width}d}.pbm", pattern, ascii_format=args.ascii)
    side = 1 << (args.k // 2)
    readme = _PATTERNS_README.format(scheme=args.scheme, k=args.k, n=perm.n, side=side)
    (out_dir / "README.txt").write_text(readme, encoding="ascii")
    print(f"wrote {args.count} patterns to {out_dir}")
    return 0


def cmd_simulate(args) -> int:
    config = parse_config(args.config)
    paths = run_simulate(config)
    for path in paths:
        print(f"wrote {path}")
    return 0


def _solver_from_args(args) -> SolverConfig:
    overrides = {}
    for name in ("mu", "beta", "outer_max", "inner_max", "tol"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.no_nonneg:
        overrides["nonneg"] = False
    return dataclasses.replace(SolverConfig(), **overrides)


def _append_table_row(path, row: SweepRow) -> None:
    target = Path(path)
    fresh = not target.exists() or target.stat().st_size == 0
    with target.open("a", encoding="ascii", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\r\n")
        if fresh:
            writer.writerow(CSV_HEADER)
        writer.writerow(format_row(row))


def cmd_reconstruct(args) -> int:
    measured = load_measurement_set(args.measurements)
    if args.method == "tv":
        result = tv_reconstruct(measured, _solver_from_args(args))
    else:
        result = linear_reconstruct(measured)
    write_pgm(args.out, result.image)

    row = SweepRow(
        scheme=measured.plan.ordering.scheme,
        k=measured.plan.ordering.k,
        sampling_ratio=measured.plan.sampling_ratio,
        noise_model=measured.noise.model,
        snri_db=measured.noise.snri_db,
        od=measured.noise.od,
        outer_iters=result.outer_iters,
    )
    summary = f"wrote {args.out} ({args.method}, {result.outer_iters} outer iterations"
    if args.reference is not None:
        reference = read_pgm(args.reference)
        row.psnr_db = psnr(reference, result.image)
        row.mssim = mssim(reference, result.image)
        summary += f", psnr {row.psnr_db:.2f} dB, mssim {row.mssim:.4f}"
    summary += ")"
    if args.table is not None:
        _append_table_row(args.table, row)
    print(summary)
    return 0


def cmd_sweep(args) -> int:
    config = parse_config(args.config)
    rows = run_sweep(config, jobs=args.jobs)
    failures = [row for row in rows if row.error]
    print(f"wrote {Path(config.output_dir) / 'sweep.csv'} ({len(rows)} rows)")
    if failures:
        print(f"warning: {len(failures)} grid points failed; see the error column", file=sys.stderr)
    return 0


def _bench_one(k: int) -> None:
    n = 1 << k
    budget = 64 * n + 262_144  # O(N) table budget plus interpreter noise
    print(f"k={k} N={n}")
    print(f"  {'scheme':<7}{'build_ms':>10}{'peak_bytes':>13}{'bytes/N':>9}  budget")
    for scheme in SCHEMES:
        builder = _BUILDERS[scheme]
        tracemalloc.start()
        start = time.perf_counter()
        builder(k)
        elapsed = (time.perf_counter() - start) * 1e3
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        verdict = "ok" if peak <= budget else "OVER"
        print(f"  {scheme:<7}{elapsed:>10.2f}{peak:>13}{peak / n:>9.1f}  {verdict}")
    vec = np.random.default_rng(0).standard_normal(n)
    start = time.perf_counter()
    fwht_in_place(vec)
    fwht_ms = (time.perf_counter() - start) * 1e3
    print(f"  fwht_ms {fwht_ms:.2f}")


def cmd_bench(args) -> int:
    for k in args.k:
        if k % 2 or not 2 <= k <= 24:
            raise ValueError(f"bench requires even k in [2, 24], got {k}")
    for k in args.k:
        _bench_one(k)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hadafold",
        description="Hadamard basis orderings and single-pixel imaging simulations.",
    )
    sub = parser.add_subparsers(dest="command")

    p_order = sub.add_parser("order", help="export an ordering as a permutation file")
    p_order.add_argument("scheme", choices=SCHEMES)
    p_order.add_argument("k", type=int, help="order exponent; N = 2**k")
    p_order.add_argument("out", help="output permutation file")
    p_order.set_defaults(func=cmd_order)

    p_pat = sub.add_parser("patterns", help="dump the first patterns of an ordering as PBM")
    p_pat.add_argument("scheme", choices=SCHEMES)
    p_pat.add_argument("k", type=int)
    p_pat.add_argument("count", type=int)
    p_pat.add_argument("out_dir")
    p_pat.add_argument("--ascii", action="store_true", help="write P1 instead of P4")
    p_pat.set_defaults(func=cmd_patterns)

    p_sim = sub.add_parser("simulate", help="write measurement CSVs for a config grid")
    p_sim.add_argument("config", help="flat key = value config file")
    p_sim.set_defaults(func=cmd_simulate)

    p_rec = sub.add_parser("reconstruct", help="reconstruct an image from a measurement CSV")
    p_rec.add_argument("measurements", help="measurement CSV from simulate")
    p_rec.add_argument("--method", choices=("tv", "linear"), default="tv")
    p_rec.add_argument("--out", required=True, help="output PGM path")
    p_rec.add_argument("--reference", help="reference PGM for PSNR/MSSIM scoring")
    p_rec.add_argument("--table", help="CSV to append the result row to")
    p_rec.add_argument("--mu", type=float)
    p_rec.add_argument("--beta", type=float)
    p_rec.add_argument("--outer-max", dest="outer_max", type=int)
    p_rec.add_argument("--inner-max", dest="inner_max", type=int)
    p_rec.add_argument("--tol", type=float)
    p_rec.add_argument("--no-nonneg", action="store_true", help="drop the non-negativity constraint")
    p_rec.set_defaults(func=cmd_reconstruct)

    p_sweep = sub.add_parser("sweep", help="run a full scheme x ratio x SNR sweep")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)

    p_bench = sub.add_parser("bench", help="time ordering construction and the transform")
    p_bench.add_argument("--k", type=int, nargs="+", default=[4, 12, 16])
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "func", None) is None:
        parser.print_help(sys.stderr)
        return 2
    try:
        return args.func(args)
    except SolverDivergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - unexpected internal failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
