"""Command-line benchmark harness: generate, solve, refine, report.

Subcommands
    gen     write a generated system to a directory as A.mpmat, b.mpmat,
            x_true.mpmat (rounded to --long-bits)
    direct  downconvert a stored system to one short precision, run
            lu_factor_pp + lu_solve, emit one report row
    refine  run mixed-precision iterative refinement, emit one report row
    bench   for every precision in --precs run direct and refine on one
            internally generated system, plus a long-precision direct
            baseline row

Report rows share a single schema; the CSV header line is fixed:

    kind,prec,long_bits,n,seed,simd,time_seconds,max_rel_err,iterations,\
stop_reason,status

JSON output is one object per row with the same keys and values (fields
that do not apply are empty in CSV and null in JSON). status is "ok" or
"error: <detail>"; a singular system still produces its row and the exit
code stays 0 as long as every requested row was emitted. time_seconds
covers factor+solve (for refine, the whole refinement loop) and never
generation, conversion, or file I/O.

MPCORE_SIMD in the environment overrides --simd for every subcommand.
"""

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import matfile
from .errors import MpcoreError, SingularMatrixError
from .linalg import (
    BfDomain,
    McDomain,
    convert_matrix,
    convert_vector,
    lu_factor_pp,
    lu_solve,
    max_rel_err,
)
from .refine import RefineConfig, iterative_refinement
from .simd import ENV_VAR, resolve_simd
from .testgen import ProblemSpec, build_system

FIELDS = ("kind", "prec", "long_bits", "n", "seed", "simd", "time_seconds",
          "max_rel_err", "iterations", "stop_reason", "status")
SHORT_PRECS = ("dd", "td", "qd")
SYSTEM_FILES = ("A.mpmat", "b.mpmat", "x_true.mpmat")

__all__ = ["main", "FIELDS"]


def _positive_dim(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("not an integer: %r" % text)
    if n < 2:
        raise argparse.ArgumentTypeError("n must be >= 2, got %d" % n)
    return n


def _effective_simd(flag):
    # env var wins over the command line when set at all
    if os.environ.get(ENV_VAR) is not None:
        return resolve_simd(None)
    return flag == "on"


def _load_system(sysdir):
    paths = [os.path.join(sysdir, name) for name in SYSTEM_FILES]
    A = matfile.load_matrix(paths[0])
    b = matfile.load_vector(paths[1])
    x_true = matfile.load_vector(paths[2])
    if A.domain.kind != "bf":
        raise MpcoreError("system files must hold long-precision values, "
                          "found tag %r" % A.domain.name)
    return A, b, x_true


def _row(kind, prec, long_bits, n, seed, simd):
    return {
        "kind": kind, "prec": prec, "long_bits": long_bits, "n": n,
        "seed": seed, "simd": "on" if simd else "off", "time_seconds": None,
        "max_rel_err": None, "iterations": None, "stop_reason": None,
        "status": "ok",
    }


def direct_row(A, b, x_true, prec, simd, seed=None):
    """Solve the stored system directly at one precision; returns a row dict.

    prec is dd/td/qd for a short multi-component solve or an "mp" tag for
    a BigFloat solve at the system's stored precision.
    """
    long_bits = A.domain.ctx.p
    row = _row("direct", prec, long_bits, A.rows, seed, simd)
    if prec in SHORT_PRECS:
        dom = McDomain(prec)
    else:
        dom = BfDomain(long_bits)
        row["prec"] = "mp%d" % long_bits
    As = convert_matrix(A, dom)
    bs = convert_vector(b, dom)
    try:
        t0 = time.perf_counter()
        piv = lu_factor_pp(As, simd=simd)
        x = lu_solve(As, piv, bs, simd=simd)
        row["time_seconds"] = time.perf_counter() - t0
    except SingularMatrixError as exc:
        row["status"] = "error: %s" % exc
        return row
    row["max_rel_err"] = max_rel_err(x, x_true)
    return row


def refine_row(A, b, x_true, prec, cfg, simd, seed=None):
    """Run iterative refinement on the stored system; returns a row dict."""
    row = _row("refine", prec, cfg.long_bits, A.rows, seed, simd)
    try:
        t0 = time.perf_counter()
        report = iterative_refinement(A, b, cfg, simd=simd)
        row["time_seconds"] = time.perf_counter() - t0
    except SingularMatrixError as exc:
        row["status"] = "error: %s" % exc
        return row
    row["max_rel_err"] = max_rel_err(report.solution, x_true)
    row["iterations"] = report.iterations
    row["stop_reason"] = report.stop_reason
    return row


def _cell(value):
    return "" if value is None else str(value)


def _emit(rows, fmt, out):
    if fmt == "json":
        text = "".join(json.dumps(r) + "\n" for r in rows)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(FIELDS)
        for r in rows:
            w.writerow([_cell(r[f]) for f in FIELDS])
        text = buf.getvalue()
    if out:
        with open(out, "w", encoding="ascii", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _refine_cfg(args, prec):
    return RefineConfig(short_k=SHORT_PRECS.index(prec) + 2,
                        long_bits=args.long_bits, rtol=args.rtol,
                        atol=args.atol, max_iter=args.max_iter)


def cmd_gen(args):
    system = build_system(ProblemSpec(n=args.n, seed=args.seed))
    dom = BfDomain(args.long_bits)
    os.makedirs(args.out, exist_ok=True)
    parts = (convert_matrix(system.A, dom), convert_vector(system.b, dom),
             convert_vector(system.x_true, dom))
    for name, part in zip(SYSTEM_FILES, parts):
        path = os.path.join(args.out, name)
        if name == "A.mpmat":
            matfile.save_matrix(path, part)
        else:
            matfile.save_vector(path, part)
        print(path)
    return 0


def cmd_direct(args):
    A, b, x_true = _load_system(args.sys)
    simd = _effective_simd(args.simd)
    rows = [direct_row(A, b, x_true, args.prec, simd, seed=args.seed)]
    _emit(rows, args.format, args.out)
    return 0


def cmd_refine(args):
    A, b, x_true = _load_system(args.sys)
    simd = _effective_simd(args.simd)
    cfg = _refine_cfg(args, args.prec)
    rows = [refine_row(A, b, x_true, args.prec, cfg, simd, seed=args.seed)]
    _emit(rows, args.format, args.out)
    return 0


def cmd_bench(args):
    precs = [p.strip() for p in args.precs.split(",") if p.strip()]
    for p in precs:
        if p not in SHORT_PRECS:
            raise MpcoreError("unknown precision tag %r" % p)
    simd = _effective_simd(args.simd)
    system = build_system(ProblemSpec(n=args.n, seed=args.seed))
    dom = BfDomain(args.long_bits)
    A = convert_matrix(system.A, dom)
    b = convert_vector(system.b, dom)
    x_true = convert_vector(system.x_true, dom)

    tasks = []
    for p in precs:
        tasks.append(lambda p=p: direct_row(A, b, x_true, p, simd,
                                            seed=args.seed))
        tasks.append(lambda p=p: refine_row(A, b, x_true, p,
                                            _refine_cfg(args, p), simd,
                                            seed=args.seed))
    tasks.append(lambda: direct_row(A, b, x_true, "mp", simd, seed=args.seed))

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(lambda t: t(), tasks))
    else:
        rows = [t() for t in tasks]
    _emit(rows, args.format, args.out)
    return 0


def _add_report_flags(p, with_refine):
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--simd", choices=("on", "off"), default="on")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="report file (default stdout)")
    if with_refine:
        p.add_argument("--long-bits", type=int, default=424)
        p.add_argument("--rtol", default="1e-100")
        p.add_argument("--atol", default="0")
        p.add_argument("--max-iter", type=int, default=50)


def build_parser():
    ap = argparse.ArgumentParser(prog="mpcore", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate and store a benchmark system")
    g.add_argument("--n", type=_positive_dim, default=200)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--long-bits", type=int, default=424)
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("direct", help="direct solve of a stored system")
    d.add_argument("--sys", required=True, help="system directory from gen")
    d.add_argument("--prec", choices=SHORT_PRECS, default="dd")
    _add_report_flags(d, with_refine=False)
    d.set_defaults(func=cmd_direct)

    r = sub.add_parser("refine", help="iterative refinement of a stored system")
    r.add_argument("--sys", required=True, help="system directory from gen")
    r.add_argument("--prec", choices=SHORT_PRECS, default="dd")
    _add_report_flags(r, with_refine=True)
    r.set_defaults(func=cmd_refine)

    bench = sub.add_parser("bench", help="generate, solve and refine at every "
                                         "precision, with a long-precision "
                                         "baseline")
    bench.add_argument("--n", type=_positive_dim, default=200)
    bench.add_argument("--precs", default="dd,td,qd",
                       help="comma list of dd/td/qd")
    bench.add_argument("--jobs", type=int, default=1,
                       help="worker threads for independent rows")
    _add_report_flags(bench, with_refine=True)
    bench.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MpcoreError, OSError) as exc:
        print("mpcore: error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
