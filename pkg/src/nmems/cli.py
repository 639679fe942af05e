"""Command-line entry point: ``nmems <subcommand> ...``.

Exit status is 0 on success, 1 on a usage error (bad flag, unknown family,
parameter out of range, unreadable matrix file) and 2 when an input matrix
fails the density-matrix checks.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .closed_forms import family_closed_forms, matrix_closed_forms
from .linalg import DensityValidationError, density_violations, validate_density
from .metrics import compute_metrics
from .states import FamilyError, all_families, materialize, parse_family
from .sweep import (
    CLAIMS,
    SweepConfig,
    ThresholdError,
    check_claims,
    figure_data,
    find_threshold,
    grid,
    sweep,
    table1,
)
from .teleport import WERNER_ALIGNMENT, TeleportRun, run

OUTPUT_DIR_ENV = "NMEMS_OUTPUT_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def output_dir():
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def _out_path(given, default_name):
    if given:
        return Path(given)
    return output_dir() / default_name


def _param(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {text!r} is not a number") from None
    if not (0.0 <= x <= 1.0) or math.isnan(x):
        raise argparse.ArgumentTypeError(f"parameter {text!r} is outside [0, 1]")
    return x


def read_matrix(path):
    """A 4x4 complex matrix from four lines of ``re,im`` pairs (whitespace separated)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read matrix file {str(path)!r}: {exc.strerror or exc}") from None
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if len(lines) != 4:
        raise UsageError(f"matrix file {str(path)!r} must have 4 rows, found {len(lines)}")
    m = np.zeros((4, 4), dtype=np.complex128)
    for i, line in enumerate(lines):
        tokens = line.replace(";", " ").split()
        if len(tokens) != 4:
            raise UsageError(f"matrix file {str(path)!r} row {i + 1} has {len(tokens)} entries, expected 4")
        for j, tok in enumerate(tokens):
            parts = tok.split(",")
            try:
                if len(parts) != 2:
                    raise ValueError
                m[i, j] = complex(float(parts[0]), float(parts[1]))
            except ValueError:
                raise UsageError(f"matrix file {str(path)!r} row {i + 1}: bad entry {tok!r} (expected re,im)") from None
    return m


def _family(text, param):
    try:
        return parse_family(text, param)
    except FamilyError as exc:
        raise UsageError(str(exc)) from None


def _source(args):
    """``(rho, StateFamily or None)`` from ``family --p`` or ``--matrix``."""
    if args.matrix:
        if args.family:
            raise UsageError(f"give either a family ({args.family!r}) or --matrix, not both")
        return read_matrix(args.matrix), None
    if not args.family:
        raise UsageError("a family selector (e.g. rho1:phi+) or --matrix FILE is required")
    fam = _family(args.family, args.p)
    return materialize(fam), fam


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _dumps(obj):
    return json.dumps(obj, indent=2)


def metrics_payload(rho, fam):
    report = compute_metrics(validate_density(rho), fam)
    closed = family_closed_forms(fam, report) if fam is not None else matrix_closed_forms(rho, report)
    flat = report.to_dict()
    return {
        "report": flat,
        "closed_forms": [{k: _json_safe(v) for k, v in cf.to_dict().items()} for cf in closed],
    }, report, closed


def cmd_metrics(args):
    rho, fam = _source(args)
    payload, report, closed = metrics_payload(rho, fam)
    if args.format == "json":
        print(_dumps(payload))
    elif args.format == "csv":
        from .metrics import CSV_COLUMNS

        print(",".join(CSV_COLUMNS))
        print(",".join(report.csv_row()))
    else:
        name = fam.label if fam else "matrix"
        head = f"{name}" + (f" at p = {fam.param:g}" if fam else "")
        print(head)
        print(f"  C = {report.concurrence:.4f}")
        print(f"  f = {report.fidelity:.4f}")
        print(f"  N = {report.n_value:.4f}")
        print(f"  L = {report.linear_entropy:.4f}")
        print(f"  M = {report.m_value:.4f}")
        print(f"  X-type: {'yes' if report.is_x else 'no'}")
        print(f"  useful for teleportation (N > 1): {'yes' if report.useful_for_teleport else 'no'}")
        print(f"  violates Bell-CHSH (M > 1): {'yes' if report.violates_bell else 'no'}")
        if closed:
            print("  printed expressions:")
            for cf in closed:
                print(f"    {cf.source:28s} {cf.value:+.10f}  delta {cf.abs_delta:.2e}  {cf.status}")
    return 0


def _families(names):
    if not names:
        return all_families()
    return [_family(n, 0.0) for n in names]


def cmd_sweep(args):
    fams = _families(args.families)
    csv_path = _out_path(args.csv, "sweep.csv")
    json_path = _out_path(args.json, "sweep.json")
    try:
        cfg = SweepConfig(fams, args.start, args.stop, args.step, csv_path=str(csv_path), json_path=str(json_path),
                          workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = sweep(cfg)
    mism = sum(cf.status == "Mismatch" for r in rows for cf in r.closed)
    print(f"{len(rows)} grid points, {mism} closed-form mismatches -> {csv_path}, {json_path}")
    return 0


def cmd_thresholds(args):
    if args.family:
        if args.metric is None or args.predicate is None or args.bracket is None:
            raise UsageError("a custom threshold needs --metric, --predicate and --bracket LO HI")
        fam = _family(args.family, 0.0)
        try:
            res = find_threshold(fam, args.metric, args.predicate, args.bracket, args.tol, args.source)
        except (ThresholdError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        if args.format == "json":
            print(_dumps(res.to_dict()))
        else:
            print(f"{res.family} {res.metric} {res.predicate}: root {res.root:.6f} in [{res.lo:.7f}, {res.hi:.7f}]")
        return 0
    results = check_claims(CLAIMS, tol=args.tol)
    if args.format == "json":
        print(_dumps([r.to_dict() for r in results]))
        return 0
    for r in results:
        d = r.to_dict()
        gen = ", ".join(f"{x:.4f}" for x in d["generic_roots"]) or "none"
        clo = ", ".join(f"{x:.4f}" for x in d["closed_roots"]) or "none"
        claimed = ", ".join(f"{x:g}" for x in d["claimed"])
        print(f"{d['status']:>10s}  {d['claim']:30s} claimed {claimed:12s} generic {gen:18s} printed-form {clo}")
    return 0


def cmd_table1(args):
    t = table1()
    if args.format == "json":
        print(_dumps(t.records()))
    elif args.format == "csv":
        recs = t.records()
        cols = list(recs[0])
        print(",".join(cols))
        for r in recs:
            print(",".join(format(r[c], ".17g" if c == "p" or c.endswith("_raw") else ".2f") for c in cols))
    else:
        print(t.format())
    return 0


def cmd_figures(args):
    out = output_dir() if args.out_dir is None else Path(args.out_dir)
    figs = args.figure or [1, 2, 3, 4]
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {str(out)!r}: {exc.strerror or exc}") from None
    for n in figs:
        data = figure_data(n, args.step)
        path = out / f"figure{n}.csv"
        try:
            data.write_csv(path)
        except OSError as exc:
            raise UsageError(f"cannot write {str(path)!r}: {exc.strerror or exc}") from None
        print(f"figure {n}: {len(data.rows)} rows -> {path}")
    return 0


def cmd_simulate(args):
    rho, fam = _source(args)
    rho = validate_density(rho)
    align = args.align
    if align == "auto":
        align = "werner" if fam is not None and fam.family.value == "werner" else "none"
    pre = WERNER_ALIGNMENT if align == "werner" else None
    if args.samples < 1:
        raise UsageError(f"--samples must be >= 1, got {args.samples}")
    if not 1 <= args.shards <= args.samples:
        raise UsageError(f"--shards must lie in [1, samples], got {args.shards}")
    res = run(TeleportRun(rho, args.samples, args.seed, pre), shards=args.shards, workers=args.workers)
    d = res.to_dict()
    d["channel"] = fam.label if fam else str(args.matrix)
    d["param"] = fam.param if fam else None
    d["preRotation"] = align
    print(_dumps(d))
    print(res.summary(), file=sys.stderr)
    return 0


def cmd_validate(args):
    if args.matrix:
        m = read_matrix(args.matrix)
        bad = density_violations(m, args.tol)
        if bad:
            for v in bad:
                print(f"{args.matrix}: {v.kind}: {v.detail}", file=sys.stderr)
            return 2
        print(f"{args.matrix}: valid density matrix")
        return 0
    fams = _families(args.families)
    failures = 0
    pts = grid(0.0, 1.0, 1.0 / (args.points - 1))
    for fam in fams:
        for p in pts:
            try:
                materialize(fam.with_param(p), tol=args.tol)
            except DensityValidationError as exc:
                failures += 1
                print(f"{fam.label} at {p:g}: {exc}", file=sys.stderr)
    print(f"checked {len(fams)} families x {len(pts)} points: {failures} failures")
    return 2 if failures else 0


def build_parser():
    p = _Parser(prog="nmems", description="Entanglement, teleportation and Bell metrics for two-qubit mixed states.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_source(sp):
        sp.add_argument("family", nargs="?", help="family selector <family>[:<bell>], e.g. rho1:phi+")
        sp.add_argument("--p", type=_param, default=0.0, help="mixing parameter in [0, 1]")
        sp.add_argument("--matrix", help="4x4 matrix file: 4 rows of 're,im' pairs")

    sp = sub.add_parser("metrics", help="metrics and printed-expression checks for one state")
    add_source(sp)
    sp.add_argument("--format", choices=("pretty", "json", "csv"), default="pretty")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("sweep", help="grid sweep with CSV and JSON output")
    sp.add_argument("families", nargs="*", help="family selectors (default: all)")
    sp.add_argument("--start", type=_param, default=0.0)
    sp.add_argument("--stop", type=_param, default=1.0)
    sp.add_argument("--step", type=float, default=0.01)
    sp.add_argument("--csv")
    sp.add_argument("--json")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("thresholds", help="locate printed range boundaries (default: the whole catalogue)")
    sp.add_argument("family", nargs="?")
    sp.add_argument("--metric", choices=("C", "f", "N", "L", "M"))
    sp.add_argument("--predicate", help="e.g. '> 1' or '> 2/3'")
    sp.add_argument("--bracket", nargs=2, type=_param, metavar=("LO", "HI"))
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--source", default="generic", help="'generic' or a printed-expression tag")
    sp.add_argument("--format", choices=("pretty", "json"), default="pretty")
    sp.set_defaults(func=cmd_thresholds)

    sp = sub.add_parser("table1", help="fidelity table at p = 0, 0.1, ..., 1")
    sp.add_argument("--format", choices=("pretty", "json", "csv"), default="pretty")
    sp.set_defaults(func=cmd_table1)

    sp = sub.add_parser("figures", help="write figure datasets as CSV")
    sp.add_argument("--figure", type=int, action="append", choices=(1, 2, 3, 4))
    sp.add_argument("--step", type=float, default=0.01)
    sp.add_argument("--out-dir")
    sp.set_defaults(func=cmd_figures)

    sp = sub.add_parser("simulate", help="Monte Carlo teleportation through a channel state")
    add_source(sp)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--shards", type=int, default=1)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument(
        "--align",
        choices=("auto", "none", "werner"),
        default="auto",
        help="local rotation before the protocol; auto rotates singlet-based Werner channels",
    )
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("validate", help="density-matrix checks for family grids or a matrix file")
    sp.add_argument("families", nargs="*")
    sp.add_argument("--matrix")
    sp.add_argument("--points", type=int, default=101)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"nmems: error: {exc}", file=sys.stderr)
        return 1
    except DensityValidationError as exc:
        print(f"nmems: invalid density matrix: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
