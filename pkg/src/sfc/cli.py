"""``sfc`` command line: one subcommand per library operation.

Every invocation prints a one-line JSON summary on stdout.  Exit status is
0 on success, 2 for bad arguments or unsupported configurations, and 1 for
domain errors raised while running.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from . import io as sfcio
from . import metrics, toyset
from .curves import (
    CurveKind,
    build_map,
    flatten,
    fold,
    fold_array,
    patch_order,
)
from .errors import ConfigurationError, SFCError

SQUARE_KINDS = (CurveKind.HILBERT, CurveKind.MORTON, CurveKind.ZIGZAG)


class UsageError(Exception):
    """Bad command-line input; reported with exit status 2."""


# -- argument helpers -----------------------------------------------------


def _curve(value: str) -> CurveKind:
    try:
        return CurveKind.parse(value)
    except ConfigurationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _fraction(value: str) -> Fraction:
    try:
        return Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number P/Q: {value!r}") from exc


def _positive_int(value: str) -> int:
    try:
        v = int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from exc
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _shapes(value: str) -> list[str]:
    names = [s.strip().lower() for s in value.split(",") if s.strip()]
    valid = {s.value for s in toyset.Shape}
    bad = [s for s in names if s not in valid]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"shapes must be a comma list of {sorted(valid)}, got {value!r}")
    return names


def _grid(args, required: bool = True) -> tuple[int, int] | None:
    kind = args.curve
    if args.order is not None and (args.width is not None or args.height is not None):
        raise UsageError("--order cannot be combined with --width/--height")
    if args.order is not None:
        if args.order < 1 or args.order > 15:
            raise UsageError(f"--order must lie in 1..15, got {args.order}")
        side = 1 << args.order
        return side, side
    if args.width is None and args.height is None:
        if required:
            raise UsageError("give --order N or --width W --height H")
        return None
    if args.width is None or args.height is None:
        raise UsageError("--width and --height must be given together")
    w, h = args.width, args.height
    if kind in SQUARE_KINDS and (w != h or w < 2 or w & (w - 1)):
        raise UsageError(
            f"--width/--height: {kind.value} needs a square power-of-two grid, got {w}x{h}; "
            "use --curve ghilbert for arbitrary rectangles"
        )
    return w, h


def _add_grid(p: argparse.ArgumentParser, curve_default: str | None = "hilbert") -> None:
    p.add_argument("--curve", type=_curve, default=CurveKind.parse(curve_default) if curve_default else None,
                   help="hilbert, morton, zigzag or ghilbert")
    p.add_argument("--order", type=int, default=None, help="side exponent; grid is 2**N x 2**N")
    p.add_argument("--width", type=_positive_int, default=None, help="grid width W")
    p.add_argument("--height", type=_positive_int, default=None, help="grid height H")


def _require_out(out: str | None, flag: str = "--out") -> Path:
    if not out:
        raise UsageError(f"{flag} is required")
    return Path(out)


# -- subcommands ----------------------------------------------------------


def cmd_map(args) -> dict:
    w, h = _grid(args)
    cmap = build_map(args.curve, w, h)
    out = _require_out(args.out)
    if args.format == "json":
        sfcio.write_json(out, {"kind": cmap.kind.value, "width": w, "height": h,
                               "forward": cmap.forward.tolist()})
    else:
        sfcio.write_curve_map(out, cmap)
    return {"kind": cmap.kind.value, "width": w, "height": h, "cells": cmap.size, "outputs": [str(out)]}


def cmd_flatten(args) -> dict:
    image = sfcio.read_pgm(args.input)
    dims = _grid(args, required=False) or (image.width, image.height)
    cmap = build_map(args.curve, *dims)
    seq = flatten(image, cmap)
    out = _require_out(args.out)
    sfcio.write_sequence(out, seq)
    return {"kind": cmap.kind.value, "length": int(seq.size), "outputs": [str(out)]}


def cmd_fold(args) -> dict:
    w, h = _grid(args)
    cmap = build_map(args.curve, w, h)
    seq = sfcio.read_sequence(args.input)
    out = _require_out(args.out)
    if args.format == "csv":
        grid = fold_array(seq, cmap)
        rows = ((x, y, float(grid[y, x])) for y in range(h) for x in range(w))
        sfcio.write_csv(out, ("x", "y", "value"), rows)
    else:
        sfcio.write_pgm(out, sfcio.image_levels(fold(seq, cmap)), binary=True)
    return {"kind": cmap.kind.value, "width": w, "height": h, "outputs": [str(out)]}


def cmd_patch_order(args) -> dict:
    perm = patch_order(args.width, args.height)
    out = _require_out(args.out)
    sfcio.write_permutation(out, perm)
    return {"width": args.width, "height": args.height, "tokens": int(perm.size), "outputs": [str(out)]}


def _write_degrid(fld: metrics.DeGridField, out: Path, fmt: str) -> None:
    if fmt == "pgm":
        sfcio.write_pgm(out, fld.heatmap(), binary=False)
    else:
        sfcio.write_csv(out, ("position", "x", "y", "degrid"), fld.rows())


def cmd_degrid(args) -> dict:
    w, h = _grid(args)
    fld = metrics.degrid(build_map(args.curve, w, h), args.k, squared=args.squared)
    out = _require_out(args.out)
    _write_degrid(fld, out, args.format)
    return {"kind": fld.map_kind.value, "k": fld.k, "min": float(fld.values.min()),
            "max": float(fld.values.max()), "outputs": [str(out)]}


def _sweep_thresholds(args, fields) -> np.ndarray:
    if args.eps_min is None and args.eps_max is None:
        return metrics.default_thresholds(fields, args.eps_steps)
    if args.eps_min is None or args.eps_max is None:
        raise UsageError("--eps-min and --eps-max must be given together")
    if not 0 < args.eps_min <= args.eps_max:
        raise UsageError("--eps-min/--eps-max: need 0 < min <= max")
    if args.eps_steps == 1:
        return np.array([args.eps_max])
    return np.geomspace(args.eps_min, args.eps_max, args.eps_steps)


def preservation_rows(order: int, k: int, squared: bool, thresholds=None, steps: int = 64):
    fields = {kind: metrics.degrid(build_map(kind, 1 << order, 1 << order), k, squared)
              for kind in SQUARE_KINDS}
    if thresholds is None:
        thresholds = metrics.default_thresholds(fields.values(), steps)
    return fields, metrics.sweep_table(fields, thresholds)


def cmd_preserve(args) -> dict:
    order = args.order if args.order is not None else 3
    fields = {kind: metrics.degrid(build_map(kind, 1 << order, 1 << order), args.k, args.squared)
              for kind in SQUARE_KINDS}
    rows = metrics.sweep_table(fields, _sweep_thresholds(args, fields.values()))
    out = _require_out(args.out)
    sfcio.write_csv(out, ("epsilon", "hf_pct", "mf_pct", "zf_pct"), rows)
    full = {k.short.lower(): metrics.full_preservation_threshold(f) for k, f in fields.items()}
    return {"order": order, "k": args.k, "rows": len(rows), "full_threshold": full, "outputs": [str(out)]}


def cmd_dilation(args) -> dict:
    w, h = _grid(args)
    report = metrics.dilation(build_map(args.curve, w, h), args.mode, args.window)
    data = report.to_dict()
    outputs = []
    if args.out:
        sfcio.write_json(args.out, data)
        outputs.append(args.out)
    return {**data, "outputs": outputs}


def cmd_scale_trace(args) -> dict:
    if args.pair_family:
        data = metrics.pair_family_trace(args.curve, args.n_min, args.n_max).to_dict()
    else:
        if args.t1 is None or args.t2 is None:
            raise UsageError("--t1 and --t2 are required unless --pair-family is set")
        data = metrics.scale_trace(args.curve, args.t1, args.t2, args.n_min, args.n_max).to_dict()
    outputs = []
    if args.out:
        sfcio.write_json(args.out, data)
        outputs.append(args.out)
    return {**data, "outputs": outputs}


def cmd_hierarchy(args) -> dict:
    if args.order is None:
        raise UsageError("--order is required")
    count = metrics.hierarchy_check(args.curve, args.order)
    data = {"kind": args.curve.value, "n": args.order, "violations": count}
    outputs = []
    if args.out:
        sfcio.write_json(args.out, data)
        outputs.append(args.out)
    return {**data, "outputs": outputs}


def write_toyset(outdir: Path, shapes=None) -> list[str]:
    wanted = set(shapes) if shapes else {s.value for s in toyset.Shape}
    written = []
    for spec in toyset.dataset():
        if spec.shape.value not in wanted:
            continue
        path = outdir / spec.filename
        sfcio.write_pgm(path, sfcio.image_levels(toyset.generate_shape(spec)), binary=True)
        written.append(str(path))
    return written


def cmd_toyset(args) -> dict:
    outdir = _require_out(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    written = write_toyset(outdir, args.shapes)
    return {"images": len(written), "outputs": written}


def cmd_dtw(args) -> dict:
    a = sfcio.read_sequence(args.a)
    b = sfcio.read_sequence(args.b)
    cost = toyset.dtw(a, b, args.normalize)
    data = {"len_a": int(a.size), "len_b": int(b.size), "normalize": args.normalize, "cost": cost}
    outputs = []
    if args.out:
        sfcio.write_json(args.out, data)
        outputs.append(args.out)
    return {**data, "outputs": outputs}


def _dtw_table_csv(out: Path, curves, shapes, normalize) -> dict:
    results = toyset.dtw_table(curves, shapes or tuple(toyset.Shape), normalize=normalize)
    header, rows = toyset.table_rows(results)
    sfcio.write_csv(out, header, rows)
    return {"cells": len(results), "outputs": [str(out)]}


def cmd_dtw_table(args) -> dict:
    curves = args.curve or list(SQUARE_KINDS)
    if any(c is CurveKind.GENERALIZED_HILBERT for c in curves):
        curves = [CurveKind.HILBERT if c is CurveKind.GENERALIZED_HILBERT else c for c in curves]
    out = _require_out(args.out)
    return _dtw_table_csv(out, curves, args.shapes, args.normalize)


def run_report(root: Path, k: int = 2, normalize: str = "none", date: str | None = None) -> Path:
    """Write the full reproduction bundle into ``root/report-YYYYMMDD``."""
    stamp = date or _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%d")
    outdir = root / f"report-{stamp}"
    outdir.mkdir(parents=True, exist_ok=True)

    fields, rows = preservation_rows(3, k, squared=False)
    sfcio.write_csv(outdir / "table1_preservation.csv", ("epsilon", "hf_pct", "mf_pct", "zf_pct"), rows)
    for kind, fld in fields.items():
        tag = kind.short.lower()
        _write_degrid(fld, outdir / f"degrid_{tag}.csv", "csv")
        _write_degrid(fld, outdir / f"degrid_{tag}.pgm", "pgm")

    ladder = []
    for kind in SQUARE_KINDS:
        for n in range(2, 7):
            mode = "all_pairs" if n <= metrics.ALL_PAIRS_MAX_ORDER else "adjacent_only"
            ladder.append(metrics.dilation(build_map(kind, 1 << n, 1 << n), mode).to_dict())
    sfcio.write_json(outdir / "table2_dilation.json", ladder)

    end = Fraction(4**10 - 1, 4**10)
    traces = {
        "pairs": [metrics.scale_trace(kind, Fraction(0), end, 1, 10).to_dict() for kind in SQUARE_KINDS],
        "pair_family": [metrics.pair_family_trace(kind, 1, 10).to_dict() for kind in SQUARE_KINDS],
    }
    sfcio.write_json(outdir / "fig2_scale_traces.json", traces)

    hierarchy = [
        {"kind": kind.value, "n": n, "violations": metrics.hierarchy_check(kind, n)}
        for kind in SQUARE_KINDS
        for n in range(1, 8)
    ]
    sfcio.write_json(outdir / "hierarchy.json", hierarchy)

    _dtw_table_csv(outdir / "table3_dtw.csv", list(SQUARE_KINDS), None, normalize)
    write_toyset(outdir / "toyset")

    manifest = {}
    for path in sorted(p for p in outdir.rglob("*") if p.is_file() and p.name != "manifest.json"):
        manifest[path.relative_to(outdir).as_posix()] = hashlib.sha256(path.read_bytes()).hexdigest()
    sfcio.write_json(outdir / "manifest.json", manifest)
    return outdir


def cmd_report(args) -> dict:
    root = _require_out(args.out)
    outdir = run_report(root, args.k, args.normalize)
    return {"outdir": str(outdir), "files": sum(1 for p in outdir.rglob("*") if p.is_file())}


# -- parser ---------------------------------------------------------------

COMMANDS: dict[str, Callable] = {
    "map": cmd_map,
    "flatten": cmd_flatten,
    "fold": cmd_fold,
    "patch-order": cmd_patch_order,
    "degrid": cmd_degrid,
    "preserve": cmd_preserve,
    "dilation": cmd_dilation,
    "scale-trace": cmd_scale_trace,
    "hierarchy": cmd_hierarchy,
    "toyset": cmd_toyset,
    "dtw": cmd_dtw,
    "dtw-table": cmd_dtw_table,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="sfc",
        description="Space-filling-curve flattening and locality analysis.",
        formatter_class=fmt,
    )
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(COMMANDS) + "}")
    sub.required = True

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, description=help_text, formatter_class=fmt)

    p = add("map", "export a curve map as d,x,y")
    _add_grid(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    p.add_argument("--out", default=None, help="output file")

    p = add("flatten", "flatten a PGM image along a curve into a d,value CSV")
    _add_grid(p)
    p.add_argument("--in", dest="input", required=True, help="input PGM (P2 or P5)")
    p.add_argument("--out", default=None, help="output CSV")

    p = add("fold", "fold a d,value CSV back onto the grid")
    _add_grid(p)
    p.add_argument("--in", dest="input", required=True, help="input d,value CSV")
    p.add_argument("--format", choices=("pgm", "csv"), default="pgm", help="output format")
    p.add_argument("--out", default=None, help="output file")

    p = add("patch-order", "generalized Hilbert token order for a patch grid")
    p.add_argument("--width", type=_positive_int, required=True, help="patch columns")
    p.add_argument("--height", type=_positive_int, required=True, help="patch rows")
    p.add_argument("--out", default=None, help="output CSV (slot,raster_index)")

    p = add("degrid", "per-position DeGrid values")
    _add_grid(p)
    p.add_argument("--k", type=int, default=2, help="neighbourhood radius in sequence steps")
    p.add_argument("--squared", action="store_true", help="sum squared distances")
    p.add_argument("--format", choices=("csv", "pgm"), default="csv", help="output format")
    p.add_argument("--out", default=None, help="output file")

    p = add("preserve", "grid-structure preservation sweep for HF, MF and ZF")
    p.add_argument("--order", type=int, default=3, help="side exponent of the square grid")
    p.add_argument("--k", type=int, default=2, help="neighbourhood radius in sequence steps")
    p.add_argument("--eps-min", type=float, default=None, help="smallest threshold (default: data-driven)")
    p.add_argument("--eps-max", type=float, default=None, help="largest threshold (default: data-driven)")
    p.add_argument("--eps-steps", type=_positive_int, default=metrics.DEFAULT_SWEEP_STEPS,
                   help="number of log-spaced thresholds")
    p.add_argument("--squared", action="store_true", help="sum squared distances")
    p.add_argument("--out", default=None, help="output CSV")

    p = add("dilation", "empirical square-to-linear dilation")
    _add_grid(p)
    p.add_argument("--mode", choices=("all-pairs", "adjacent"), default="all-pairs",
                   help="scan every pair or only pairs within --window steps")
    p.add_argument("--window", type=_positive_int, default=metrics.DEFAULT_WINDOW,
                   help="largest index gap scanned in adjacent mode")
    p.add_argument("--out", default=None, help="optional JSON output")

    p = add("scale-trace", "folded distance of a parameter pair across orders")
    p.add_argument("--curve", type=_curve, default=CurveKind.HILBERT, help="hilbert, morton or zigzag")
    p.add_argument("--t1", type=_fraction, default=None, help="first parameter P/Q")
    p.add_argument("--t2", type=_fraction, default=None, help="second parameter P/Q")
    p.add_argument("--n-min", type=int, default=1, help="first order")
    p.add_argument("--n-max", type=int, default=10, help="last order")
    p.add_argument("--pair-family", action="store_true",
                   help="trace the row-end pair (2^n-1)/4^n, 2^n/4^n instead of a fixed pair")
    p.add_argument("--out", default=None, help="optional JSON output")

    p = add("hierarchy", "count cells whose index does not nest across orders n and n+1")
    p.add_argument("--curve", type=_curve, default=CurveKind.HILBERT, help="hilbert, morton or zigzag")
    p.add_argument("--order", type=int, default=None, help="coarse order n")
    p.add_argument("--out", default=None, help="optional JSON output")

    p = add("toyset", "write the 18 toy shape images as P5 PGM")
    p.add_argument("--shapes", type=_shapes, default=None, help="comma list (default: all)")
    p.add_argument("--out", default=None, help="output directory")

    p = add("dtw", "DTW distance between two d,value CSV sequences")
    p.add_argument("--a", required=True, help="first sequence CSV")
    p.add_argument("--b", required=True, help="second sequence CSV")
    p.add_argument("--normalize", choices=("none", "path"), default="none", help="cost normalization")
    p.add_argument("--out", default=None, help="optional JSON output")

    p = add("dtw-table", "DTW table over the toy dataset")
    p.add_argument("--curve", type=_curve, action="append", default=None,
                   help="curve to include; repeat for several (default: hilbert, morton, zigzag)")
    p.add_argument("--shapes", type=_shapes, default=None, help="comma list (default: all)")
    p.add_argument("--normalize", choices=("none", "path"), default="none", help="cost normalization")
    p.add_argument("--out", default=None, help="output CSV")

    p = add("report", "run the whole reproduction pipeline into a dated directory")
    p.add_argument("--k", type=int, default=2, help="DeGrid neighbourhood radius")
    p.add_argument("--normalize", choices=("none", "path"), default="none", help="DTW normalization")
    p.add_argument("--out", default=None, help="root directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    handler = COMMANDS[args.command]
    try:
        summary = handler(args)
    except UsageError as exc:
        print(f"sfc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ConfigurationError as exc:
        print(f"sfc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (SFCError, OSError, ValueError) as exc:
        print(f"sfc {args.command}: error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"command": args.command, "status": "ok", **summary}, allow_nan=False))
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
