"""Command-line entry point.

Exit codes: 0 success, 1 a verification check failed, 2 invalid parameters,
3 solver failure, 4 output could not be written.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from . import elliptic, lame, sl, spectrum, verify
from .geometry import TorusParams, coprime_pairs

EXIT_OK, EXIT_FAILED, EXIT_PARAMS, EXIT_SOLVER, EXIT_WRITE = 0, 1, 2, 3, 4


class ParamError(ValueError):
    pass


def grid_from_env() -> int:
    raw = os.environ.get("SPECTRA_GRID_N")
    if raw is None:
        return spectrum.DEFAULT_GRID
    try:
        n = int(raw)
    except ValueError:
        raise ParamError(f"SPECTRA_GRID_N must be an integer, got {raw!r}") from None
    if n < 64 or n & (n - 1):
        raise ParamError(f"SPECTRA_GRID_N must be a power of two >= 64, got {n}")
    return n


def _fmt(value, precision: int):
    if isinstance(value, float):
        if math.isnan(value):
            return None
        return float(f"{value:.{precision}g}")
    if isinstance(value, dict):
        return {k: _fmt(v, precision) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_fmt(v, precision) for v in value]
    return value


def _render(rows: list[dict], fmt: str, precision: int, document: dict | None = None) -> str:
    if fmt == "json":
        payload = document if document is not None else {"rows": rows}
        return json.dumps(_fmt(payload, precision), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if not rows:
        return ""
    cols = list(rows[0])
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([f"{v:.{precision}g}" if isinstance(v, float) else v for v in (r[c] for c in cols)])
        return buf.getvalue()
    cells = [[f"{v:.{precision}g}" if isinstance(v, float) else str(v) for v in (r[c] for c in cols)] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _emit(text: str, out_path: str | None) -> int:
    if out_path is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        print(f"error: cannot write {out_path}: {exc}", file=sys.stderr)
        return EXIT_WRITE
    return EXIT_OK


def _params(args) -> TorusParams:
    try:
        return TorusParams(args.m, args.n)
    except (ValueError, TypeError) as exc:
        raise ParamError(str(exc)) from None


def spectrum_rows(params: TorusParams, l_max: int, grid: int) -> list[dict]:
    rows = []
    for l in range(l_max + 1):
        admitted = spectrum.admitted_flavors(params, l)
        modes = spectrum.merged_spectrum(params, l, 4, None, grid)[:6]
        for i, md in enumerate(modes):
            rows.append({"l": l, "i": i, "lambda": md.value, "zeros": md.zeros,
                         "flavor": md.flavor, "admitted": md.flavor in admitted})
    return rows


def cmd_spectrum(args) -> int:
    params = _params(args)
    if not 0 <= args.l_max <= 64:
        raise ParamError("--l-max must lie in [0, 64]")
    rows = spectrum_rows(params, args.l_max, args.grid)
    doc = {"params": {"m": params.m, "n": params.n, "parity": params.parity, "index": params.index},
           "checks": [], "spectra": rows, "functionals": {}}
    return _emit(_render(rows, args.format, args.precision, doc), args.out)


def cmd_verify(args) -> int:
    params = _params(args)
    rep = verify.full_report(params, args.tol, args.grid)
    fv = elliptic.functional_value(params)
    doc = rep.to_dict()
    doc = {"params": doc["params"], "checks": doc["checks"], "spectra": [],
           "functionals": _functional_row(fv), "overall": doc["overall"]}
    rows = [{"claim": c.claim, "status": c.status, "margin": c.margin, "tolerance": c.tolerance,
             "detail": c.detail} for c in rep.checks]
    code = _emit(_render(rows, args.format, args.precision, doc), args.out)
    if code:
        return code
    solver_failed = any(c.status == verify.FAIL and c.detail.startswith("solver:") for c in rep.checks)
    if solver_failed:
        return EXIT_SOLVER
    return EXIT_OK if rep.overall else EXIT_FAILED


def _functional_row(fv: elliptic.FunctionalReport) -> dict:
    p = fv.params
    return {"m": p.m, "n": p.n, "parity": "odd" if p.odd else "even", "index": fv.index,
            "k": fv.k, "K": fv.K, "E": fv.E, "area": fv.area,
            "Lambda_closed": fv.lambda_closed, "Lambda_numeric": fv.lambda_numeric,
            "nonmax_margin": fv.nonmax_margin}


def cmd_table(args) -> int:
    if not 2 <= args.sum_max <= 20:
        raise ParamError("--sum-max must lie in [2, 20]")
    rows = [_functional_row(elliptic.functional_value(p)) for p in coprime_pairs(args.sum_max)]
    doc = {"params": {"sum_max": args.sum_max}, "checks": [], "spectra": [], "functionals": rows}
    return _emit(_render(rows, args.format, args.precision, doc), args.out)


def cmd_lame(args) -> int:
    if not 0.0 <= args.k < 1.0:
        raise ParamError(f"--k must satisfy 0 <= k < 1, got {args.k}")
    if not 4 <= args.levels <= 12:
        raise ParamError("--levels must lie in [4, 12]")
    levels = lame.lame_spectrum(args.k, args.levels, args.grid)
    h3, _ = lame.h3_value(args.k, args.grid)
    rows = [{"i": i, "h": lv.h, "flavor": lv.flavor, "parity": lv.parity} for i, lv in enumerate(levels)]
    doc = {"params": {"k": args.k}, "checks": [], "spectra": rows,
           "functionals": {"h3": h3, "h3_margin": h3 - 2.0}}
    text = _render(rows, args.format, args.precision, doc)
    if args.format == "text":
        text += f"h3 = {h3:.{args.precision}g}   h3 - 2 = {h3 - 2.0:.{args.precision}g}\n"
    return _emit(text, args.out)


def _precision(value: str) -> int:
    p = int(value)
    if not 4 <= p <= 17:
        raise argparse.ArgumentTypeError("precision must lie in [4, 17]")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torispec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_format="text"):
        p.add_argument("--format", choices=["json", "csv", "text"], default=default_format)
        p.add_argument("--out", default=None, help="write to this file instead of stdout")
        p.add_argument("--precision", type=_precision, default=12, help="significant digits (4-17)")
        p.add_argument("--grid", type=int, default=None, help="base grid size (default: SPECTRA_GRID_N or 1024)")

    p = sub.add_parser("spectrum", help="per-l extrapolated eigenvalues of the separated problems")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l-max", type=int, default=4)
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="run the eigenvalue-count and non-maximality checks")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", help="closed-form functional values over the family")
    p.add_argument("--sum-max", type=int, default=12)
    common(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("lame", help="low spectrum of the nu = 1 Lame equation")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--levels", type=int, default=6)
    common(p)
    p.set_defaults(func=cmd_lame)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARAMS if exc.code else EXIT_OK
    try:
        if args.grid is None:
            args.grid = grid_from_env()
        elif args.grid < 64 or args.grid & (args.grid - 1):
            raise ParamError("--grid must be a power of two >= 64")
        if getattr(args, "tol", None) is not None and not (1e-10 <= args.tol <= 1e-4):
            raise ParamError("--tol must lie in [1e-10, 1e-4]")
        return args.func(args)
    except ParamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except (sl.SolverError, sl.FloquetError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
