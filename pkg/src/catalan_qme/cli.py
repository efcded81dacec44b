"""Command-line front end.

Subcommands ``table1``, ``solve``, ``boundary`` and ``verify``.  Every run
that writes files also writes ``manifest.json`` next to them.  Exit codes:
0 success, 1 verification failure, 2 usage error, 3 I/O error,
4 numerical non-convergence.
"""

import argparse
import csv
import json
import os
import re
import sys

import numpy as np

from . import __version__
from . import opcalc, qme, seqalg, suites
from .errors import ConvergenceError, DomainError, StrategyError
from .matrix_io import read_matrix, write_matrix

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO, EXIT_NONCONVERGED = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _fmt(x):
    return f"{x:.17g}"


def _write_text(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_manifest(out_dir, args, inputs, outputs, seed=None):
    flags = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {
        "command": args.command,
        "flags": flags,
        "inputs": inputs,
        "outputs": outputs,
        "seed": seed,
        "version": __version__,
    }
    path = os.path.join(out_dir, "manifest.json")
    _write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _out_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _precision(text):
    try:
        return qme.parse_precision(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def table_method_config(name, precision, form="paper"):
    """``newton``, ``catalan4`` (the tabulated variant) or ``catalan:<k>``."""
    if name == "newton":
        return qme.SolverConfig(method=qme.NEWTON, form=form, precision=precision)
    if name == "catalan4":
        return qme.SolverConfig(method=qme.CATALAN, k=2, assembly="paper", form=form, precision=precision)
    return qme.SolverConfig(method=qme.CATALAN, k=_catalan_k(name), form=form, precision=precision)


def _catalan_k(name):
    m = re.fullmatch(r"catalan:(-?\d+)", name)
    if not m:
        raise UsageError(f"unknown method {name!r}")
    k = int(m.group(1))
    if k < 1:
        raise UsageError("catalan:<k> needs k >= 1")
    return k


def cmd_table1(args):
    if args.n < 10:
        raise UsageError("--n must be >= 10")
    precision = _precision(args.precision)
    methods = [m for m in args.methods.split(",") if m]
    cfgs = [table_method_config(m, precision, args.form) for m in methods]
    out = _out_dir(args.out)
    T = qme.qbd_example(args.n)
    outputs, traces = [], []
    for name, cfg in zip(methods, cfgs):
        tr = qme.solve_qme(T, cfg=cfg)
        traces.append(tr)
        path = os.path.join(out, f"table1_{name.replace(':', '')}.json")
        _write_text(path, tr.to_json(timing=not args.no_timing) + "\n")
        outputs.append(path)
    rows = []
    for k in range(max(len(t.steps) for t in traces)):
        rows.append([k + 1] + [_fmt(t.steps[k].res) if k < len(t.steps) else "" for t in traces])
    path = os.path.join(out, "table1.csv")
    _write_csv(path, ["k"] + [f"{m.replace(':', '')}_res" for m in methods], rows)
    outputs.append(path)
    write_manifest(out, args, [], outputs)
    for row in rows:
        print(",".join(str(x) for x in row))
    return EXIT_OK if all(t.converged for t in traces) else EXIT_NONCONVERGED


def cmd_solve(args):
    try:
        T = read_matrix(args.matrix)
        Y0 = read_matrix(args.y0) if args.y0 else None
    except ValueError as exc:
        raise OSError(f"cannot parse matrix: {exc}") from exc
    out = _out_dir(args.out)
    sol_path = os.path.join(out, "solution.txt")
    trace_path = os.path.join(out, "trace.json")
    inputs = [args.matrix] + ([args.y0] if args.y0 else [])
    if args.method in ("series", "quadrature"):
        tol = args.tol if args.tol is not None else (1e-15 if args.method == "series" else 1e-12)
        if args.method == "series":
            Y = opcalc.catalan_of_matrix_series(T, tol)
        else:
            Y = opcalc.catalan_of_matrix_quadrature(T, tol)
        res = opcalc.quadratic_residual(T, Y)
        doc = {"method": args.method, "form": None, "precision": "double", "steps": [],
               "converged": True, "n": T.shape[0], "residual": qme._Sci(res)}
        code = EXIT_OK
    else:
        if args.method == "newton":
            cfg_kw = dict(method=qme.NEWTON)
        else:
            cfg_kw = dict(method=qme.CATALAN, k=_catalan_k(args.method), assembly=args.assembly)
        cfg = qme.SolverConfig(form=args.form, res_tol=args.tol, max_iters=args.max_iters,
                               precision=_precision(args.precision), **cfg_kw)
        tr = qme.solve_qme(T, Y0, cfg)
        Y = tr.Y
        doc = tr.to_dict(timing=not args.no_timing)
        if tr.failure:
            doc["failure"] = tr.failure
        code = EXIT_OK if tr.converged else EXIT_NONCONVERGED
    write_matrix(sol_path, Y)
    _write_text(trace_path, qme.dumps_sci(doc) + "\n")
    write_manifest(out, args, inputs, [sol_path, trace_path])
    if code == EXIT_NONCONVERGED:
        print("iteration did not converge", file=sys.stderr)
    return code


def cmd_boundary(args):
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    curves = [c for c in args.curves.split(",") if c]
    if not curves or any(c not in ("sigma", "omega") for c in curves):
        raise UsageError("--curves takes a comma list of sigma, omega")
    out = _out_dir(args.out)
    rows = seqalg.boundary_rows(args.samples, curves)
    path = os.path.join(out, "boundary.csv")
    _write_csv(path, ["theta", "re", "im", "curve"],
               [[_fmt(t), _fmt(re_), _fmt(im), label] for t, re_, im, label in rows])
    write_manifest(out, args, [], [path])
    return EXIT_OK


def cmd_verify(args):
    names = suites.SUITES if args.suite == "all" else (args.suite,)
    lines, failed = [], 0
    for name in names:
        for r in suites.run_suite(name, args.seed):
            lines.append(f"{'PASS' if r.passed else 'FAIL'} [{name}] {r.name}: {r.detail}")
            failed += not r.passed
    lines.append(f"{len(lines) - failed} passed, {failed} failed")
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if args.out:
        out = _out_dir(args.out)
        path = os.path.join(out, "verify_report.txt")
        _write_text(path, report)
        write_manifest(out, args, [], [path], seed=args.seed)
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def build_parser():
    p = argparse.ArgumentParser(prog="catalan-qme",
                                description="Catalan-series solvers for T Y^2 - Y + I = 0.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table1", help="residual history of Newton and Catalan4 on the diagonal QBD matrix")
    t.add_argument("--n", type=int, default=100)
    t.add_argument("--precision", default="double", help="double | extended:<digits>")
    t.add_argument("--methods", default="newton,catalan4", help="comma list of newton, catalan4, catalan:<k>")
    t.add_argument("--form", choices=("paper", "derived"), default="paper")
    t.add_argument("--out", default=".")
    t.add_argument("--no-timing", action="store_true", help="omit wall times so outputs are reproducible")
    t.set_defaults(func=cmd_table1)

    s = sub.add_parser("solve", help="solve for a matrix read from a file")
    s.add_argument("--matrix", required=True)
    s.add_argument("--y0", help="starting matrix (default: T)")
    s.add_argument("--method", default="newton", help="newton | catalan:<k> | series | quadrature")
    s.add_argument("--form", choices=("paper", "derived", "literal"), default="paper")
    s.add_argument("--assembly", choices=("sum", "paper"), default="sum")
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iters", type=int, default=50)
    s.add_argument("--precision", default="double")
    s.add_argument("--out", default=".")
    s.add_argument("--no-timing", action="store_true")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("boundary", help="boundary curves of sigma(c) and Omega as CSV")
    b.add_argument("--samples", type=int, default=2048)
    b.add_argument("--curves", default="sigma,omega")
    b.add_argument("--out", default=".")
    b.set_defaults(func=cmd_boundary)

    v = sub.add_parser("verify", help="run the property suites")
    v.add_argument("--suite", choices=("all",) + suites.SUITES, default="all")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, StrategyError) as exc:
        parser.error(str(exc))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
