"""Command-line interface: kernel tables, Riesz transforms, decompositions, verification suites.

Exit codes: 0 success, 1 verification failure (report still written),
2 configuration or input error, 3 quadrature non-convergence.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .atoms import decompose
from .config import ConfigError, load_config
from .grid import GridFunction
from .kernels import kernel_table, table_to_csv
from .quadrature import ConvergenceError, lp_norm
from .transforms import K_MAX, output_grid, riesz_pv, riesz_spectral
from .verify import SUITES, DegenerateConfig, report_json, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_QUADRATURE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _floats(text):
    text = text.strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"not a comma-separated list of numbers: {text!r}") from exc


def _config(args):
    doc = None
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    cfg = load_config(doc)
    over = {}
    if getattr(args, "alpha", None):
        al = _floats(args.alpha)
        if not al or any(not a > 0 for a in al):
            raise ConfigError("--alpha needs positive values")
        over["alpha"] = tuple(al)
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be nonnegative")
        over["seed"] = args.seed
    if getattr(args, "out", None):
        over["out"] = args.out
    return replace(cfg, **over)


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _read_function(path):
    try:
        return GridFunction.from_text(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed function file {path}: {exc}") from exc


# -- commands ---------------------------------------------------------------------


def cmd_kernel(args):
    cfg = _config(args)
    xs, ys = _floats(args.x), _floats(args.y)
    rows = []
    for alpha in cfg.alpha:
        rows += kernel_table(args.which, alpha, xs, ys, t=args.t)
    out = Path(cfg.out) / f"kernel_{args.which}.csv"
    _write(out, table_to_csv(rows))
    print(f"{len(rows)} rows -> {out}")
    return EXIT_OK


def _rel_l2(grid, a, b):
    den = math.sqrt(float(grid.weights @ (b * b)))
    num = math.sqrt(float(grid.weights @ ((a - b) ** 2)))
    return num / den if den > 0 else num


def cmd_riesz(args):
    cfg = _config(args)
    f = _read_function(args.input)
    if getattr(args, "alpha", None) and not np.isclose(cfg.alpha[0], f.alpha):
        raise ConfigError(f"--alpha {cfg.alpha[0]} disagrees with the input's alpha {f.alpha}")
    tol = cfg.tolerances
    grid = output_grid(f, reach=args.reach, order=tol.pv_order)
    results = {}
    if args.method in ("pv", "both"):
        results["pv"] = riesz_pv(f, grid.nodes, order=tol.pv_order, step=tol.sweep_step, h_min=tol.pv_h_min,
                                 ratio=tol.pv_ratio)
    if args.method in ("spectral", "both"):
        results["spectral"] = riesz_spectral(f, K=args.K, x=grid.nodes)
    summary = {"alpha": f.alpha, "method": args.method, "K": args.K, "nodes": int(grid.nodes.size)}
    if len(results) == 2:
        summary["relative_l2_discrepancy"] = _rel_l2(grid, results["pv"], results["spectral"])
    out = Path(cfg.out)
    # Everything is computed before anything is written: no partial output on failure.
    for name, vals in results.items():
        _write(out / f"riesz_{name}.txt", GridFunction(grid, vals).to_text())
    _write(out / "riesz_summary.json", json.dumps(summary, sort_keys=True, indent=1) + "\n")
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_decompose(args):
    cfg = _config(args)
    f = _read_function(args.input)
    if not f.tail.compact:
        raise UsageError("decompose needs a compactly supported input")
    d = decompose(f, levels=args.levels)
    fine = f.grid.refined(2)
    l1 = lp_norm(f, 1)
    rec_err = float(fine.weights @ np.abs(d.synthesize(fine.nodes) - f(fine.nodes)))
    summary = {
        "alpha": f.alpha,
        "atoms": len(d.terms),
        "coefficient_sum": d.coefficient_sum,
        "l1": l1,
        "reconstruction_l1_error": rec_err,
    }
    if np.any(f.values):
        rgrid = output_grid(f, reach=6.0, grade=False)
        rl1 = float(rgrid.weights @ np.abs(riesz_spectral(f, K=K_MAX, x=rgrid.nodes)))
        summary["riesz_l1_spectral"] = rl1
        summary["norm_ratio"] = d.coefficient_sum / (l1 + rl1)
    out = Path(cfg.out)
    _write(out / "decomposition.json", d.to_json() + "\n")
    _write(out / "atom_profiles.csv", d.profiles_csv())
    _write(out / "decompose_summary.json", json.dumps(summary, sort_keys=True, indent=1) + "\n")
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_verify(args):
    cfg = _config(args)
    report = run_suite(args.suite, cfg)
    out = Path(cfg.out) / f"verify_{args.suite}.json"
    _write(out, report_json(report))
    print(f"{args.suite}: {report['verdict']} -> {out}")
    return EXIT_OK if report["verdict"] == "pass" else EXIT_FAIL


# -- parser -------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="laguerre-h1", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--alpha", help="comma-separated list of alpha values")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="random seed")

    k = sub.add_parser("kernel", help="tabulate T, T-tilde, R or R-tilde")
    common(k)
    k.add_argument("--which", required=True, choices=["T", "T-tilde", "R", "R-tilde"])
    k.add_argument("--t", type=float, help="time, heat kernels only")
    k.add_argument("--x", default="", help="comma-separated x values")
    k.add_argument("--y", default="", help="comma-separated y values")
    k.set_defaults(fn=cmd_kernel)

    v = sub.add_parser("verify", help="run a verification suite")
    common(v)
    v.add_argument("--suite", required=True, choices=sorted(SUITES))
    v.set_defaults(fn=cmd_verify)

    r = sub.add_parser("riesz", help="apply the Riesz transform to a function file")
    common(r)
    r.add_argument("--input", required=True, help="GridFunction text file")
    r.add_argument("--method", choices=["spectral", "pv", "both"], default="both",
                   help="both also reports the cross-method discrepancy")
    r.add_argument("--K", type=int, default=K_MAX, help="spectral truncation")
    r.add_argument("--reach", type=float, default=4.0, help="output grid extends this far past the support")
    r.set_defaults(fn=cmd_riesz)

    d = sub.add_parser("decompose", help="atomic decomposition of a function file")
    common(d)
    d.add_argument("--input", required=True, help="GridFunction text file, compactly supported")
    d.add_argument("--levels", type=int, default=5)
    d.set_defaults(fn=cmd_decompose)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except (ConfigError, UsageError, DegenerateConfig, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
