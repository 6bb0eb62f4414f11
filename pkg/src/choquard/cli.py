"""Command-line front end: solve / limit / sweep / check / export."""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import ConfigError, validate_config
from .diagnostics import check_decay, check_diamagnetic, check_hls
from .io import (ParsedConfig, load_field, parse_config, report_to_dict,
                 sanitize_json, save_field, write_report, write_run, _atomic_write_bytes,
                 _atomic_write_json)
from .solver import SolverError, solve_limit, solve_penalized, sweep_epsilon

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2


def _load_parsed(args) -> ParsedConfig:
    doc = json.loads(Path(args.config).read_text())
    if args.grid is not None:
        doc.setdefault("grid", {})["M"] = args.grid
    if args.tol is not None:
        doc.setdefault("solver", {})["grad_tol"] = args.tol
    if args.seed is not None:
        doc.setdefault("solver", {})["seed"] = args.seed
    if getattr(args, "eps_list", None):
        doc.setdefault("sweep", {})["eps_list"] = [float(x) for x
                                                   in args.eps_list.split(",")]
    raw = json.dumps(doc, sort_keys=True, indent=1).encode()
    return parse_config(raw)


def _validated(parsed: ParsedConfig):
    report = validate_config(parsed.cfg, parsed.pot, parsed.grid)
    if not report.ok:
        for v in report.violations:
            print(f"config invalid: {v}", file=sys.stderr)
        raise ConfigError(report.violations[0])
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return report


def _cmd_solve(args) -> int:
    parsed = _load_parsed(args)
    _validated(parsed)
    started = datetime.now(timezone.utc)
    u, rep = solve_penalized(parsed.cfg, parsed.pot, parsed.grid, parsed.opts)
    out = Path(args.out)
    save_field(out / "u.f64", u, s=parsed.cfg.s, mu=parsed.cfg.mu, eps=parsed.cfg.eps)
    write_report(out / "report.json", rep)
    write_run(out, parsed, {"u.f64": None, "u.f64.meta.json": None,
                            "report.json": None}, started)
    print(json.dumps({"c_eps": rep.c_eps, "V_at_max": rep.V_at_max,
                      "valid_penalization": rep.valid_penalization,
                      "iterations": rep.iterations}))
    return EXIT_OK


def _cmd_limit(args) -> int:
    parsed = _load_parsed(args)
    _validated(parsed)
    started = datetime.now(timezone.utc)
    u, rep = solve_limit(parsed.cfg, parsed.grid, parsed.opts)
    out = Path(args.out)
    save_field(out / "u.f64", u, s=parsed.cfg.s, mu=parsed.cfg.mu, eps=1.0)
    write_report(out / "report.json", rep)
    write_run(out, parsed, {"u.f64": None, "u.f64.meta.json": None,
                            "report.json": None}, started)
    print(json.dumps({"c_V0": rep.c_eps, "decay_exponent": rep.decay_exponent,
                      "iterations": rep.iterations}))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    parsed = _load_parsed(args)
    _validated(parsed)
    if len(parsed.eps_list) < 2:
        print("config invalid: sweep.eps_list needs at least two values",
              file=sys.stderr)
        return EXIT_CONFIG
    started = datetime.now(timezone.utc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    artifacts: dict[str, None] = {}

    def on_solution(eps, field, rep):
        name = f"u_eps_{eps:g}.f64"
        save_field(out / name, field, s=parsed.cfg.s, mu=parsed.cfg.mu, eps=eps)
        artifacts[name] = None
        artifacts[name + ".meta.json"] = None

    reports = sweep_epsilon(parsed.cfg, parsed.pot, parsed.grid, parsed.eps_list,
                            parsed.opts, on_solution=on_solution)
    summary = {
        "eps_list": list(parsed.eps_list),
        "V_at_max": [r.V_at_max for r in reports],
        "c_eps": [r.c_eps for r in reports],
        "valid_penalization": [r.valid_penalization for r in reports],
        "reports": [report_to_dict(r) for r in reports],
    }
    _atomic_write_json(out / "sweep.json", sanitize_json(summary))
    artifacts["sweep.json"] = None
    write_run(out, parsed, artifacts, started)
    if not all(r.converged for r in reports):
        print("sweep finished with failed entries", file=sys.stderr)
        return EXIT_SOLVER
    print(json.dumps(sanitize_json({"V_at_max": summary["V_at_max"],
                                    "c_eps": summary["c_eps"]})))
    return EXIT_OK


def _cmd_check(args) -> int:
    u, meta = load_field(args.field)
    name = args.name
    if name == "diamagnetic":
        result = check_diamagnetic(u, None, float(meta["s"]), seed=args.seed or 0)
    elif name == "hls":
        if not args.config:
            print("check 'hls' requires --config for the growth exponent",
                  file=sys.stderr)
            return EXIT_CONFIG
        parsed = _load_parsed(args)
        result = check_hls(u, parsed.cfg)
    elif name == "decay":
        result = check_decay(u, float(meta["eps"]), u.argmax_index(),
                             float(meta["s"]))
    else:
        print(f"unknown check '{name}'", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(report_to_dict(result)))
    return EXIT_OK


def _cmd_export(args) -> int:
    u, meta = load_field(args.field)
    g = u.grid
    buf = _io.StringIO()
    writer = csv.writer(buf)
    idx = u.argmax_index()
    if args.mode == "axis":
        writer.writerow(["x", "abs_u"])
        sel = list(idx)
        for i in range(g.M):
            sel[0] = i
            writer.writerow([f"{-g.L + i * g.h:.17g}",
                             f"{abs(u.values[tuple(sel)]):.17g}"])
    else:
        writer.writerow(["r_mid", "mean_abs_u", "count"])
        mesh = g.mesh()
        x0 = g.index_to_point(idx)
        r = np.linalg.norm(mesh - x0, axis=-1).reshape(-1)
        a = np.abs(u.values).reshape(-1)
        edges = np.arange(0.0, r.max() + g.h, g.h)
        which = np.digitize(r, edges)
        for b in range(1, len(edges)):
            m = which == b
            if not m.any():
                continue
            writer.writerow([f"{(edges[b - 1] + edges[b]) / 2:.17g}",
                             f"{a[m].mean():.17g}", int(m.sum())])
    _atomic_write_bytes(Path(args.out), buf.getvalue().encode())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="choquard",
                                 description="fractional magnetic Choquard "
                                             "ground-state solver")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", required=True)
        if needs_out:
            p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--grid", type=int, default=None, help="override grid M")
        p.add_argument("--tol", type=float, default=None, help="override grad_tol")

    p = sub.add_parser("solve", help="one-eps penalized ground state")
    common(p)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("limit", help="limit problem ground state (reports c_V0)")
    common(p)
    p.set_defaults(fn=_cmd_limit)

    p = sub.add_parser("sweep", help="eps-sweep concentration experiment")
    common(p)
    p.add_argument("--eps-list", default=None, help="comma-separated eps values")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("check", help="run a named diagnostic on a stored field")
    p.add_argument("--field", required=True)
    p.add_argument("--name", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("export", help="export |u| to CSV")
    p.add_argument("--field", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("axis", "radial"), default="axis")
    p.set_defaults(fn=_cmd_export)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
