"""Batch command-line interface.

Commands
--------
run           evaluate the field described by a config file and export it
preset        run one of the named figure-reproduction presets
scan          sweep one whitelisted parameter, one metrics row per value
oracle-check  compare the closed-form propagators against brute-force
              quadrature on randomized configurations

``--threads`` (or the TLSIM_THREADS environment variable) sets the worker
count for grid evaluation; results are bit-identical for any value.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .coherence import density_profile, fringe_metrics
from .config import ConfigError, config_help, parse_config, parse_length
from .core import DomainError, centered_axis
from .fieldgrid import evaluate_grid, export_csv, export_meta, export_pgm
from .oracle import OracleConvergenceError, quadrature_oracle, random_oracle_case
from .presets import preset_names, run_preset
from .propagators import psi_behind, psi_hard_edge
from .scenario import SWEEPABLE_PARAMS, apply_sweep_value


def _read_config(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([(0, f"cannot read config {path}: {exc}")]) from exc
    return parse_config(text)


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def cmd_run(args) -> int:
    rc = _read_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    stem = _stem(args.config)
    field = evaluate_grid(rc.scenario, rc.grid, workers=args.threads)
    written = []
    if "csv" in rc.formats:
        p = os.path.join(args.out, f"{stem}.field.csv")
        export_csv(field, p)
        written.append(p)
    if "pgm" in rc.formats:
        p = os.path.join(args.out, f"{stem}.field.pgm")
        export_pgm(field, p, log_scale=args.log_scale or rc.log_scale)
        written.append(p)
    if "meta" in rc.formats:
        p = os.path.join(args.out, f"{stem}.meta.txt")
        export_meta(field, rc.scenario, p)
        written.append(p)
    print(f"{stem}: p_min={field.p_min:.6g} p_max={field.p_max:.6g}")
    for p in written:
        print(f"wrote {p}")
    return 0


def cmd_preset(args) -> int:
    written = run_preset(
        args.name,
        args.out,
        threads=args.threads,
        nx=args.nx,
        nz=args.nz,
        log_scale=args.log_scale,
    )
    for p in written:
        print(f"wrote {p}")
    return 0


def cmd_scan(args) -> int:
    rc = _read_config(args.config)
    param = args.param or rc.sweep_param
    if param is None:
        raise ConfigError([(0, "no sweep parameter: pass --param or set sweep.param")])
    if param not in SWEEPABLE_PARAMS:
        raise ConfigError(
            [(0, f"parameter {param!r} is not sweepable (use {', '.join(SWEEPABLE_PARAMS)})")]
        )
    if args.values is not None:
        values = [parse_length(v) for v in args.values.split(",") if v.strip()]
    else:
        values = list(rc.sweep_values or [])
    if not values:
        raise ConfigError([(0, "empty sweep value list: pass --values or set sweep.values")])

    scn = rc.scenario
    z_det = scn.z0 + scn.z_talbot
    lo, hi = scn.metrics_window()
    x = centered_axis(lo, hi, args.samples)

    os.makedirs(args.out, exist_ok=True)
    stem = _stem(args.config)
    out_path = os.path.join(args.out, f"{stem}.sweep.csv")
    rows = []
    print(f"{stem}: {param}  P_min  P_max  V   (z = {z_det:.6g} m)")
    for i, v in enumerate(values):
        scn_v = apply_sweep_value(scn, param, v)
        p = density_profile(scn_v, x, z_det)
        met = fringe_metrics(p)
        rows.append((v, met.p_min, met.p_max, met.visibility))
        print(f"{stem}: {v:.6g}  {met.p_min:.6g}  {met.p_max:.6g}  {met.visibility:.4f}")
        if args.fields:
            field = evaluate_grid(scn_v, rc.grid, workers=args.threads)
            fp = os.path.join(args.out, f"{stem}.{param}_{i}.field.pgm")
            export_pgm(field, fp)
            print(f"wrote {fp}")
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(f"{param},p_min,p_max,visibility\n")
        for row in rows:
            fh.write(",".join(f"{u:.17g}" for u in row) + "\n")
    print(f"wrote {out_path}")
    return 0


def cmd_oracle_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for i in range(args.cases):
        ctx, x, z, hard = random_oracle_case(rng, hard=(i % 3 == 2))
        ref = quadrature_oracle(ctx, x, z, aperture_model="comb" if hard else "fuzzy")
        val = psi_hard_edge(ctx, x, z) if hard else psi_behind(ctx, x, z)
        err = abs(val - ref) / abs(ref)
        worst = max(worst, err)
        kind = f"comb K={ctx.grating1.comb_k}" if hard else "fuzzy"
        print(f"case {i:3d} [{kind:>10}]: rel err = {err:.3e}")
    print(f"max relative error over {args.cases} cases: {worst:.3e}")
    if worst >= 1e-6:
        print("FAIL: exceeds 1e-6", file=sys.stderr)
        return 1
    print("OK: all cases within 1e-6")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tlsim",
        description="Two-grating matter-wave interference simulator.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=config_help(),
    )
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser(
        "run",
        help="evaluate a config-file field and export it",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=config_help(),
    )
    run.add_argument("--config", required=True, help="flat key=value config file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--threads", type=int, default=None, help="worker processes (default: TLSIM_THREADS or CPU count)")
    run.add_argument("--log-scale", action="store_true", help="log-scale PGM mapping")
    run.set_defaults(fn=cmd_run)

    pre = sub.add_parser("preset", help="run a named figure-reproduction preset")
    pre.add_argument("name", help="preset name; one of: " + ", ".join(preset_names()))
    pre.add_argument("--out", required=True, help="output directory")
    pre.add_argument("--threads", type=int, default=None)
    pre.add_argument("--nx", type=int, default=None, help="override grid x samples")
    pre.add_argument("--nz", type=int, default=None, help="override grid z samples")
    pre.add_argument("--log-scale", action="store_true")
    pre.set_defaults(fn=cmd_preset)

    scan = sub.add_parser("scan", help="sweep one parameter, one metrics row per value")
    scan.add_argument("--config", required=True)
    scan.add_argument("--out", required=True)
    scan.add_argument("--param", default=None, help="one of: " + ", ".join(SWEEPABLE_PARAMS))
    scan.add_argument("--values", default=None, help="comma-separated values (unit suffixes allowed)")
    scan.add_argument("--samples", type=int, default=1536, help="profile x samples")
    scan.add_argument("--fields", action="store_true", help="also export one field image per value")
    scan.add_argument("--threads", type=int, default=None)
    scan.set_defaults(fn=cmd_scan)

    oc = sub.add_parser(
        "oracle-check",
        help="closed forms vs brute-force quadrature on random configurations",
    )
    oc.add_argument("--cases", type=int, default=25)
    oc.add_argument("--seed", type=int, default=20260809)
    oc.set_defaults(fn=cmd_oracle_check)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (DomainError, OracleConvergenceError, IOError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
