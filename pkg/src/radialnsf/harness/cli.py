"""Command line entry point.

Exit codes: 0 success, 1 config error, 2 I/O error, 3 identity-check failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..core import ValidationError
from .config import MMSConfig, load_config
from .mms import format_table, observed_orders, run_mms
from .output import check_identities, read_timeseries, write_outputs, write_rows
from .runner import run_simulation
from .sweep import run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_CHECK = 0, 1, 2, 3


def _load(args):
    cfg = load_config(args.config)
    updates = {}
    if getattr(args, "output_interval", None) is not None:
        updates["output_interval"] = args.output_interval
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    return cfg.with_updates(updates) if updates else cfg


def _out_dir(args, cfg) -> Path:
    return Path(args.out) if args.out else Path("out") / cfg.name


def cmd_run(args) -> int:
    cfg = _load(args)
    out = run_simulation(cfg)
    paths = write_outputs(out, _out_dir(args, cfg))
    print(f"{cfg.name}: {out.termination} at t={out.final_state.time:.6g} after {out.steps} steps "
          f"({out.rejected} rejected)")
    print(f"wrote {paths['timeseries']}")
    return EXIT_OK


def cmd_mms(args) -> int:
    cfg = _load(args)
    rows = run_mms(cfg.mms, cfg.physics, cfg.scheme)
    print(format_table(rows))
    orders = observed_orders(rows)
    table = [{"M": r.M, "dt": r.dt, "steps": r.steps, "error_v": r.error_v, "error_u": r.error_u,
              "error_theta": r.error_theta, "order": (orders[i - 1] if i else float("nan"))}
             for i, r in enumerate(rows)]
    d = _out_dir(args, cfg)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {d}: {exc}") from exc
    print(f"wrote {write_rows(table, d / 'mms.csv')}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    rows = run_sweep(cfg, workers=args.workers)
    d = _out_dir(args, cfg)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {d}: {exc}") from exc
    failed = sum(r["termination"] == "failed" for r in rows)
    print(f"{len(rows)} runs, {failed} failed; wrote {write_rows(rows, d / 'sweep.csv')}")
    return EXIT_OK


def cmd_check(args) -> int:
    ts = read_timeseries(args.timeseries)
    results = check_identities(ts, args.entropy_tol)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="radialnsf", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="YAML scenario file")
        p.add_argument("--out", help="output directory (default out/<name>)")
        p.add_argument("--output-interval", type=float, dest="output_interval")
        p.add_argument("--seed", type=int)

    p = sub.add_parser("run", help="run one scenario")
    common(p)
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("mms", help="manufactured-solution convergence table")
    common(p)
    p.set_defaults(func=cmd_mms)
    p = sub.add_parser("sweep", help="Cartesian parameter sweep")
    common(p)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("check", help="re-validate identities in a time-series file")
    p.add_argument("timeseries")
    p.add_argument("--entropy-tol", type=float, default=1e-3, dest="entropy_tol")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (KeyError, ValueError) as exc:
        if args.command == "check":
            print(f"I/O error: malformed time series: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
