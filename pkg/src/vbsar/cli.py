"""Command-line driver.

Subcommands:
  simulate   synthesize the scene and write clean/noisy image grids
  invert     simulate plus run the configured estimators over all rows
  report     print the ledger and summary of a finished run directory

Exit codes: 0 success, 1 partial row failures, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import ConfigError, default_config, load_config
from .pipeline import parse_row_range, read_ledger_csv, run_pipeline


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vbsar",
        description="Radar-image simulation and radial-velocity inversion batch driver.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("--config", help="configuration file (defaults used if omitted)")
        p.add_argument("--out", help="output directory (overrides run.output_dir)")
        p.add_argument("--seed", type=int, help="master seed override")

    sim = sub.add_parser("simulate", help="write scene and image grids only")
    add_run_flags(sim)

    inv = sub.add_parser("invert", help="run estimators over the scene rows")
    add_run_flags(inv)
    inv.add_argument("--solvers", help="comma list from nl,fm,dfm,ati")
    inv.add_argument("--rows", help="inclusive row range a..b or single index")
    inv.add_argument("--parallel", type=int, help="worker pool size override")

    rep = sub.add_parser("report", help="print ledgers from a run directory")
    rep.add_argument("--out", required=True, help="run directory to read")
    return parser


def _load(args) -> "Config":
    cfg = load_config(args.config) if args.config else default_config()
    run = cfg.run
    if args.seed is not None:
        run = replace(run, seed=args.seed)
    if getattr(args, "parallel", None) is not None:
        run = replace(run, parallelism=args.parallel)
    if getattr(args, "solvers", None):
        run = replace(run, solvers=args.solvers)
    if args.out:
        run = replace(run, output_dir=args.out)
    cfg = replace(cfg, run=run)
    # re-validate so CLI overrides face the same checks as file values
    from .config import _validate
    _validate(cfg)
    return cfg


def _report(out_dir: str) -> int:
    from pathlib import Path
    base = Path(out_dir)
    ledger_path = base / "ledger.csv"
    summary_path = base / "summary.csv"
    if not summary_path.exists():
        print(f"no summary.csv under {base}", file=sys.stderr)
        return 2
    header, rows = read_ledger_csv(summary_path)
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
              for i in range(len(header))]
    for line in ([header] + rows):
        print("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)))
    if ledger_path.exists():
        _, records = read_ledger_csv(ledger_path)
        failures = [r for r in records if r[-1]]
        print(f"\nledger records: {len(records)}, failures: {len(failures)}")
        for r in failures[:20]:
            print(f"  row {r[0]} solver {r[1]}: {r[-1]}")
        return 1 if failures else 0
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report":
        return _report(args.out)
    try:
        cfg = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    rows = None
    if getattr(args, "rows", None):
        try:
            rows = parse_row_range(args.rows, cfg.geometry.grid_n)
        except ValueError as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return 2
    stage = "simulate" if args.command == "simulate" else "invert"
    result = run_pipeline(cfg, out_dir=args.out, rows=rows, stage=stage)
    if result.status == 0:
        print(f"completed, artifacts under {result.out_dir}")
    else:
        failures = [r for r in result.records if r.error]
        print(f"completed with {len(failures)} failed row-solver attempts; "
              f"see {result.out_dir / 'ledger.csv'}", file=sys.stderr)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
