"""``solve`` command line entry point."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import StageError, load_config, run_experiment


def build_parser():
    ap = argparse.ArgumentParser(prog="mortar-bddc", description="Mortar/BDDC experiment runner")
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="run one experiment config")
    s.add_argument("--config", required=True, help="experiment JSON file")
    s.add_argument("--scaling", choices=["m1", "m2"], help="override the config's scaling")
    s.add_argument("--theta", type=float, help="explicit threshold (>= 1) instead of the log rule")
    s.add_argument("--oracle", action="store_true", help="also compute the dense spectrum of M^-1 S")
    s.add_argument("--out", help="output directory for report.csv, edges.csv, report.json")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.theta is not None and args.theta < 1:
            raise StageError("config", "--theta must be >= 1")
        cfg = load_config(args.config)
        res = run_experiment(cfg, oracle=args.oracle or cfg.oracle, scaling=args.scaling, theta=args.theta)
        out = args.out or cfg.out
        if out:
            res.write(Path(out))
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(res.csv_text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
