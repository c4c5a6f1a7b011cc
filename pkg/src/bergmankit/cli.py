"""Command line entry point: ``bergmankit run`` and ``bergmankit list-scenarios``."""

from __future__ import annotations

import argparse
import sys

from .scenarios import SCENARIOS, THEOREMS, ConfigError, emit, load_config, plot_data, run


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bergmankit", description="Numerical experiments on weighted Bergman spaces of the unit ball.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario and write CSV, JSON and plot series")
    r.add_argument("--scenario", help="scenario name; overrides the config file")
    r.add_argument("--config", help="TOML config file")
    r.add_argument("--n", type=int, help="complex dimension")
    r.add_argument("--degree", type=int, help="truncation degree")
    r.add_argument("--seed", type=int, help="random seed")
    r.add_argument("--out", help="output directory")
    r.add_argument("--quiet", action="store_true", help="do not print the summary")
    sub.add_parser("list-scenarios", help="print scenario names and what they exercise")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-scenarios":
        width = max(map(len, SCENARIOS))
        for s in SCENARIOS:
            print(f"{s:<{width}}  {THEOREMS[s]}")
        return 0
    try:
        cfg = load_config(args.config, scenario=args.scenario, n=args.n, degree=args.degree, seed=args.seed, out=args.out)
    except (ConfigError, OSError) as exc:
        print(f"bergmankit: {exc}", file=sys.stderr)
        return 2
    report = run(cfg)
    paths = [emit(report, "csv", cfg.out), emit(report, "json", cfg.out), *plot_data(report, cfg.out)]
    if not args.quiet:
        print(f"{report.scenario}: {report.theorem}")
        for k, v in report.summary.items():
            print(f"  {k}: {v}")
        print(f"  wall_clock: {report.wall_clock:.2f} s")
        for p in paths:
            print(f"  wrote {p}")
        print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
