"""Command-line front end: run one scenario or one temperature sweep."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .scenarios import (
    BUILTIN_SCENARIOS,
    SWEEP_PARAMS,
    SweepConfig,
    builtin_scenario,
    parse_config_file,
    run_scenario,
    run_sweep,
)


def _load_scenario(spec: str):
    if spec in BUILTIN_SCENARIOS:
        return builtin_scenario(spec)
    path = Path(spec)
    if path.exists():
        return parse_config_file(path)
    raise SystemExit(
        f"unknown scenario {spec!r}: not a builtin ({', '.join(BUILTIN_SCENARIOS)}) "
        "and no such config file"
    )


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        start, stop, n = text.split(":")
        return tuple(float(v) for v in np.linspace(float(start), float(stop), int(n)))
    except ValueError:
        raise SystemExit(f"bad grid {text!r}; expected start:stop:n, e.g. 0:0.5:6")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="h2qed",
        description="Open-system cavity-QED simulator for molecule formation dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario and write CSV/JSON output")
    sim.add_argument("--scenario", required=True, help="builtin name or config file path")
    sim.add_argument("--out", required=True, help="output directory")

    swp = sub.add_parser("sweep", help="re-run a scenario over a temperature-ratio grid")
    swp.add_argument("--scenario", required=True, help="builtin name or config file path")
    swp.add_argument("--param", required=True, choices=sorted(SWEEP_PARAMS))
    swp.add_argument("--grid", default="0:0.5:51", help="start:stop:n (default 0:0.5:51)")
    swp.add_argument("--report-at", type=int, default=20000)
    swp.add_argument("--out", required=True)
    swp.add_argument("--workers", type=int, default=1)

    lst = sub.add_parser("list", help="list builtin scenarios")

    args = parser.parse_args(argv)
    if args.command == "list":
        for name in BUILTIN_SCENARIOS:
            print(name)
        return 0
    if args.command == "simulate":
        config = _load_scenario(args.scenario)
        result = run_scenario(config, out_dir=args.out)
        final = result.final()
        print(f"{config.name}: basis size {result.basis_size}")
        for key in ("P_initial", "P_final", "P_A", "P_D"):
            print(f"  {key} = {final[key]:.6f}")
        for path in result.files:
            print(f"  wrote {path}")
        return 0
    if args.command == "sweep":
        base = _load_scenario(args.scenario)
        sweep = SweepConfig(base=base, param=args.param, grid=_parse_grid(args.grid),
                            report_at=args.report_at)
        result = run_sweep(sweep, out_dir=args.out, workers=args.workers)
        for mu, temp, p in result.rows:
            print(f"  mu={mu:.4f} T={temp:.6g} P_final={p:.6f}")
        for path in result.files:
            print(f"  wrote {path}")
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
