"""Command line entry point: ``pfl run | plot | verify``.

Exit status is 0 on success, 1 when ``verify`` finds a failing check and 2
for configuration or usage errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .exceptions import PFLError
from .experiment import emit_plot, load_config, read_csv, run_scenario, write_csv
from .experiment.config import BUNDLED, MODES

log = logging.getLogger("pfl")


def _csv_list(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="pfl", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="sweep a scenario and write <name>.csv")
    run.add_argument("--config", required=True,
                     help="scenario JSON, or a bundled name: " + ", ".join(BUNDLED))
    run.add_argument("--out", default=".", help="output directory (default: .)")
    run.add_argument("--mode", choices=MODES)
    run.add_argument("--seed", type=int, help="master seed; overrides the config and PFL_SEED")
    run.add_argument("--n-samples", type=int)
    run.add_argument("--jobs", type=int, default=1, help="worker threads for sweep points")
    run.add_argument("--plot", metavar="METRICS", type=_csv_list,
                     help="also write <name>.svg for these comma-separated metrics")

    plot = sub.add_parser("plot", help="render a sweep CSV as SVG")
    plot.add_argument("--in", dest="inp", required=True)
    plot.add_argument("--metrics", required=True, type=_csv_list)
    plot.add_argument("--out", required=True)
    plot.add_argument("--variant", default="observable", choices=("observable", "counterfactual"))
    plot.add_argument("--source", default="auto", choices=("auto", "oracle", "mc"))

    verify = sub.add_parser("verify", help="run the invariant suite")
    verify.add_argument("--n-samples", type=int, default=1_000_000)
    verify.add_argument("--seed", type=int)
    verify.add_argument("--jobs", type=int, default=4)
    return parser


def cmd_run(args):
    cfg = load_config(args.config).with_overrides(mode=args.mode, seed=args.seed, n_samples=args.n_samples)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_scenario(cfg, n_jobs=max(1, args.jobs))
    path = write_csv(result, out / f"{cfg.name}.csv")
    print(path)
    if args.plot:
        print(emit_plot(result, args.plot, out / f"{cfg.name}.svg"))
    return 0


def cmd_plot(args):
    print(emit_plot(read_csv(args.inp), args.metrics, args.out, args.variant, args.source))
    return 0


def cmd_verify(args):
    from .verify import run_checks

    checks = run_checks(n_samples=args.n_samples, seed=args.seed, n_jobs=args.jobs)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}" + (f"  ({c.detail})" if c.detail else ""))
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": cmd_run, "plot": cmd_plot, "verify": cmd_verify}[args.command]
    try:
        return handler(args)
    except PFLError as exc:
        print(f"pfl: error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"pfl: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
