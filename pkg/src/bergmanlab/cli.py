"""Command-line batch driver: ``bergmanlab run --config exp.json``."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import EXPERIMENTS, load_config
from .exceptions import ConfigError
from .experiments import run_experiment
from .reports import write_summary

__all__ = ["main", "run", "EXIT_OK", "EXIT_TOLERANCE", "EXIT_CONFIG"]

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG = 0, 1, 2

logger = logging.getLogger("bergmanlab")


def run(config, out=None, parallel=False):
    """Run every experiment of ``config`` and write its reports.

    Returns the records in config order.  Files are written by this process
    only, after all experiments finished, so ``--parallel`` output is
    identical to the sequential one.
    """
    out = Path(out or config.out or "results")
    specs = list(config.experiments)
    if parallel and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=len(specs)) as pool:
            results = list(pool.map(run_experiment, specs))
    else:
        results = [run_experiment(s) for s in specs]
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for record, files in results:
        for name, text in files.items():
            (out / name).write_text(text)
        records.append(record)
    write_summary(out / "summary.json", records, config.raw)
    return records


def _tag(record):
    label = record.inputs.get("label")
    return f"{record.experiment}[{label}]" if label else record.experiment


def _parser():
    p = argparse.ArgumentParser(prog="bergmanlab", description="Bergman kernel level-sweep experiments")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiments of a config file")
    r.add_argument("--config", help="JSON experiment config")
    r.add_argument("--out", help="output directory (overrides the config)")
    r.add_argument("--only", metavar="NAME", help="run only this experiment")
    r.add_argument("--parallel", action="store_true", help="run experiments concurrently")
    r.add_argument("--list", action="store_true", help="print experiment names and exit")
    r.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.list:
            names = load_config(args.config).names() if args.config else list(EXPERIMENTS)
            print("\n".join(names))
            return EXIT_OK
        if not args.config:
            print("bergmanlab run: --config is required", file=sys.stderr)
            return EXIT_CONFIG
        config = load_config(args.config)
        if args.only:
            config = config.only(args.only)
        records = run(config, args.out, args.parallel)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    failed = [r for r in records if not r.passed]
    for r in records:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {_tag(r)} ({r.wall_time:.2f}s)")
    for r in failed:
        for m in r.failing():
            target = f" target {m.target}" if m.target is not None else ""
            print(f"  {_tag(r)}.{m.name} = {m.value:.6g} ({m.kind} {m.tolerance:g}{target})", file=sys.stderr)
    return EXIT_TOLERANCE if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
