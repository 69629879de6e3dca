#!/usr/bin/env python3
"""Run a built-in preset and print its invariant report."""

import argparse
from pathlib import Path

from aggeq.presets import PRESET_NAMES, preset_config
from aggeq.runner import resolve_output_dir, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("name", choices=PRESET_NAMES)
    ap.add_argument("--output-dir", default=None)
    args = ap.parse_args()
    outdir = args.output_dir or str(Path("runs") / args.name)
    report = run(preset_config(args.name, str(resolve_output_dir(outdir))))
    print(f"{args.name}: passed={report.passed} -> {report.output_dir}")
    for inv in report.report["invariants"]:
        print(f"  {inv['name']}: {inv['value']:.3e} (threshold {inv['threshold']:.0e}) "
              f"{'ok' if inv['passed'] else 'FAIL'}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
