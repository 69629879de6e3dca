"""Command-line interface.

Subcommands: run, compare, contraction-test, presets. Exit code 0 means
every invariant check of the produced report passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .potentials import absolute_value, morse
from .presets import PRESET_NAMES, preset_config, preset_description
from .runner import compare, contraction_test, load_report, resolve_output_dir, run


def _parse_potential(text: str):
    if text == "abs":
        return absolute_value()
    if text.startswith("morse:"):
        return morse(float(text.split(":", 1)[1]))
    raise argparse.ArgumentTypeError(
        f"unknown potential {text!r} (use 'abs' or 'morse:<a>')"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aggeq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a run configuration")
    p_run.add_argument("config", type=Path, help="path to a config.json")

    p_cmp = sub.add_parser("compare", help="transport distance between two finished runs")
    p_cmp.add_argument("run_a", type=Path)
    p_cmp.add_argument("run_b", type=Path)
    p_cmp.add_argument("--times", type=float, nargs="+", required=True)
    p_cmp.add_argument("--out", type=Path, default=None, help="write the series as CSV")

    p_ct = sub.add_parser("contraction-test", help="transport-distance stability check")
    p_ct.add_argument("--potential", type=_parse_potential, required=True,
                      metavar="abs|morse:A")
    p_ct.add_argument("--T", type=float, required=True)
    p_ct.add_argument("--n", type=int, required=True, help="atoms per measure")
    p_ct.add_argument("--seed", type=int, default=0)
    p_ct.add_argument("--dt", type=float, default=1e-4)
    p_ct.add_argument("--out", type=Path, default=None, help="write the report as JSON")

    p_pre = sub.add_parser("presets", help="list or run built-in experiments")
    pre_sub = p_pre.add_subparsers(dest="presets_command", required=True)
    pre_sub.add_parser("list", help="list preset names")
    p_pre_run = pre_sub.add_parser("run", help="run a preset")
    p_pre_run.add_argument("name", choices=PRESET_NAMES)
    p_pre_run.add_argument("--output-dir", default=None,
                           help="defaults to ./runs/<name> (under $AGGEQ_OUTPUT_ROOT if set)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "run":
        report = run(load_config(args.config))
        print(f"run finished: {report.output_dir}")
        for inv in report.report["invariants"]:
            mark = "ok " if inv["passed"] else "FAIL"
            print(f"  [{mark}] {inv['name']}: {inv['value']:.3e} (threshold {inv['threshold']:.0e})")
        return 0 if report.passed else 1

    if args.command == "compare":
        series = compare(load_report(args.run_a), load_report(args.run_b),
                         args.times, out_csv=args.out)
        for t, d in series:
            print(f"t={t:.6g} d_w={d:.9g}")
        return 0

    if args.command == "contraction-test":
        report = contraction_test(args.potential, seed=args.seed, T=args.T, n_atoms=args.n,
                                  dt=args.dt)
        if args.out is not None:
            args.out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                                encoding="utf-8")
        print(f"contraction bound holds: {report['bound_holds']}; "
              f"recentered rate holds: {report['recentered_bound_holds']}")
        return 0 if report["passed"] else 1

    if args.command == "presets":
        if args.presets_command == "list":
            for name in PRESET_NAMES:
                print(f"{name}: {preset_description(name)}")
            return 0
        outdir = args.output_dir or str(Path("runs") / args.name)
        config = preset_config(args.name, str(resolve_output_dir(outdir)))
        report = run(config)
        print(f"preset {args.name} finished: {report.output_dir}")
        for inv in report.report["invariants"]:
            mark = "ok " if inv["passed"] else "FAIL"
            print(f"  [{mark}] {inv['name']}: {inv['value']:.3e} (threshold {inv['threshold']:.0e})")
        return 0 if report.passed else 1

    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
