"""jump-mppi-plot: render figures from jump-mppi result CSVs.

Either point --spec at a YAML file with PlotSpec fields, or pass the fields
as flags.  Spec YAML example:

    kind: trajectory-grid
    output_path: fig1.png
    trajectory_csvs:
      old: results/traj_cartpole_old_nu0.25_sj3_m1000.csv
      new: results/traj_cartpole_new_nu0.25_sj3_m1000.csv
    columns: [cart_pos, pole_angle, force, jump_indicator]
    targets: {cart_pos: 0.0, pole_angle: 3.141592653589793}
"""

from __future__ import annotations

import argparse
import sys

import yaml

from .data import DataError
from .figures import PlotSpec, render


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jump-mppi-plot")
    p.add_argument("--spec", help="YAML file with PlotSpec fields")
    p.add_argument("--kind", choices=("trajectory-grid", "noise-traces", "variance-bars"))
    p.add_argument("--out", help="output image path")
    p.add_argument(
        "--trajectory-csv",
        action="append",
        default=[],
        metavar="VARIANT=PATH",
        help="trajectory CSV for one variant (repeatable)",
    )
    p.add_argument("--summary-csv")
    p.add_argument("--columns", help="comma-separated CSV columns to panel")
    p.add_argument(
        "--target",
        action="append",
        default=[],
        metavar="COLUMN=VALUE",
        help="horizontal target-line for a column (repeatable)",
    )
    return p


def spec_from_args(args) -> PlotSpec:
    if args.spec:
        with open(args.spec) as fh:
            raw = yaml.safe_load(fh) or {}
        return PlotSpec(
            kind=raw["kind"],
            output_path=raw["output_path"],
            trajectory_csvs=dict(raw.get("trajectory_csvs", {})),
            summary_csv=raw.get("summary_csv"),
            columns=tuple(raw.get("columns", ())),
            targets=dict(raw.get("targets", {})),
        )
    if not args.kind or not args.out:
        raise DataError("--kind and --out are required without --spec")
    trajectory_csvs = {}
    for item in args.trajectory_csv:
        variant, _, path = item.partition("=")
        if not path:
            raise DataError(f"--trajectory-csv expects VARIANT=PATH, got {item!r}")
        trajectory_csvs[variant] = path
    targets = {}
    for item in args.target:
        column, _, value = item.partition("=")
        if not value:
            raise DataError(f"--target expects COLUMN=VALUE, got {item!r}")
        targets[column] = float(value)
    return PlotSpec(
        kind=args.kind,
        output_path=args.out,
        trajectory_csvs=trajectory_csvs,
        summary_csv=args.summary_csv,
        columns=tuple(args.columns.split(",")) if args.columns else (),
        targets=targets,
    )


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        spec = spec_from_args(args)
        path = render(spec)
    except (DataError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path} and {path}.sidecar.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
