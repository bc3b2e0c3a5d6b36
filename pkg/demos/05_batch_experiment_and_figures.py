"""End-to-end mini experiment: sweep, CSVs, and (optionally) figures.

Runs a desk-scale cartpole sweep through the same path as the `jump-mppi
run` command, prints the summary table, and, if the jump-mppi-plots package
is installed, renders a trajectory grid and a variance bar chart from the
CSVs it just wrote.

This is a scaled-down sweep (few trials, small sample count) so it finishes
in about a minute; the shipped experiment configs run the full-scale
versions.
"""

import os

from jump_mppi.cli import main
from jump_mppi.io import read_summary_csv

OUT = "demo_results"

config_text = """\
task: cartpole
trials: 4
base_seed: 11
duration_seconds: 4.0
mppi:
  samples: 256
  sigma_j: 2.0
sweep:
  sigma_j: [1.0, 3.0]
"""

with open("demo_experiment.yaml", "w") as fh:
    fh.write(config_text)

rc = main(["run", "--config", "demo_experiment.yaml", "--out", OUT])
assert rc == 0

print(f"\n{'variant':8s} {'nu':>5s} {'sigma_j':>8s} {'success':>8s} {'total_var':>10s}")
for row in read_summary_csv(os.path.join(OUT, "summary.csv")):
    print(f"{row['variant']:8s} {row['nu']:5.2f} {row['sigma_j']:8.1f} "
          f"{row['success_rate']:8.2f} {row['total_variance']:10.1f}")

try:
    from jump_mppi_plots import PlotSpec, render

    render(
        PlotSpec(
            kind="trajectory-grid",
            output_path=os.path.join(OUT, "grid.png"),
            trajectory_csvs={
                "old": os.path.join(OUT, "traj_cartpole_old_nu0.25_sj3_m256.csv"),
                "new": os.path.join(OUT, "traj_cartpole_new_nu0.25_sj3_m256.csv"),
            },
            columns=("cart_pos", "pole_angle", "force", "jump_indicator"),
            targets={"cart_pos": 0.0, "pole_angle": 3.141592653589793},
        )
    )
    render(
        PlotSpec(
            kind="variance-bars",
            output_path=os.path.join(OUT, "bars.png"),
            summary_csv=os.path.join(OUT, "summary.csv"),
        )
    )
    print(f"\nwrote {OUT}/grid.png and {OUT}/bars.png (+ numeric sidecars)")
except ImportError:
    print("\njump-mppi-plots not installed; skipping figures")
