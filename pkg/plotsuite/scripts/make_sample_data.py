"""Regenerate the shipped sample CSVs from the jump-mppi CLI.

Runs a small fixed cartpole sweep (four cells, paired variants) and copies
the outputs into plotsuite/sample_data/.  Deterministic: the same files
come out every time.
"""

import os
import shutil
import sys
import tempfile

from jump_mppi.cli import main

SAMPLE_DIR = os.path.join(os.path.dirname(__file__), "..", "sample_data")

CONFIG = """\
task: cartpole
trials: 4
base_seed: 424242
duration_seconds: 2.0
mppi:
  samples: 128
  sigma_j: 2.0
sweep:
  sigma_j: [1.0, 3.0]
  samples: [128, 256]
"""


def run() -> None:
    os.makedirs(SAMPLE_DIR, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        config_path = os.path.join(tmp, "sample.yaml")
        with open(config_path, "w") as fh:
            fh.write(CONFIG)
        out = os.path.join(tmp, "out")
        rc = main(["run", "--config", config_path, "--out", out])
        if rc != 0:
            raise SystemExit(rc)
        shutil.copy(os.path.join(out, "summary.csv"),
                    os.path.join(SAMPLE_DIR, "summary.csv"))
        for variant in ("old", "new"):
            shutil.copy(
                os.path.join(out, f"traj_cartpole_{variant}_nu0.25_sj3_m128.csv"),
                os.path.join(SAMPLE_DIR, f"traj_cartpole_{variant}.csv"),
            )
    print(f"sample data written to {os.path.abspath(SAMPLE_DIR)}")


if __name__ == "__main__":
    sys.exit(run())
