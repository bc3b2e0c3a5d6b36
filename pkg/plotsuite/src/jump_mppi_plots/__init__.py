"""Figure regeneration for jump-mppi experiment CSVs."""

from .data import TrajectoryTable, mean_and_ci, read_summary_csv, read_trajectory_csv
from .figures import PlotSpec, plot_noise_traces, plot_trajectory_grid, plot_variance_bars, render

__version__ = "0.1.0"
