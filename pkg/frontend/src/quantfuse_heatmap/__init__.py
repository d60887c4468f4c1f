"""Heatmap rendering for coefficient-surface grids (t, tau, j, beta_hat)."""

from .plot import GridFormatError, plot_grid, read_grid

__all__ = ["GridFormatError", "plot_grid", "read_grid"]
