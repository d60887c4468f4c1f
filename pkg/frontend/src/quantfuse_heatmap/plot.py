"""Render per-covariate heatmap panels from a coefficient-surface grid CSV.

Input schema: ``t,tau,j,beta_hat`` (one row per grid cell and covariate, j
1-based), as written by the solver CLI's ``grid`` subcommand. Output: one
``panel_<j>.png`` per covariate plus a ``combined.png`` multi-panel figure,
x-axis t, y-axis tau, independent color scale per panel.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


class GridFormatError(ValueError):
    """Raised for missing columns or an empty/ragged grid."""


def read_grid(path):
    """Load the grid CSV into (t_grid, tau_grid, values[nt, ntau, p], names).

    names maps j to a panel label; an optional ``name`` column overrides the
    default ``beta_j``.
    """
    rows = []
    names = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        missing = [c for c in ("t", "tau", "j", "beta_hat") if c not in fields]
        if missing:
            raise GridFormatError(
                "%s: missing required columns: %s" % (path, ", ".join(missing))
            )
        has_name = "name" in fields
        for lineno, row in enumerate(reader, start=2):
            try:
                t = float(row["t"])
                tau = float(row["tau"])
                j = int(row["j"])
                val = float(row["beta_hat"])
            except (TypeError, ValueError) as exc:
                raise GridFormatError("%s, line %d: %s" % (path, lineno, exc))
            rows.append((t, tau, j, val))
            if has_name and row["name"]:
                names[j] = row["name"]
    if not rows:
        raise GridFormatError("%s: empty grid" % path)
    t_grid = np.unique([r[0] for r in rows])
    tau_grid = np.unique([r[1] for r in rows])
    p = max(r[2] for r in rows)
    values = np.full((t_grid.size, tau_grid.size, p), np.nan)
    ti = {v: i for i, v in enumerate(t_grid)}
    si = {v: i for i, v in enumerate(tau_grid)}
    for t, tau, j, val in rows:
        values[ti[t], si[tau], j - 1] = val
    if np.isnan(values).any():
        raise GridFormatError("%s: grid is not a complete t x tau x j product" % path)
    labels = [names.get(j, "beta_%d" % j) for j in range(1, p + 1)]
    return t_grid, tau_grid, values, labels


def panel_extent(t_grid, tau_grid):
    return [t_grid[0], t_grid[-1], tau_grid[0], tau_grid[-1]]


def color_limits(surface):
    """Independent per-panel scale; a flat surface gets a unit-width range."""
    lo = float(surface.min())
    hi = float(surface.max())
    if hi - lo < 1e-12:
        mid = 0.5 * (lo + hi)
        return mid - 0.5, mid + 0.5
    return lo, hi


def _draw(ax, t_grid, tau_grid, surface, label):
    vmin, vmax = color_limits(surface)
    img = ax.imshow(surface.T, origin="lower", aspect="auto",
                    extent=panel_extent(t_grid, tau_grid),
                    vmin=vmin, vmax=vmax, cmap="viridis",
                    interpolation="nearest")
    ax.set_title(label)
    ax.set_xlabel("t")
    ax.set_ylabel("tau")
    return img


def plot_grid(grid_csv_path, out_dir, panels_per_row=3):
    """Write panel_<j>.png per covariate and combined.png; returns the paths."""
    t_grid, tau_grid, values, labels = read_grid(grid_csv_path)
    os.makedirs(out_dir, exist_ok=True)
    p = values.shape[2]
    written = []
    for j in range(p):
        fig, ax = plt.subplots(figsize=(4.2, 3.4))
        img = _draw(ax, t_grid, tau_grid, values[:, :, j], labels[j])
        fig.colorbar(img, ax=ax)
        fig.tight_layout()
        path = os.path.join(out_dir, "panel_%d.png" % (j + 1))
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)

    ncols = max(1, int(panels_per_row))
    nrows = (p + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(4.0 * ncols, 3.2 * nrows),
                             squeeze=False)
    for j in range(nrows * ncols):
        ax = axes[j // ncols][j % ncols]
        if j < p:
            img = _draw(ax, t_grid, tau_grid, values[:, :, j], labels[j])
            fig.colorbar(img, ax=ax)
        else:
            ax.axis("off")
    fig.tight_layout()
    combined = os.path.join(out_dir, "combined.png")
    fig.savefig(combined, dpi=110)
    plt.close(fig)
    written.append(combined)
    return written


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Render coefficient-surface heatmaps from a grid CSV")
    parser.add_argument("grid_csv")
    parser.add_argument("--out-dir", default="plots")
    parser.add_argument("--panels-per-row", type=int, default=3)
    args = parser.parse_args(argv)
    try:
        written = plot_grid(args.grid_csv, args.out_dir, args.panels_per_row)
    except (GridFormatError, FileNotFoundError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    print("wrote %d images to %s" % (len(written), args.out_dir))
    return 0


if __name__ == "__main__":
    sys.exit(main())
