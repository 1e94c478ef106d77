#!/usr/bin/env python3
"""Render heatmaps from sweep CSVs.

Consumes either CSV schema the sweeps emit and plots a (k1, k2) heatmap:

* usefulness sweeps (``d,k1,...,belief,grid_card,threshold_card,ratio,...``)
  plot the grid/threshold cardinality ratio;
* budget-tightness sweeps (``k1,k2,default_alpha,max_alpha,method,
  increase_percent``) plot the percentage increase.

Example:
    gridquorum sweep 2d --k1 4..32 --k2 4..32 --out ratio.csv
    python scripts/plot_heatmaps.py ratio.csv --out ratio.png
"""

from __future__ import annotations

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def read_cells(path: str) -> tuple[dict[tuple[int, int], float], str]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "increase_percent" in fields:
            value_col, label = "increase_percent", "budget increase (%)"
        elif "ratio" in fields:
            value_col, label = "ratio", "grid / threshold cardinality"
        else:
            raise SystemExit(f"unrecognized CSV header: {fields}")
        cells = {}
        for row in reader:
            if row.get("k2", "") == "":
                continue  # one-dimensional rows have nothing to plot
            cells[(int(row["k1"]), int(row["k2"]))] = float(row[value_col])
    if not cells:
        raise SystemExit("no two-dimensional rows in the CSV")
    return cells, label


def plot(cells: dict[tuple[int, int], float], label: str, out: str) -> None:
    k1s = sorted({k1 for k1, _ in cells})
    k2s = sorted({k2 for _, k2 in cells})
    grid = np.full((len(k1s), len(k2s)), np.nan)
    for (k1, k2), value in cells.items():
        grid[k1s.index(k1), k2s.index(k2)] = value
    fig, ax = plt.subplots(figsize=(7, 6))
    image = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(k2s)), [str(k) for k in k2s])
    ax.set_yticks(range(len(k1s)), [str(k) for k in k1s])
    ax.set_xlabel("second attribute cardinality")
    ax.set_ylabel("first attribute cardinality")
    fig.colorbar(image, ax=ax, label=label)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv_path", help="sweep CSV produced by the CLI")
    parser.add_argument("--out", default=None, help="output PNG (default: <csv>.png)")
    args = parser.parse_args(argv)
    out = args.out or args.csv_path.rsplit(".", 1)[0] + ".png"
    cells, label = read_cells(args.csv_path)
    plot(cells, label, out)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
