#!/usr/bin/env python3
"""Contour maps of B and C from a `decobell contour` CSV.

Usage: python3 scripts/plot_contour.py grid.csv

Documentation asset only; not part of the tested surface.
"""

import sys

import matplotlib.pyplot as plt
import pandas as pd


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    path = sys.argv[1]
    table = pd.read_csv(path, comment="#")
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, field, levels in zip(axes, ("B", "C"), ([2.0, 2.4, 2.8], [0.0, 0.4, 0.8])):
        pivot = table.pivot(index="J1", columns="T", values=field)
        cf = ax.contourf(pivot.columns, pivot.index, pivot.values, 20, cmap="viridis")
        ax.contour(pivot.columns, pivot.index, pivot.values, levels=levels,
                   colors="white", linewidths=0.7)
        ax.set_xlabel("T")
        ax.set_title(field)
        fig.colorbar(cf, ax=ax)
    axes[0].set_ylabel("J1")
    fig.tight_layout()
    out = path.rsplit(".", 1)[0] + ".png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
