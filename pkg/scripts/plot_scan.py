#!/usr/bin/env python3
"""Plot a scan CSV produced by `decobell scan`.

Usage: python3 scripts/plot_scan.py series.csv [field ...]

Documentation asset only; not part of the tested surface.
"""

import sys

import matplotlib.pyplot as plt
import pandas as pd


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    path = sys.argv[1]
    fields = sys.argv[2:] or ["B", "C"]
    table = pd.read_csv(path, comment="#")
    x = table.columns[0]
    fig, ax = plt.subplots(figsize=(6, 4))
    for field in fields:
        ax.plot(table[x], table[field], label=field)
    ax.set_xlabel(x)
    ax.axhline(2.0, color="gray", lw=0.5, ls="--")
    ax.legend()
    fig.tight_layout()
    out = path.rsplit(".", 1)[0] + ".png"
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
