#!/usr/bin/env python3
"""Render ordered message-count matrices as heatmaps.

Each input directory must contain ordered_counts.csv and ordered_counts.json
as written by `tmmsb fit` or `tmmsb reduce --ordered`. Group boundaries are
drawn as white lines. Several directories render side by side, e.g. the same
log ordered by estimated and by true memberships.
"""

import argparse
import csv
import json
import pathlib

import matplotlib.pyplot as plt
import numpy as np


def load_dir(d):
    d = pathlib.Path(d)
    with open(d / "ordered_counts.csv", newline="") as fh:
        matrix = np.array([[float(v) for v in row] for row in csv.reader(fh)])
    with open(d / "ordered_counts.json") as fh:
        meta = json.load(fh)
    return matrix, meta["boundaries"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("dirs", nargs="+", help="run directories with ordered_counts.{csv,json}")
    ap.add_argument("--titles", nargs="*", default=None)
    ap.add_argument("-o", "--out", default="adjacency.png")
    args = ap.parse_args()

    fig, axes = plt.subplots(1, len(args.dirs), figsize=(4.2 * len(args.dirs), 4), squeeze=False)
    for i, d in enumerate(args.dirs):
        matrix, boundaries = load_dir(d)
        ax = axes[0][i]
        ax.imshow(np.log1p(matrix), cmap="inferno", interpolation="nearest")
        for b in boundaries[:-1]:  # last boundary is the matrix edge
            ax.axhline(b - 0.5, color="white", lw=0.6)
            ax.axvline(b - 0.5, color="white", lw=0.6)
        ax.set_title(args.titles[i] if args.titles and i < len(args.titles) else d)
        ax.set_xlabel("recipient (ordered)")
        if i == 0:
            ax.set_ylabel("sender (ordered)")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
