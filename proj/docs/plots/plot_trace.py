#!/usr/bin/env python3
"""Plot ELBO traces from one or more trace.csv files written by `tmmsb fit`."""

import argparse
import csv

import matplotlib.pyplot as plt


def load_trace(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [int(r["outer_iteration"]) for r in rows], [float(r["elbo"]) for r in rows]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("traces", nargs="+", help="trace.csv files")
    ap.add_argument("--labels", nargs="*", default=None)
    ap.add_argument("-o", "--out", default="trace.png")
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(6, 4))
    for i, path in enumerate(args.traces):
        outer, elbo = load_trace(path)
        label = args.labels[i] if args.labels and i < len(args.labels) else path
        ax.plot(outer, elbo, marker=".", ms=3, label=label)
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("ELBO")
    if len(args.traces) > 1 or args.labels:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
