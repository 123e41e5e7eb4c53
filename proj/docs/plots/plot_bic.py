#!/usr/bin/env python3
"""Plot the BIC scan written by `tmmsb select` (bic.csv)."""

import argparse
import csv

import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("bic_csv", help="bic.csv from tmmsb select")
    ap.add_argument("-o", "--out", default="bic.png")
    args = ap.parse_args()

    with open(args.bic_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    ks = [int(r["k"]) for r in rows]
    bic = [float(r["bic"]) for r in rows]
    ll = [float(r["log_predictive_likelihood"]) for r in rows]
    best = ks[bic.index(max(bic))]

    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(ks, bic, marker="o", label="BIC")
    ax.plot(ks, ll, marker="s", ls="--", label="log predictive likelihood")
    ax.axvline(best, color="gray", lw=0.8, ls=":")
    ax.annotate(f"best K*={best}", (best, max(bic)), textcoords="offset points",
                xytext=(6, -4), fontsize=9)
    ax.set_xlabel("number of groups K*")
    ax.set_xticks(ks)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
