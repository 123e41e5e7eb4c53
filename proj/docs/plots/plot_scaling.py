#!/usr/bin/env python3
"""Plot runtime scaling from `tmmsb bench` output (bench.csv + scaling.json).

One log-log panel per swept dimension; the dashed line is the fitted power law
t = exp(intercept) * M^a * N^b * K^c evaluated along that dimension with the
other two held at their median grid values.
"""

import argparse
import csv
import json
import math
import pathlib
import statistics

import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("bench_dir", help="directory with bench.csv and scaling.json")
    ap.add_argument("-o", "--out", default="scaling.png")
    args = ap.parse_args()

    d = pathlib.Path(args.bench_dir)
    with open(d / "bench.csv", newline="") as fh:
        rows = [{k: float(v) for k, v in r.items()} for r in csv.DictReader(fh)]
    with open(d / "scaling.json") as fh:
        fitted = json.load(fh)

    exps = {"m": fitted["exponent_m"], "n": fitted["exponent_n"], "k": fitted["exponent_k"]}
    med = {dim: statistics.median(r[dim] for r in rows) for dim in ("m", "n", "k")}

    def model_time(m, n, k):
        return math.exp(fitted["intercept"]) * m ** exps["m"] * n ** exps["n"] * k ** exps["k"]

    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
    for ax, dim in zip(axes, ("m", "n", "k")):
        others = [o for o in ("m", "n", "k") if o != dim]
        # points where the other two dims sit at their medians
        pts = [r for r in rows if all(r[o] == med[o] for o in others)]
        ax.loglog([r[dim] for r in pts], [r["seconds"] for r in pts], "o", label="measured")
        xs = sorted({r[dim] for r in rows})
        args3 = lambda x: {dim: x, **{o: med[o] for o in others}}
        ax.loglog(xs, [model_time(**args3(x)) for x in xs], "--",
                  label=f"fit: exponent {exps[dim]:.2f}")
        ax.set_xlabel(dim.upper())
        ax.set_ylabel("seconds")
        ax.legend(fontsize=8)
    fig.suptitle(f"runtime power-law fit, R^2 = {fitted['r_squared']:.3f}", fontsize=10)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
