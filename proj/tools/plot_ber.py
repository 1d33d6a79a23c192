#!/usr/bin/env python3
"""BER against Eb/N0 on a log axis, one curve per scheme and input file.

    plot_ber.py a.csv [b.csv ...] -o ber.png [--title TEXT] [--target 1e-4]
"""

import argparse
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

MARKERS = "osD^v<>px*"


def load(path):
    curves = defaultdict(list)
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            curves[row["scheme"]].append(
                (float(row["ebno_db"]), float(row["ber"]), float(row["ci95"]))
            )
    return curves


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv", nargs="+")
    ap.add_argument("-o", "--out", required=True)
    ap.add_argument("--title", default="")
    ap.add_argument("--target", type=float, default=None, help="draw a horizontal line at this BER")
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    n = 0
    for path in args.csv:
        for scheme, pts in load(path).items():
            pts = sorted(p for p in pts if p[1] > 0)
            if not pts:
                continue
            x, y, ci = zip(*pts)
            label = scheme if len(args.csv) == 1 else f"{scheme} ({path})"
            ax.errorbar(x, y, yerr=ci, marker=MARKERS[n % len(MARKERS)], capsize=2, label=label)
            n += 1
    if n == 0:
        sys.exit("no nonzero BER points to plot")
    if args.target:
        ax.axhline(args.target, color="grey", linestyle=":", linewidth=1)
    ax.set_yscale("log")
    ax.set_xlabel("Eb/N0 [dB]")
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    if args.title:
        ax.set_title(args.title)
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)


if __name__ == "__main__":
    main()
