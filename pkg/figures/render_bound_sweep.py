#!/usr/bin/env python3
"""Sweep figure: error bounds and the empirical 95th percentile against the
target rank k.

Reads the CSV written by `rangefinder figdata --kind bound_sweep` and renders
<out>.svg + <out>.png: one line per method (markers only when a single k is
present), with the conjectured bound drawn dashed. Series are drawn in the
order listed below, which is also the legend order.
"""

import argparse
import sys

from _common import read_columns, save_svg_png
from matplotlib import pyplot as plt

SERIES = [
    ("empirical_quantile", "empirical 95th percentile", "k", "-"),
    ("bound_frobenius", "average-ratio bound", "C0", "-"),
    ("bound_gap", "leading-ratio bound", "C2", "-"),
    ("bound_conjecture", "conjectured bound", "C1", "--"),
]
OPTIONAL = [("bound_cdf", "CDF-estimated bound", "C4", "-")]


def render_bound_sweep(path: str, out: str) -> list[str]:
    required = ["k"] + [name for name, *_ in SERIES]
    header, cols = read_columns(path, required, [name for name, *_ in OPTIONAL])
    series = SERIES + [s for s in OPTIONAL if s[0] in header]
    k = cols["k"]

    fig, ax = plt.subplots(figsize=(5.4, 3.8))
    for name, label, color, style in series:
        ax.plot(k, cols[name], style, color=color, marker="o", ms=3.5,
                lw=1.4, label=label)
    ax.set_xlabel("target rank k")
    ax.set_ylabel(r"$\sin\theta_1$")
    ax.set_yscale("log")
    ax.legend(loc="best", frameon=False, fontsize=8)
    fig.tight_layout()
    return save_svg_png(fig, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="path", required=True,
                        help="bound_sweep CSV from the figdata command")
    parser.add_argument("--out", required=True, help="output image path stem")
    args = parser.parse_args(argv)
    for path in render_bound_sweep(args.path, args.out):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
