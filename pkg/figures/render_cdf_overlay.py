#!/usr/bin/env python3
"""Overlay figure: computed distribution curve against the empirical
distribution of sampled range-finder errors, plus a histogram panel.

Reads the two CSVs written by `rangefinder figdata --kind cdf_overlay`
(<prefix>_cdf.csv and <prefix>_samples.csv) and renders <out>.svg + <out>.png.
No statistic is recomputed here; the only processing is sorting the samples
for their empirical distribution and density-normalizing the histogram.
"""

import argparse
import math
import sys

from _common import read_columns, save_svg_png
from matplotlib import pyplot as plt


def render_cdf_overlay(prefix: str, out: str) -> list[str]:
    _, curve = read_columns(prefix + "_cdf.csv", ("theta", "cdf"))
    _, samp = read_columns(prefix + "_samples.csv", ("sin_theta1",))
    samples = sorted(samp["sin_theta1"])
    if not samples:
        raise ValueError(f"{prefix}_samples.csv contains no samples")
    n = len(samples)

    fig, (ax_cdf, ax_hist) = plt.subplots(1, 2, figsize=(9, 3.6))
    x_curve = [math.sin(t) for t in curve["theta"]]
    ax_cdf.step(samples, [(i + 1) / n for i in range(n)], where="post",
                color="0.55", lw=1.0, label=f"empirical ({n} samples)")
    ax_cdf.plot(x_curve, curve["cdf"], color="C3", lw=1.6, label="computed CDF")
    ax_cdf.set_xlabel(r"$\sin\theta_1$")
    ax_cdf.set_ylabel("probability")
    ax_cdf.set_xlim(0.0, 1.0)
    ax_cdf.set_ylim(0.0, 1.02)
    ax_cdf.legend(loc="upper left", frameon=False)

    ax_hist.hist(samples, bins=40, density=True, color="0.75", edgecolor="0.4")
    ax_hist.set_xlabel(r"$\sin\theta_1$")
    ax_hist.set_ylabel("density")
    fig.tight_layout()
    return save_svg_png(fig, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="prefix", required=True,
                        help="figdata output prefix (expects <prefix>_cdf.csv "
                             "and <prefix>_samples.csv)")
    parser.add_argument("--out", required=True, help="output image path stem")
    args = parser.parse_args(argv)
    for path in render_cdf_overlay(args.prefix, args.out):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
