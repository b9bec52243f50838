"""Shared plumbing for the figure scripts: CSV loading with column checks
and deterministic SVG + PNG export."""

import csv

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "rangefinder-figures"
matplotlib.rcParams["svg.fonttype"] = "none"

from matplotlib import pyplot as plt  # noqa: E402


class MissingColumns(ValueError):
    pass


def read_columns(path, required, optional=()):
    """Read the numeric columns of a CSV into {column: list[float]},
    failing if any required column is absent; optional columns are read
    when present."""
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise MissingColumns(f"{path} lacks columns: {', '.join(missing)}")
        rows = list(reader)
    wanted = list(required) + [c for c in optional if c in header]
    return header, {c: [float(r[c]) for r in rows] for c in wanted}


def save_svg_png(fig, out):
    """Write <stem>.svg and <stem>.png with timestamp-free metadata so the
    byte output is a pure function of the input CSVs."""
    stem = out
    for suffix in (".svg", ".png"):
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
    fig.savefig(stem + ".svg", metadata={"Date": None})
    fig.savefig(stem + ".png", dpi=150)
    plt.close(fig)
    return [stem + ".svg", stem + ".png"]
