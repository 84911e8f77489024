"""Figure rendering for experiment reports.

Every run writes its plot-ready trace both as a delimited file (trace.dat)
and as a rendered PNG next to it.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def write_trace_dat(path, xs: Sequence[float], ys: Sequence[float]) -> None:
    """Two-column whitespace-delimited file, gnuplot-compatible."""
    with open(path, "w") as fh:
        for x, y in zip(xs, ys):
            fh.write(f"{x} {y!r}\n")


def render_trace(
    path,
    xs: Sequence[float],
    ys: Sequence[float],
    *,
    title: str,
    xlabel: str,
    ylabel: str,
    hlines: Sequence[tuple[float, str]] = (),
) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, ys, lw=1.0, color="tab:blue")
    for level, label in hlines:
        ax.axhline(level, ls="--", lw=0.8, color="tab:red")
        ax.annotate(label, (0.99, level), xycoords=("axes fraction", "data"),
                    ha="right", va="bottom", fontsize=8, color="tab:red")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
