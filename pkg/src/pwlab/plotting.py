"""Figures for experiment reports.

Each figure is described once as a :class:`Figure` and emitted twice: as a
PNG rendered with matplotlib's Agg backend and as a gnuplot script that
reads the same CSV files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import IoFailure  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
    "legend.frameon": False,
    "svg.hashsalt": "pwlab",
}


@dataclass
class Series:
    csv: str
    x: str
    y: str
    label: str


@dataclass
class Figure:
    name: str
    title: str
    xlabel: str
    ylabel: str
    series: list = field(default_factory=list)
    logx: bool = False
    logy: bool = False


def render_png(fig: Figure, data: dict, out_dir) -> Path:
    """Draw ``fig``; ``data`` maps each series' CSV name to ``{column: values}``."""
    path = Path(out_dir) / f"{fig.name}.png"
    with plt.rc_context(STYLE):
        f, ax = plt.subplots()
        for s in fig.series:
            cols = data[s.csv]
            ax.plot(cols[s.x], cols[s.y], marker="o", label=s.label)
        if fig.logx:
            ax.set_xscale("log", base=2)
        if fig.logy:
            ax.set_yscale("log")
        ax.set_xlabel(fig.xlabel)
        ax.set_ylabel(fig.ylabel)
        ax.set_title(fig.title)
        if len(fig.series) > 1:
            ax.legend()
        f.tight_layout()
        try:
            # no software/date metadata, so reruns are byte-identical
            f.savefig(path, metadata={"Software": None})
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc
        finally:
            plt.close(f)
    return path


def gnuplot_script(figs: Sequence[Figure], columns: dict) -> str:
    """Script drawing every figure from the CSVs; ``columns`` maps CSV name to header."""
    lines = ["# gnuplot script; run from the output directory",
             "set datafile separator ','",
             "set terminal pngcairo size 500,340",
             "set grid"]
    for fig in figs:
        lines.append("")
        lines.append(f"set output '{fig.name}_gnuplot.png'")
        lines.append(f"set title '{fig.title}'")
        lines.append(f"set xlabel '{fig.xlabel}'")
        lines.append(f"set ylabel '{fig.ylabel}'")
        lines.append("set logscale x 2" if fig.logx else "unset logscale x")
        lines.append("set logscale y" if fig.logy else "unset logscale y")
        parts = []
        for s in fig.series:
            header = columns[s.csv]
            xi, yi = header.index(s.x) + 1, header.index(s.y) + 1
            parts.append(f"'{s.csv}' using {xi}:{yi} skip 1 with linespoints title '{s.label}'")
        lines.append("plot " + ", \\\n     ".join(parts))
    return "\n".join(lines) + "\n"
