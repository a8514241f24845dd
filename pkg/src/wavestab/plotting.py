"""Figures for CSV outputs: a gnuplot script and a matplotlib PNG per table."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import SpecificationError

__all__ = ["LOG_COLUMNS", "read_csv", "emit_plot_script", "render_figure"]

# columns holding norms or distances, drawn on a log axis
LOG_COLUMNS = frozenset(
    {"W", "U", "sup_w", "sup_u", "l2_error", "sup_discrepancy", "distance", "phi_distance",
     "w0_h1_distance", "bound", "norm_coarse", "norm_fine"}
)


def read_csv(path):
    """Header and columns of a CSV written by the CLI; marker tokens become nan."""
    path = Path(path)
    if not path.is_file():
        raise SpecificationError(f"no such CSV file: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SpecificationError(f"{path} is empty")
    header, body = rows[0], rows[1:]

    def num(s):
        try:
            return float(s)
        except ValueError:
            return np.nan

    cols = {name: np.array([num(r[i]) for r in body]) for i, name in enumerate(header)}
    return header, cols


def _check_columns(path, header, columns):
    for c in columns:
        if c not in header:
            raise SpecificationError(f"column {c!r} not in {Path(path).name} (has {', '.join(header)})")


def emit_plot_script(csv_path, columns, script_path=None):
    """Write a gnuplot script plotting ``columns`` against the first column.

    The script refers to the CSV by file name so it runs from the output
    directory and is byte-identical for identical inputs.
    """
    csv_path = Path(csv_path)
    header, _ = read_csv(csv_path)
    columns = list(columns)
    _check_columns(csv_path, header, columns)
    log = all(c in LOG_COLUMNS for c in columns)
    lines = [
        "set datafile separator ','",
        "set datafile missing 'extinct'",
        "set terminal pngcairo size 800,560",
        f"set output '{csv_path.stem}_gnuplot.png'",
        f"set xlabel '{header[0]}'",
        "set logscale y" if log else "unset logscale y",
        "set format y '%.0e'" if log else "set format y '%g'",
        "plot " + ", \\\n     ".join(
            f"'{csv_path.name}' using 1:{header.index(c) + 1} with lines title '{c}'" for c in columns
        ),
        "",
    ]
    text = "\n".join(lines)
    script_path = csv_path.with_suffix(".gp") if script_path is None else Path(script_path)
    script_path.write_text(text)
    return script_path


def render_figure(csv_path, columns, png_path=None, x=None):
    """Draw ``columns`` against ``x`` (default: the first column) into a PNG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    csv_path = Path(csv_path)
    header, cols = read_csv(csv_path)
    columns = list(columns)
    x = header[0] if x is None else x
    _check_columns(csv_path, header, columns + [x])
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for c in columns:
        y = cols[c]
        if c in LOG_COLUMNS:
            y = np.where(y > 0, y, np.nan)
        ax.plot(cols[x], y, marker="o" if cols[x].size < 30 else None, lw=1.2, label=c)
    if all(c in LOG_COLUMNS for c in columns):
        ax.set_yscale("log")
    ax.set_xlabel(x)
    ax.legend(frameon=False)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    png_path = csv_path.with_suffix(".png") if png_path is None else Path(png_path)
    fig.savefig(png_path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return png_path
