"""CSV, gnuplot-matrix and minimal SVG writers."""

from __future__ import annotations

import csv
from html import escape
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def fmt(x) -> str:
    """Shortest repr that round-trips a float exactly."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(v) for v in row] for row in r]
    return header, np.array(data)


def write_matrix_dat(path, mat: np.ndarray) -> None:
    """Whitespace-separated matrix, one row per line (gnuplot ``matrix`` format)."""
    with open(path, "w") as fh:
        for row in np.asarray(mat):
            fh.write(" ".join(fmt(v) for v in row) + "\n")


def _color(v: float) -> str:
    # white -> dark blue
    v = min(max(v, 0.0), 1.0)
    r = int(255 * (1 - v))
    g = int(255 * (1 - 0.8 * v))
    return f"rgb({r},{g},255)"


def write_heatmap_svg(path, mat: np.ndarray, xlabel: str = "queue length", ylabel: str = "t") -> None:
    """Rows of ``mat`` drawn top to bottom, columns left to right."""
    mat = np.asarray(mat, dtype=float)
    rows, cols = mat.shape
    cw, ch = max(4, 400 // cols), max(1, 400 // rows)
    w, h = cols * cw + 60, rows * ch + 50
    vmax = mat.max() if mat.max() > 0 else 1.0
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">']
    for r in range(rows):
        for c in range(cols):
            parts.append(
                f'<rect x="{50 + c * cw}" y="{10 + r * ch}" width="{cw}" height="{ch}" '
                f'fill="{_color(mat[r, c] / vmax)}"/>'
            )
    parts.append(f'<text x="{50 + cols * cw / 2}" y="{h - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append(f'<text x="15" y="{10 + rows * ch / 2}" transform="rotate(-90 15 {10 + rows * ch / 2})" '
                 f'text-anchor="middle">{escape(ylabel)}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))


def write_bars_svg(path, mean: np.ndarray, err: np.ndarray | None = None, xlabel: str = "queue length") -> None:
    """Bar chart with optional symmetric error bars."""
    mean = np.asarray(mean, dtype=float)
    err = np.zeros_like(mean) if err is None else np.asarray(err, dtype=float)
    n = len(mean)
    bw, plot_h = 30, 300
    w, h = n * bw + 70, plot_h + 60
    top = float(np.max(mean + err)) or 1.0
    y = lambda v: 10 + plot_h * (1 - v / top)  # noqa: E731
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">']
    for i, (m, e) in enumerate(zip(mean, err)):
        x = 50 + i * bw
        parts.append(f'<rect x="{x + 3}" y="{y(m):.2f}" width="{bw - 6}" height="{plot_h + 10 - y(m):.2f}" fill="steelblue"/>')
        if e > 0:
            cx = x + bw / 2
            parts.append(f'<line x1="{cx}" y1="{y(m + e):.2f}" x2="{cx}" y2="{y(max(m - e, 0)):.2f}" stroke="black"/>')
        parts.append(f'<text x="{x + bw / 2}" y="{plot_h + 28}" text-anchor="middle" font-size="10">{i}</text>')
    parts.append(f'<text x="{50 + n * bw / 2}" y="{h - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))
