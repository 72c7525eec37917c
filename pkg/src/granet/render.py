"""Plain-text SVG renderings of partitions."""

from __future__ import annotations

import colorsys
from collections import Counter
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError
from .graph import Partition, SpatialGraph

PX = 12.0  # pixels per length unit
MARGIN = 30.0
LEGEND_W = 170.0
GOLDEN = 0.6180339887498949


def community_color(cid: int, seed: int = 0) -> str:
    """Deterministic fill colour for a community id."""
    hue = (int(cid) * GOLDEN + seed * 0.1372) % 1.0
    sat = 0.55 + 0.35 * ((int(cid) * 7 + seed) % 3) / 2.0
    r, g, b = colorsys.hls_to_rgb(hue, 0.5, sat)
    return "#{:02x}{:02x}{:02x}".format(round(r * 255), round(g * 255), round(b * 255))


class _Canvas:
    def __init__(self, xmin, xmax, ymin, ymax):
        self.xmin, self.ymax = xmin, ymax
        self.w = (xmax - xmin) * PX
        self.h = (ymax - ymin) * PX
        self.parts = []

    def x(self, v):
        return MARGIN + (v - self.xmin) * PX

    def y(self, v):
        return MARGIN + (self.ymax - v) * PX

    def circle(self, x, y, r, fill):
        self.parts.append(
            f'<circle cx="{self.x(x):.2f}" cy="{self.y(y):.2f}" r="{r * PX:.2f}" fill="{fill}" stroke="#333" stroke-width="0.4"/>'
        )

    def text(self, x, y, s, size=11):
        self.parts.append(f'<text x="{x:.1f}" y="{y:.1f}" font-family="sans-serif" font-size="{size}">{s}</text>')

    def axes(self, title):
        w, h = self.w, self.h
        self.parts.append(
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{w:.2f}" height="{h:.2f}" fill="none" stroke="#000" stroke-width="1"/>'
        )
        self.text(MARGIN, MARGIN - 10, title, 13)
        self.text(MARGIN + w / 2, MARGIN + h + 20, "x")
        self.text(8, MARGIN + h / 2, "y")

    def legend(self, counts: Counter, seed: int):
        x0 = MARGIN * 2 + self.w
        self.text(x0, MARGIN, "largest communities", 12)
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
        for row, (cid, size) in enumerate(ranked):
            y = MARGIN + 18 * (row + 1)
            self.parts.append(f'<rect x="{x0:.1f}" y="{y - 10:.1f}" width="12" height="12" fill="{community_color(cid, seed)}"/>')
            self.text(x0 + 18, y, f"{cid}: {size}")

    def write(self, path):
        width = self.w + 3 * MARGIN + LEGEND_W
        height = self.h + 2 * MARGIN + 20
        head = (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}" '
            f'viewBox="0 0 {width:.2f} {height:.2f}">'
        )
        Path(path).write_text("\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *self.parts, "</svg>"]) + "\n",
                              encoding="utf-8")


def _bounds(g: SpatialGraph):
    pos = g.positions
    pad = float(g.radii.max())
    return pos[:, 0].min() - pad, pos[:, 0].max() + pad, pos[:, 1].min() - pad, pos[:, 1].max() + pad


def render_2d(g: SpatialGraph, p: Partition, path, seed: int = 0, title: str = "partition"):
    if g.dimension != 2:
        raise DimensionMismatchError("render_2d needs a 2D graph; use render_slices for 3D")
    canvas = _Canvas(*_bounds(g))
    canvas.axes(title)
    for (x, y), r, c in zip(g.positions.tolist(), g.radii.tolist(), p.labels.tolist()):
        canvas.circle(x, y, r, community_color(c, seed))
    canvas.legend(Counter(p.labels.tolist()), seed)
    canvas.write(path)
    return Path(path)


def default_slice_positions(g: SpatialGraph, count: int = 3) -> list[float]:
    layers = np.unique(np.round(g.positions[:, 2], 9))
    picks = [layers[int(len(layers) * (k + 1) / (count + 1))] for k in range(count)]
    return [float(z) for z in picks]


def render_slices(g: SpatialGraph, p: Partition, z_values, path_prefix, thickness: float | None = None,
                  seed: int = 0) -> list[Path]:
    """One XY slice per z value; a community keeps its colour across slices."""
    if g.dimension != 3:
        raise DimensionMismatchError("render_slices needs a 3D graph")
    if thickness is None:
        thickness = 0.6 * g.diameter
    bounds = _bounds(g)
    out = []
    for k, z in enumerate(z_values, start=1):
        canvas = _Canvas(*bounds)
        canvas.axes(f"slice {k}: z = {z:g}")
        sel = np.flatnonzero(np.abs(g.positions[:, 2] - z) <= thickness / 2.0)
        for i in sel.tolist():
            x, y = g.positions[i, 0], g.positions[i, 1]
            canvas.circle(x, y, g.radii[i], community_color(p.labels[i], seed))
        canvas.legend(Counter(p.labels[sel].tolist()), seed)
        path = Path(f"{path_prefix}_slice{k}.svg")
        canvas.write(path)
        out.append(path)
    return out
