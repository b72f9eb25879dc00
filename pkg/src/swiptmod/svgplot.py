"""Static SVG scatter rendering of constellations (no plotting library)."""

from __future__ import annotations

import math

import numpy as np

from .transceiver import Constellation

SIZE = 480          # square canvas, equal aspect by construction
MARGIN = 40
MARKER_RADIUS = 4.0


def render_constellation_svg(constellation: Constellation, p_a: float,
                             title: str | None = None) -> str:
    """Equal-aspect scatter plot with origin cross-hairs and a sqrt(P_a) circle."""
    pts = constellation.points
    if pts.size == 0:
        raise ValueError("cannot plot an empty constellation")
    ref_radius = math.sqrt(p_a)
    extent = max(float(np.max(np.abs(pts.real))), float(np.max(np.abs(pts.imag))),
                 ref_radius) * 1.15
    if extent == 0.0:
        extent = 1.0
    span = SIZE - 2 * MARGIN
    scale = span / (2.0 * extent)

    def px(v: float) -> float:
        return SIZE / 2.0 + v * scale

    def py(v: float) -> float:
        return SIZE / 2.0 - v * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{SIZE / 2}" x2="{SIZE - MARGIN}" y2="{SIZE / 2}" '
        'stroke="#999" stroke-width="1"/>',
        f'<line x1="{SIZE / 2}" y1="{MARGIN}" x2="{SIZE / 2}" y2="{SIZE - MARGIN}" '
        'stroke="#999" stroke-width="1"/>',
        f'<circle cx="{SIZE / 2}" cy="{SIZE / 2}" r="{ref_radius * scale:.3f}" '
        'fill="none" stroke="#6a6acd" stroke-dasharray="4 3" stroke-width="1"/>',
    ]
    if title:
        parts.append(f'<text x="{SIZE / 2}" y="{MARGIN / 2 + 5}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="13">{title}</text>')
    parts.append(f'<text x="{SIZE - MARGIN}" y="{SIZE / 2 - 6}" text-anchor="end" '
                 'font-family="sans-serif" font-size="11">Re</text>')
    parts.append(f'<text x="{SIZE / 2 + 6}" y="{MARGIN + 10}" '
                 'font-family="sans-serif" font-size="11">Im</text>')
    for pt in pts:
        parts.append(f'<circle class="symbol" cx="{px(pt.real):.3f}" '
                     f'cy="{py(pt.imag):.3f}" r="{MARKER_RADIUS}" '
                     'fill="#c23b3b" fill-opacity="0.85"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_constellation_svg(constellation: Constellation, p_a: float, path,
                            title: str | None = None) -> None:
    svg = render_constellation_svg(constellation, p_a, title=title)
    with open(path, "w") as fh:
        fh.write(svg)
