"""Hand-written SVG 1.1 plots of splinter trajectories.

Coordinates are rounded to a fixed number of decimals so output is stable
byte for byte for a given input.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

__all__ = ["PALETTE", "render_halfplane", "render_disk", "mass_label"]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def mass_label(mass: float) -> str:
    return str(Fraction(mass).limit_denominator(2 ** 62))


def _polyline(pts: np.ndarray, color: str) -> str:
    body = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
    return f'<polyline points="{body}" stroke="{color}"/>'


def _document(width, height, parts, title):
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<title>{title}</title>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    return "\n".join(head + parts + ["</svg>"]) + "\n"


def _curves(screen_paths, masses, labels):
    parts = ['<g fill="none" stroke-width="1.2" stroke-linejoin="round">']
    for k, pts in enumerate(screen_paths):
        parts.append(_polyline(pts, PALETTE[k % len(PALETTE)]))
    parts.append("</g>")
    if labels and masses is not None:
        parts.append('<g font-family="sans-serif" font-size="10" fill="black">')
        for pts, m in zip(screen_paths, masses):
            x, y = pts[-1]
            parts.append(f'<text x="{_fmt(x + 3)}" y="{_fmt(y - 3)}">{mass_label(m)}</text>')
        parts.append("</g>")
    return parts


def render_halfplane(paths, masses=None, labels=False, width=640, height=400, margin=20,
                     y_max=None, title="half-plane trajectories") -> str:
    """Polylines in the upper half-plane, boundary y = 0 drawn as a line.

    The window is fitted to the data with equal x and y scales; points above
    ``y_max`` (default: data maximum) are clipped by the plot area.
    """
    allpts = np.vstack(paths)
    xmin, xmax = float(allpts[:, 0].min()), float(allpts[:, 0].max())
    top = float(allpts[:, 1].max()) if y_max is None else float(y_max)
    xspan = max(xmax - xmin, 1e-9)
    scale = min((width - 2 * margin) / xspan, (height - 2 * margin) / max(top, 1e-9))
    x_off = margin + 0.5 * ((width - 2 * margin) - scale * xspan)
    base = height - margin

    def screen(p):
        return np.column_stack([x_off + scale * (p[:, 0] - xmin), base - scale * p[:, 1]])

    parts = [
        f'<clipPath id="window"><rect x="0" y="{_fmt(base - scale * top)}" width="{width}" '
        f'height="{_fmt(scale * top)}"/></clipPath>',
        f'<line x1="0" y1="{_fmt(base)}" x2="{width}" y2="{_fmt(base)}" stroke="black" stroke-width="1"/>',
        '<g clip-path="url(#window)">',
    ]
    parts += _curves([screen(p) for p in paths], masses, labels)
    parts.append("</g>")
    return _document(width, height, parts, title)


def render_disk(paths, masses=None, labels=False, size=480, margin=20, title="disk trajectories") -> str:
    """Polylines in the unit disk with its boundary circle."""
    r = 0.5 * size - margin
    cx = cy = 0.5 * size

    def screen(p):
        return np.column_stack([cx + r * p[:, 0], cy - r * p[:, 1]])

    parts = [f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}" fill="none" stroke="black" stroke-width="1"/>']
    parts += _curves([screen(p) for p in paths], masses, labels)
    return _document(size, size, parts, title)
