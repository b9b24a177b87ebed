"""Static SVG figure of a curve, a codebook and its Voronoi switch points."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .codebook import Codebook
from .curve import CurveDistribution
from .solver import switch_points

SIZE = 480
MARGIN = 24
SAMPLES = 2_000


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def render_svg(dist: CurveDistribution, cb: Codebook, title: str = "") -> str:
    """Curve as a polyline, codebook points as dots, switch points as short ticks."""
    curve = dist.curve
    s = np.linspace(0.0, curve.total_length, SAMPLES)
    # make sure corners are hit exactly
    s = np.unique(np.concatenate([s, curve.cumulative_lengths[:-1]]))
    path = curve.point_at(s)
    ticks_s = switch_points(dist, cb) if cb.n > 1 else np.empty(0)
    ticks = curve.point_at(ticks_s) if len(ticks_s) else np.empty((0, 2))
    idx, u = curve.locate(ticks_s) if len(ticks_s) else (np.empty(0, int), np.empty(0))
    tangents = curve.tangents(idx, u) if len(ticks_s) else np.empty((0, 2))

    everything = np.vstack([path, cb.points])
    lo, hi = everything.min(axis=0), everything.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    scale = (SIZE - 2 * MARGIN) / span

    def xy(p):
        # flip y so the figure is drawn with the usual orientation
        return MARGIN + (p[0] - lo[0]) * scale, SIZE - MARGIN - (p[1] - lo[1]) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    if title:
        out.append(f'<title>{title}</title>')
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in map(xy, path))
    out.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
    half = 6.0 / scale
    for p, t in zip(ticks, tangents):
        normal = np.array([-t[1], t[0]])
        (x0, y0), (x1, y1) = xy(p - half * normal), xy(p + half * normal)
        out.append(
            f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" stroke="red" stroke-width="1.5"/>'
        )
    for p in cb.points:
        x, y = xy(p)
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3.5" fill="blue"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path: str | Path, dist: CurveDistribution, cb: Codebook, title: str = "") -> None:
    Path(path).write_text(render_svg(dist, cb, title))
