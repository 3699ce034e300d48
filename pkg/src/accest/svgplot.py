"""Deterministic SVG scatter plots of accuracy against an estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from html import escape

WIDTH, HEIGHT = 800, 600
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 80, 160, 40, 70

# Colour cycle for synthetic groups, assigned in sorted group order.
PALETTE = ("#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2",
           "#17becf", "#bcbd22", "#7f7f7f", "#ff7f0e", "#aec7e8")
REAL_COLOUR = "#d62728"


def _f(x: float) -> str:
    return f"{x:.2f}"


@dataclass(frozen=True)
class Point:
    x: float
    y: float
    group: str
    label: str
    real: bool = False


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def scatter_svg(points: list[Point], x_caption: str, y_caption: str,
                line: tuple[float, float] | None = None, title: str = "",
                x_ticks: list[tuple[float, str]] | None = None,
                y_ticks: list[tuple[float, str]] | None = None) -> str:
    """Render a scatter plot as an SVG document string.

    Synthetic points are circles coloured by group; real points are red
    crosses labelled by name. ``line`` is ``(slope, intercept)`` in plot
    coordinates and is drawn only across the x-range of the data. Custom
    ticks are ``(position, label)`` pairs in plot coordinates.
    """
    if not points:
        raise ValueError("nothing to plot")
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_vals = list(ys)
    if line is not None:
        y_vals += [line[0] * x_lo + line[1], line[0] * x_hi + line[1]]
    y_lo, y_hi = min(y_vals), max(y_vals)
    pad_x = 0.05 * (x_hi - x_lo) or 0.5
    pad_y = 0.05 * (y_hi - y_lo) or 0.5
    vx0, vx1, vy0, vy1 = x_lo - pad_x, x_hi + pad_x, y_lo - pad_y, y_hi + pad_y
    pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(x: float) -> float:
        return MARGIN_LEFT + (x - vx0) / (vx1 - vx0) * pw

    def sy(y: float) -> float:
        return MARGIN_TOP + (vy1 - y) / (vy1 - vy0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="22" text-anchor="middle" '
                   f'font-size="15">{escape(title)}</text>')
    x0, y0 = MARGIN_LEFT, MARGIN_TOP + ph
    out.append(f'<rect x="{x0}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" '
               f'fill="none" stroke="black"/>')

    if x_ticks is None:
        x_ticks = [(t, f"{t:g}") for t in _nice_ticks(vx0, vx1)]
    if y_ticks is None:
        y_ticks = [(t, f"{t:g}") for t in _nice_ticks(vy0, vy1)]
    for pos, text in x_ticks:
        if vx0 <= pos <= vx1:
            px = sx(pos)
            out.append(f'<line x1="{_f(px)}" y1="{y0}" x2="{_f(px)}" y2="{y0 + 5}" stroke="black"/>')
            out.append(f'<text x="{_f(px)}" y="{y0 + 18}" text-anchor="middle">{escape(text)}</text>')
    for pos, text in y_ticks:
        if vy0 <= pos <= vy1:
            py = sy(pos)
            out.append(f'<line x1="{x0 - 5}" y1="{_f(py)}" x2="{x0}" y2="{_f(py)}" stroke="black"/>')
            out.append(f'<text x="{x0 - 8}" y="{_f(py + 4)}" text-anchor="end">{escape(text)}</text>')
    out.append(f'<text x="{_f(MARGIN_LEFT + pw / 2)}" y="{HEIGHT - 25}" '
               f'text-anchor="middle" font-size="14">{escape(x_caption)}</text>')
    out.append(f'<text x="20" y="{_f(MARGIN_TOP + ph / 2)}" text-anchor="middle" font-size="14" '
               f'transform="rotate(-90 20 {_f(MARGIN_TOP + ph / 2)})">{escape(y_caption)}</text>')

    if line is not None:
        a, b = line
        out.append(f'<line x1="{_f(sx(x_lo))}" y1="{_f(sy(a * x_lo + b))}" '
                   f'x2="{_f(sx(x_hi))}" y2="{_f(sy(a * x_hi + b))}" '
                   f'stroke="black" stroke-width="1.5"/>')

    groups = sorted({p.group for p in points if not p.real})
    colour = {g: PALETTE[i % len(PALETTE)] for i, g in enumerate(groups)}
    for p in points:
        if not p.real:
            out.append(f'<circle cx="{_f(sx(p.x))}" cy="{_f(sy(p.y))}" r="4" '
                       f'fill="{colour[p.group]}" fill-opacity="0.8"><title>{escape(p.label)}</title></circle>')
    for p in points:
        if p.real:
            cx, cy = sx(p.x), sy(p.y)
            out.append(f'<path d="M{_f(cx - 6)},{_f(cy - 6)} L{_f(cx + 6)},{_f(cy + 6)} '
                       f'M{_f(cx - 6)},{_f(cy + 6)} L{_f(cx + 6)},{_f(cy - 6)}" '
                       f'stroke="{REAL_COLOUR}" stroke-width="2.5"/>')
            out.append(f'<text x="{_f(cx + 9)}" y="{_f(cy - 6)}" fill="{REAL_COLOUR}">{escape(p.label)}</text>')

    # Legend.
    lx, ly = WIDTH - MARGIN_RIGHT + 15, MARGIN_TOP + 10
    for i, g in enumerate(groups):
        y = ly + 18 * i
        out.append(f'<circle cx="{lx}" cy="{y}" r="4" fill="{colour[g]}"/>')
        out.append(f'<text x="{lx + 10}" y="{y + 4}">{escape(g)}</text>')
    if any(p.real for p in points):
        y = ly + 18 * len(groups)
        out.append(f'<path d="M{lx - 5},{y - 5} L{lx + 5},{y + 5} M{lx - 5},{y + 5} L{lx + 5},{y - 5}" '
                   f'stroke="{REAL_COLOUR}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 10}" y="{y + 4}">real</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
