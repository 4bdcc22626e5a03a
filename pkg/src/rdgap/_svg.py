"""Minimal deterministic SVG line plots.

Self-contained XML, fixed canvas, coordinates rounded to three decimals so a
given data set always serializes to identical bytes on every platform.
"""

from __future__ import annotations

from collections.abc import Sequence

_WIDTH = 640.0
_HEIGHT = 440.0
_LEFT, _RIGHT, _TOP, _BOTTOM = 70.0, 24.0, 40.0, 52.0
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
_TICKS = 5


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _tick_label(x: float) -> str:
    return f"{x:.4g}"


def _span(values: Sequence[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def line_plot(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str,
    xlabel: str,
    ylabel: str,
) -> str:
    """Render labeled (xs, ys) polylines with axes, ticks, and a legend."""
    if not series:
        raise ValueError("need at least one series")
    for _, xs, ys in series:
        if len(xs) != len(ys) or not xs:
            raise ValueError("each series needs equal-length nonempty xs and ys")
    xlo, xhi = _span([x for _, xs, _ in series for x in xs])
    ylo, yhi = _span([y for _, _, ys in series for y in ys])
    px0, px1 = _LEFT, _WIDTH - _RIGHT
    py0, py1 = _HEIGHT - _BOTTOM, _TOP

    def sx(x: float) -> float:
        return px0 + (x - xlo) / (xhi - xlo) * (px1 - px0)

    def sy(y: float) -> float:
        return py0 + (y - ylo) / (yhi - ylo) * (py1 - py0)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH:.0f}" '
        f'height="{_HEIGHT:.0f}" viewBox="0 0 {_WIDTH:.0f} {_HEIGHT:.0f}">',
        f'<rect width="{_WIDTH:.0f}" height="{_HEIGHT:.0f}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.0f}" y="24" font-family="sans-serif" font-size="15" '
        f'text-anchor="middle">{_escape(title)}</text>',
    ]
    for i in range(_TICKS):
        f = i / (_TICKS - 1)
        xv = xlo + f * (xhi - xlo)
        yv = ylo + f * (yhi - ylo)
        xp, yp = sx(xv), sy(yv)
        parts.append(
            f'<line x1="{_fmt(xp)}" y1="{_fmt(py0)}" x2="{_fmt(xp)}" y2="{_fmt(py1)}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<line x1="{_fmt(px0)}" y1="{_fmt(yp)}" x2="{_fmt(px1)}" y2="{_fmt(yp)}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(xp)}" y="{_fmt(py0 + 18)}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle">{_tick_label(xv)}</text>'
        )
        parts.append(
            f'<text x="{_fmt(px0 - 8)}" y="{_fmt(yp + 4)}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end">{_tick_label(yv)}</text>'
        )
    parts.append(
        f'<rect x="{_fmt(px0)}" y="{_fmt(py1)}" width="{_fmt(px1 - px0)}" '
        f'height="{_fmt(py0 - py1)}" fill="none" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{(px0 + px1) / 2:.0f}" y="{_HEIGHT - 10:.0f}" font-family="sans-serif" '
        f'font-size="13" text-anchor="middle">{_escape(xlabel)}</text>'
    )
    parts.append(
        f'<text x="18" y="{(py0 + py1) / 2:.0f}" font-family="sans-serif" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 18 {(py0 + py1) / 2:.0f})">'
        f"{_escape(ylabel)}</text>"
    )
    for idx, (label, xs, ys) in enumerate(series):
        color = _COLORS[idx % len(_COLORS)]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = py1 + 16 + 18 * idx
        parts.append(
            f'<line x1="{_fmt(px1 - 150)}" y1="{_fmt(ly)}" x2="{_fmt(px1 - 126)}" '
            f'y2="{_fmt(ly)}" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_fmt(px1 - 120)}" y="{_fmt(ly + 4)}" font-family="sans-serif" '
            f'font-size="12">{_escape(label)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )
