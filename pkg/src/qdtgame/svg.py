"""Minimal line and bar charts rendered as standalone SVG text."""

from __future__ import annotations

from html import escape
from typing import Sequence

WIDTH, HEIGHT = 800, 400
MARGIN = 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e")


def _bounds(values: Sequence[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    return lo, hi


class _Frame:
    def __init__(self, n: int, lo: float, hi: float):
        self.n, self.lo, self.hi = max(n, 2), lo, hi

    def x(self, i: float) -> float:
        return MARGIN + (WIDTH - 2 * MARGIN) * i / (self.n - 1)

    def y(self, v: float) -> float:
        return HEIGHT - MARGIN - (HEIGHT - 2 * MARGIN) * (v - self.lo) / (self.hi - self.lo)


def _document(title: str, body: list[str], lo: float, hi: float) -> str:
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{escape(title)}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" '
        'stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{MARGIN - 5}" y="{HEIGHT - MARGIN}" text-anchor="end" font-family="sans-serif" '
        f'font-size="10">{lo:g}</text>',
        f'<text x="{MARGIN - 5}" y="{MARGIN + 4}" text-anchor="end" font-family="sans-serif" '
        f'font-size="10">{hi:g}</text>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def line_chart(series: dict[str, Sequence[float]], title: str = "") -> str:
    """Overlay one polyline per named series on a shared axis."""
    if not series:
        raise ValueError("need at least one series")
    every = [v for s in series.values() for v in s]
    lo, hi = _bounds(every)
    frame = _Frame(max(len(s) for s in series.values()), lo, hi)
    body = []
    for i, (name, values) in enumerate(series.items()):
        color = COLORS[i % len(COLORS)]
        points = " ".join(f"{frame.x(j):.2f},{frame.y(v):.2f}" for j, v in enumerate(values))
        body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{points}"/>')
        body.append(
            f'<text x="{WIDTH - MARGIN}" y="{MARGIN + 14 * i}" text-anchor="end" fill="{color}" '
            f'font-family="sans-serif" font-size="12">{escape(name)}</text>'
        )
    return _document(title, body, lo, hi)


def bar_chart(values: Sequence[float], title: str = "", mean_line: float | None = None) -> str:
    if not values:
        raise ValueError("need at least one value")
    lo, hi = _bounds(list(values) + ([mean_line] if mean_line is not None else []))
    pad = 0.1 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    frame = _Frame(len(values) + 1, lo, hi)
    bar_w = (WIDTH - 2 * MARGIN) / (len(values) + 1) * 0.8
    body = []
    for i, v in enumerate(values):
        top = frame.y(v)
        body.append(
            f'<rect x="{frame.x(i + 0.5) - bar_w / 2:.2f}" y="{top:.2f}" width="{bar_w:.2f}" '
            f'height="{HEIGHT - MARGIN - top:.2f}" fill="{COLORS[0]}"/>'
        )
    if mean_line is not None:
        y = frame.y(mean_line)
        body.append(
            f'<line x1="{MARGIN}" y1="{y:.2f}" x2="{WIDTH - MARGIN}" y2="{y:.2f}" '
            f'stroke="{COLORS[1]}" stroke-dasharray="4"/>'
        )
    return _document(title, body, lo, hi)
