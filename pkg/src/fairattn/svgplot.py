"""Self-contained SVG charts.

Charts are rendered directly as SVG text with deterministic number
formatting, so identical inputs produce byte-identical files. The CSV a
chart was rendered from is always the authoritative data source.
"""
from __future__ import annotations

from dataclasses import dataclass

WIDTH, HEIGHT = 640, 480
MARGIN = {"left": 72, "right": 24, "top": 40, "bottom": 52}
POINT_COLOR = "#1f77b4"
HIGHLIGHT_COLOR = "#d62728"
BAND_COLOR = "#1f77b4"


@dataclass(frozen=True)
class LabeledPoint:
    x: float
    y: float
    label: str
    highlight: bool = False


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _scale(values: list[float], lo_px: float, hi_px: float):
    vmin, vmax = min(values), max(values)
    if vmax == vmin:
        vmin -= 0.5
        vmax += 0.5
    pad = 0.06 * (vmax - vmin)
    vmin, vmax = vmin - pad, vmax + pad

    def to_px(v: float) -> float:
        return lo_px + (v - vmin) / (vmax - vmin) * (hi_px - lo_px)

    return to_px, vmin, vmax


def _ticks(vmin: float, vmax: float, n: int = 5) -> list[float]:
    step = (vmax - vmin) / (n - 1)
    return [vmin + i * step for i in range(n)]


def _axes(parts: list[str], x_to, y_to, xmin, xmax, ymin, ymax,
          title: str, xlabel: str, ylabel: str) -> None:
    left, bottom = MARGIN["left"], HEIGHT - MARGIN["bottom"]
    right, top = WIDTH - MARGIN["right"], MARGIN["top"]
    parts.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    parts.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>')
    parts.append(f'<line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}" stroke="black"/>')
    for tv in _ticks(xmin, xmax):
        px = x_to(tv)
        parts.append(f'<line x1="{_fmt(px)}" y1="{bottom}" x2="{_fmt(px)}" y2="{bottom + 5}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{bottom + 18}" font-size="11" text-anchor="middle">{_fmt(tv)}</text>')
    for tv in _ticks(ymin, ymax):
        py = y_to(tv)
        parts.append(f'<line x1="{left - 5}" y1="{_fmt(py)}" x2="{left}" y2="{_fmt(py)}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{_fmt(py + 4)}" font-size="11" text-anchor="end">{_fmt(tv)}</text>')
    parts.append(f'<text x="{(left + right) / 2}" y="{bottom + 38}" font-size="13" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="18" y="{(top + bottom) / 2}" font-size="13" text-anchor="middle" '
                 f'transform="rotate(-90 18 {(top + bottom) / 2})">{ylabel}</text>')
    parts.append(f'<text x="{WIDTH / 2}" y="24" font-size="15" text-anchor="middle">{title}</text>')


def scatter_svg(points: list[LabeledPoint], title: str, xlabel: str, ylabel: str) -> str:
    """Labeled scatter chart; highlighted points are drawn in red."""
    if not points:
        raise ValueError("no points to plot")
    left, bottom = MARGIN["left"], HEIGHT - MARGIN["bottom"]
    right, top = WIDTH - MARGIN["right"], MARGIN["top"]
    x_to, xmin, xmax = _scale([p.x for p in points], left, right)
    y_to, ymin, ymax = _scale([p.y for p in points], bottom, top)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">']
    _axes(parts, x_to, y_to, xmin, xmax, ymin, ymax, title, xlabel, ylabel)
    for p in points:
        px, py = x_to(p.x), y_to(p.y)
        color = HIGHLIGHT_COLOR if p.highlight else POINT_COLOR
        parts.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="4" fill="{color}"/>')
        parts.append(f'<text x="{_fmt(px + 6)}" y="{_fmt(py - 6)}" font-size="11">{p.label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def curve_svg(xs: list[float], ys: list[float], y_stds: list[float],
              labels: list[str], title: str, xlabel: str, ylabel: str) -> str:
    """Connected mean line with a +/- one-std band on the y values."""
    if not xs:
        raise ValueError("no points to plot")
    left, bottom = MARGIN["left"], HEIGHT - MARGIN["bottom"]
    right, top = WIDTH - MARGIN["right"], MARGIN["top"]
    y_lo = [y - s for y, s in zip(ys, y_stds)]
    y_hi = [y + s for y, s in zip(ys, y_stds)]
    x_to, xmin, xmax = _scale(xs, left, right)
    y_to, ymin, ymax = _scale(y_lo + y_hi, bottom, top)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">']
    _axes(parts, x_to, y_to, xmin, xmax, ymin, ymax, title, xlabel, ylabel)
    if len(xs) > 1:
        band = [f"{_fmt(x_to(x))},{_fmt(y_to(y))}" for x, y in zip(xs, y_hi)]
        band += [f"{_fmt(x_to(x))},{_fmt(y_to(y))}" for x, y in zip(reversed(xs), reversed(y_lo))]
        parts.append(f'<polygon points="{" ".join(band)}" fill="{BAND_COLOR}" fill-opacity="0.15" stroke="none"/>')
        line = " ".join(f"{_fmt(x_to(x))},{_fmt(y_to(y))}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{line}" fill="none" stroke="{POINT_COLOR}" stroke-width="1.5"/>')
    for x, y, label in zip(xs, ys, labels):
        px, py = x_to(x), y_to(y)
        parts.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="3" fill="{POINT_COLOR}"/>')
        if label:
            parts.append(f'<text x="{_fmt(px + 5)}" y="{_fmt(py - 5)}" font-size="10">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
