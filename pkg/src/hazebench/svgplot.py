"""Deterministic SVG scatter plots in the rg chromaticity plane.

Output is plain text assembled in a fixed order with fixed-precision
coordinates, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError

__all__ = ["ChromaSeries", "emit_chromaticity_svg"]

# name -> (stroke/fill color, marker shape)
_STYLE_CYCLE = (
    ("#1f77b4", "circle"),
    ("#d62728", "square"),
    ("#2ca02c", "triangle"),
    ("#9467bd", "diamond"),
    ("#ff7f0e", "cross"),
    ("#8c564b", "circle"),
)

_WIDTH = 480
_HEIGHT = 480
_MARGIN = 56


@dataclass(frozen=True)
class ChromaSeries:
    """One plotted point set: (r, g) coordinates with optional labels."""

    name: str
    points: tuple[tuple[float, float], ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.labels and len(self.labels) != len(self.points):
            raise ParameterError(
                f"series {self.name!r} has {len(self.labels)} labels for {len(self.points)} points"
            )


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _to_px(r: float, g: float) -> tuple[float, float]:
    # unit square [0,1]^2 mapped into the margin box, g axis pointing up
    x = _MARGIN + r * (_WIDTH - 2 * _MARGIN)
    y = _HEIGHT - _MARGIN - g * (_HEIGHT - 2 * _MARGIN)
    return x, y


def _marker(shape: str, x: float, y: float, color: str) -> str:
    s = 4.0
    if shape == "circle":
        return f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(s)}" fill="{color}"/>'
    if shape == "square":
        return (
            f'<rect x="{_fmt(x - s)}" y="{_fmt(y - s)}" width="{_fmt(2 * s)}"'
            f' height="{_fmt(2 * s)}" fill="{color}"/>'
        )
    if shape == "triangle":
        pts = f"{_fmt(x)},{_fmt(y - s)} {_fmt(x - s)},{_fmt(y + s)} {_fmt(x + s)},{_fmt(y + s)}"
        return f'<polygon points="{pts}" fill="{color}"/>'
    if shape == "diamond":
        pts = f"{_fmt(x)},{_fmt(y - s)} {_fmt(x + s)},{_fmt(y)} {_fmt(x)},{_fmt(y + s)} {_fmt(x - s)},{_fmt(y)}"
        return f'<polygon points="{pts}" fill="{color}"/>'
    if shape == "cross":
        return (
            f'<path d="M {_fmt(x - s)} {_fmt(y - s)} L {_fmt(x + s)} {_fmt(y + s)} '
            f'M {_fmt(x - s)} {_fmt(y + s)} L {_fmt(x + s)} {_fmt(y - s)}" '
            f'stroke="{color}" stroke-width="2" fill="none"/>'
        )
    raise ParameterError(f"unknown marker shape {shape!r}")


def emit_chromaticity_svg(series, title: str = "") -> str:
    """Render point series over the r+g<=1 triangle; returns the SVG text."""
    series = list(series)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    # chromaticity triangle r >= 0, g >= 0, r + g <= 1
    corners = [_to_px(0, 0), _to_px(1, 0), _to_px(0, 1)]
    tri = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in corners)
    parts.append(f'<polygon points="{tri}" fill="none" stroke="#444444" stroke-width="1"/>')
    for frac in (0.25, 0.5, 0.75):
        x0, y0 = _to_px(frac, 0)
        x1, y1 = _to_px(frac, 1 - frac)
        parts.append(
            f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        x0, y0 = _to_px(0, frac)
        x1, y1 = _to_px(1 - frac, frac)
        parts.append(
            f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" y2="{_fmt(y1)}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
    # axis labels and tick values
    xl, yl = _to_px(0.5, 0)
    parts.append(
        f'<text x="{_fmt(xl)}" y="{_fmt(yl + 36)}" font-family="sans-serif" font-size="14" '
        f'text-anchor="middle">r</text>'
    )
    xl, yl = _to_px(0, 0.5)
    parts.append(
        f'<text x="{_fmt(xl - 36)}" y="{_fmt(yl)}" font-family="sans-serif" font-size="14" '
        f'text-anchor="middle">g</text>'
    )
    for tick in (0.0, 0.5, 1.0):
        x, y = _to_px(tick, 0)
        parts.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y + 18)}" font-family="sans-serif" font-size="11" '
            f'text-anchor="middle">{tick:.1f}</text>'
        )
        x, y = _to_px(0, tick)
        parts.append(
            f'<text x="{_fmt(x - 12)}" y="{_fmt(y + 4)}" font-family="sans-serif" font-size="11" '
            f'text-anchor="end">{tick:.1f}</text>'
        )
    if title:
        parts.append(
            f'<text x="{_WIDTH // 2}" y="24" font-family="sans-serif" font-size="15" '
            f'text-anchor="middle">{_escape(title)}</text>'
        )

    for i, s in enumerate(series):
        color, shape = _STYLE_CYCLE[i % len(_STYLE_CYCLE)]
        for j, (r, g) in enumerate(s.points):
            x, y = _to_px(r, g)
            parts.append(_marker(shape, x, y, color))
            if s.labels:
                parts.append(
                    f'<text x="{_fmt(x + 6)}" y="{_fmt(y - 6)}" font-family="sans-serif" '
                    f'font-size="9" fill="{color}">{_escape(s.labels[j])}</text>'
                )

    # legend, one row per series, top right
    for i, s in enumerate(series):
        color, shape = _STYLE_CYCLE[i % len(_STYLE_CYCLE)]
        lx = _WIDTH - _MARGIN - 120
        ly = _MARGIN + 18 * i
        parts.append(_marker(shape, lx, ly, color))
        parts.append(
            f'<text x="{_fmt(lx + 10)}" y="{_fmt(ly + 4)}" font-family="sans-serif" '
            f'font-size="12">{_escape(s.name)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
