"""Minimal SVG writer for atlas and phase-portrait figures.

Deterministic output: fixed float formatting, no timestamps.
"""
from __future__ import annotations

__all__ = ["SvgCanvas"]


def _f(v: float) -> str:
    return f"{v:.6g}"


class SvgCanvas:
    """Maps a data window (x_lo..x_hi, y_lo..y_hi) onto a pixel canvas."""

    def __init__(self, window, width: int = 640, height: int = 640,
                 margin: int = 48):
        self.x_lo, self.x_hi, self.y_lo, self.y_hi = map(float, window)
        self.width = width
        self.height = height
        self.margin = margin
        self._body: list[str] = []

    def px(self, x: float) -> float:
        span = self.x_hi - self.x_lo or 1.0
        return self.margin + (x - self.x_lo) / span * (self.width - 2 * self.margin)

    def py(self, y: float) -> float:
        span = self.y_hi - self.y_lo or 1.0
        return (self.height - self.margin
                - (y - self.y_lo) / span * (self.height - 2 * self.margin))

    def rect(self, x: float, y: float, w: float, h: float, color: str):
        x0, y0 = self.px(x), self.py(y + h)
        x1, y1 = self.px(x + w), self.py(y)
        self._body.append(
            f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(x1 - x0)}" '
            f'height="{_f(y1 - y0)}" fill="{color}" stroke="none"/>')

    def polyline(self, points, color: str = "#000000", width: float = 1.2,
                 dashed: bool = False):
        if len(points) < 2:
            return
        pts = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in points)
        dash = ' stroke-dasharray="4 3"' if dashed else ""
        self._body.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{_f(width)}"{dash}/>')

    def circle(self, x: float, y: float, r_px: float, fill: str,
               stroke: str = "#000000"):
        self._body.append(
            f'<circle cx="{_f(self.px(x))}" cy="{_f(self.py(y))}" '
            f'r="{_f(r_px)}" fill="{fill}" stroke="{stroke}"/>')

    def text(self, x_px: float, y_px: float, s: str, size: int = 12):
        self._body.append(
            f'<text x="{_f(x_px)}" y="{_f(y_px)}" font-size="{size}" '
            f'font-family="sans-serif">{s}</text>')

    def axes(self, x_label: str, y_label: str):
        m, w, h = self.margin, self.width, self.height
        self._body.append(
            f'<rect x="{m}" y="{m}" width="{w - 2 * m}" height="{h - 2 * m}" '
            f'fill="none" stroke="#333333"/>')
        self.text(w // 2, h - 8, x_label)
        self.text(8, h // 2, y_label)
        self.text(m, h - m + 14, _f(self.x_lo))
        self.text(w - m - 30, h - m + 14, _f(self.x_hi))
        self.text(4, h - m, _f(self.y_lo))
        self.text(4, m + 6, _f(self.y_hi))

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
                f'width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">\n'
                f'<rect width="{self.width}" height="{self.height}" '
                f'fill="#ffffff"/>\n')
        return head + "\n".join(self._body) + "\n</svg>\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())
