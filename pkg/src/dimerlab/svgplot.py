"""Minimal hand-rolled SVG output: polylines and marching-squares contours.

No plotting dependency; documents are deterministic strings (fixed float
formatting, no timestamps) so emitted files are reproducible byte-for-byte.
"""

from __future__ import annotations

import numpy as np

_W, _H = 640.0, 480.0
_MARGIN = 50.0


def _fmt(x: float) -> str:
    return f"{x:.3f}"


class Frame:
    """Maps data coordinates into the fixed SVG viewport (y axis flipped)."""

    def __init__(self, x_min, x_max, y_min, y_max):
        self.x_min, self.x_max = float(x_min), float(x_max)
        self.y_min, self.y_max = float(y_min), float(y_max)
        self._sx = (_W - 2 * _MARGIN) / (self.x_max - self.x_min or 1.0)
        self._sy = (_H - 2 * _MARGIN) / (self.y_max - self.y_min or 1.0)

    def px(self, x: float) -> float:
        return _MARGIN + (x - self.x_min) * self._sx

    def py(self, y: float) -> float:
        return _H - _MARGIN - (y - self.y_min) * self._sy


def polyline(frame: Frame, xs, ys, stroke: str, dashed: bool = False, width: float = 1.5) -> str:
    pts = " ".join(f"{_fmt(frame.px(x))},{_fmt(frame.py(y))}" for x, y in zip(xs, ys))
    dash = ' stroke-dasharray="6,4"' if dashed else ""
    return (f'<polyline fill="none" stroke="{stroke}" stroke-width="{width:g}"{dash} '
            f'points="{pts}"/>')


def circle(frame: Frame, x, y, r: float, fill: str) -> str:
    return (f'<circle cx="{_fmt(frame.px(x))}" cy="{_fmt(frame.py(y))}" r="{r:g}" '
            f'fill="{fill}"/>')


def cross(frame: Frame, x, y, r: float, stroke: str) -> str:
    cx, cy = frame.px(x), frame.py(y)
    return (f'<path stroke="{stroke}" stroke-width="1.5" d="'
            f'M {_fmt(cx - r)} {_fmt(cy - r)} L {_fmt(cx + r)} {_fmt(cy + r)} '
            f'M {_fmt(cx - r)} {_fmt(cy + r)} L {_fmt(cx + r)} {_fmt(cy - r)}"/>')


def segments_path(frame: Frame, segments, stroke: str, width: float = 1.0) -> str:
    parts = []
    for (x1, y1), (x2, y2) in segments:
        parts.append(f"M {_fmt(frame.px(x1))} {_fmt(frame.py(y1))} "
                     f"L {_fmt(frame.px(x2))} {_fmt(frame.py(y2))}")
    return f'<path fill="none" stroke="{stroke}" stroke-width="{width:g}" d="{" ".join(parts)}"/>'


def document(elements: list[str], title: str, x_label: str, y_label: str) -> str:
    body = "\n".join(elements)
    return f"""<svg xmlns="http://www.w3.org/2000/svg" width="{_W:g}" height="{_H:g}" viewBox="0 0 {_W:g} {_H:g}">
<rect width="{_W:g}" height="{_H:g}" fill="white"/>
<text x="{_W / 2:g}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{title}</text>
<text x="{_W / 2:g}" y="{_H - 12:g}" text-anchor="middle" font-family="sans-serif" font-size="13">{x_label}</text>
<text x="16" y="{_H / 2:g}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {_H / 2:g})">{y_label}</text>
<rect x="{_MARGIN:g}" y="{_MARGIN:g}" width="{_W - 2 * _MARGIN:g}" height="{_H - 2 * _MARGIN:g}" fill="none" stroke="black" stroke-width="1"/>
{body}
</svg>
"""


def _interp(p1, p2, v1, v2, level):
    t = 0.5 if v2 == v1 else (level - v1) / (v2 - v1)
    return (p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1]))


def marching_squares(x: np.ndarray, y: np.ndarray, values: np.ndarray, level: float):
    """Level-set segments of values[i, j] sampled at (y_i, x_j), as data coords.

    Returns a list of ((x1, y1), (x2, y2)) segments in row-major cell order.
    Saddle-ambiguous cells are resolved by the cell-center average.
    """
    above = values > level
    # cells with at least one corner on each side of the level
    a00 = above[:-1, :-1]
    a01 = above[:-1, 1:]
    a11 = above[1:, 1:]
    a10 = above[1:, :-1]
    count = a00.astype(np.int8) + a01 + a11 + a10
    cells = np.argwhere((count > 0) & (count < 4))
    segments = []
    for i, j in cells:
        va, vb = values[i, j], values[i, j + 1]
        vc, vd = values[i + 1, j + 1], values[i + 1, j]
        pa, pb = (x[j], y[i]), (x[j + 1], y[i])
        pc, pd = (x[j + 1], y[i + 1]), (x[j], y[i + 1])
        code = ((1 if va > level else 0) | (2 if vb > level else 0)
                | (4 if vc > level else 0) | (8 if vd > level else 0))
        ab = lambda: _interp(pa, pb, va, vb, level)
        bc = lambda: _interp(pb, pc, vb, vc, level)
        cd = lambda: _interp(pc, pd, vc, vd, level)
        da = lambda: _interp(pd, pa, vd, va, level)
        if code in (1, 14):
            segments.append((da(), ab()))
        elif code in (2, 13):
            segments.append((ab(), bc()))
        elif code in (3, 12):
            segments.append((da(), bc()))
        elif code in (4, 11):
            segments.append((bc(), cd()))
        elif code in (6, 9):
            segments.append((ab(), cd()))
        elif code in (7, 8):
            segments.append((cd(), da()))
        elif code in (5, 10):
            center_above = 0.25 * (va + vb + vc + vd) > level
            same_as_a = (code == 5) == center_above
            if same_as_a:
                segments.append((da(), cd()))
                segments.append((ab(), bc()))
            else:
                segments.append((da(), ab()))
                segments.append((bc(), cd()))
    return segments
