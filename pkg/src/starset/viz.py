"""Marching-squares contour extraction and minimal SVG emission.

Purely a reporting concern: contours of scalar fields on a regular grid are
chained into polylines and written as SVG paths.  All coordinates are
formatted with 9 significant digits so identical runs produce byte-identical
files.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

# cell-edge pairs per marching-squares case index (corner order: bl, br, tr, tl)
_EDGES = {
    1: [(3, 0)],
    2: [(0, 1)],
    3: [(3, 1)],
    4: [(1, 2)],
    5: [(3, 2), (1, 0)],
    6: [(0, 2)],
    7: [(3, 2)],
    8: [(2, 3)],
    9: [(2, 0)],
    10: [(0, 3), (2, 1)],
    11: [(2, 1)],
    12: [(1, 3)],
    13: [(1, 0)],
    14: [(0, 3)],
}


def _interp(p, q, vp, vq):
    t = vp / (vp - vq) if vp != vq else 0.5
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def marching_squares(field: Callable[[np.ndarray], np.ndarray], box, res: int = 512, level: float = 0.0):
    """Polylines of {field = level} on a res x res grid over the box.

    ``field`` maps an (N, 2) array to N values.  Returns a list of (k, 2)
    arrays; closed loops repeat their first point.
    """
    (x0, x1), (y0, y1) = box
    xs = np.linspace(x0, x1, res)
    ys = np.linspace(y0, y1, res)
    XX, YY = np.meshgrid(xs, ys)
    pts = np.column_stack([XX.ravel(), YY.ravel()])
    V = (field(pts) - level).reshape(res, res)

    segments = []
    neg = V < 0
    for iy in range(res - 1):
        for ix in range(res - 1):
            corners = [(ix, iy), (ix + 1, iy), (ix + 1, iy + 1), (ix, iy + 1)]
            case = 0
            for bit, (cx, cy) in enumerate(corners):
                if neg[cy, cx]:
                    case |= 1 << bit
            if case in (0, 15):
                continue
            cpts = [(xs[cx], ys[cy]) for cx, cy in corners]
            cvals = [V[cy, cx] for cx, cy in corners]
            for e0, e1 in _EDGES[case]:
                a = _interp(cpts[e0], cpts[(e0 + 1) % 4], cvals[e0], cvals[(e0 + 1) % 4])
                b = _interp(cpts[e1], cpts[(e1 + 1) % 4], cvals[e1], cvals[(e1 + 1) % 4])
                segments.append((a, b))

    # chain segments into polylines, following either segment orientation
    def key(p):
        return (round(p[0], 9), round(p[1], 9))

    by_end: dict = {}
    for idx, (a, b) in enumerate(segments):
        by_end.setdefault(key(a), []).append(idx)
        by_end.setdefault(key(b), []).append(idx)
    used = set()
    polylines = []
    for idx, (a, b) in enumerate(segments):
        if idx in used:
            continue
        used.add(idx)
        chain = [a, b]
        for _ in range(2):  # extend forward, then from the reversed tail
            while True:
                nxt = None
                for j in by_end.get(key(chain[-1]), []):
                    if j not in used:
                        nxt = j
                        break
                if nxt is None:
                    break
                used.add(nxt)
                p, q = segments[nxt]
                chain.append(q if key(p) == key(chain[-1]) else p)
            chain.reverse()
        polylines.append(np.array(chain))
    return polylines


def _fmt(v: float) -> str:
    return f"{v:.9g}"


class SvgFigure:
    """Tiny deterministic SVG canvas in data coordinates."""

    def __init__(self, box, size: int = 640):
        (self.x0, self.x1), (self.y0, self.y1) = box
        self.size = size
        self.scale = size / max(self.x1 - self.x0, self.y1 - self.y0)
        self.elements: list[str] = []

    def _map(self, p):
        # SVG y-axis points down
        return (
            (p[0] - self.x0) * self.scale,
            (self.y1 - p[1]) * self.scale,
        )

    def polyline(self, pts, color: str, width: float = 1.5, dash: str = "") -> None:
        if len(pts) < 2:
            return
        coords = " ".join("{},{}".format(_fmt(x), _fmt(y)) for x, y in map(self._map, pts))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.elements.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{_fmt(width)}"{dash_attr}/>'
        )

    def polygon(self, pts, color: str, fill: str = "none", width: float = 1.5) -> None:
        coords = " ".join("{},{}".format(_fmt(x), _fmt(y)) for x, y in map(self._map, pts))
        self.elements.append(
            f'<polygon points="{coords}" fill="{fill}" fill-opacity="0.25" '
            f'stroke="{color}" stroke-width="{_fmt(width)}"/>'
        )

    def point(self, p, color: str, radius: float = 3.0) -> None:
        x, y = self._map(p)
        self.elements.append(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(radius)}" fill="{color}"/>'
        )

    def write(self, path: str) -> None:
        w = _fmt((self.x1 - self.x0) * self.scale)
        h = _fmt((self.y1 - self.y0) * self.scale)
        body = "\n".join(self.elements)
        with open(path, "w") as fh:
            fh.write(
                f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
                f'viewBox="0 0 {w} {h}">\n{body}\n</svg>\n'
            )
