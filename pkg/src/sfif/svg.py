"""Static SVG line plots, written by hand so there is no plotting dependency."""

from __future__ import annotations

import numpy as np

WIDTH, HEIGHT = 800, 600
MARGIN = 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, count: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, count)


def polyline_svg(series, title: str = "", max_points: int = 4000) -> str:
    """Render ``[(label, x, y), ...]`` as polylines over shared axes.

    Long series are thinned by keeping the min and max of each pixel column,
    which preserves the visual envelope of a rough curve.
    """
    xs = np.concatenate([np.asarray(s[1], float) for s in series])
    ys = np.concatenate([np.asarray(s[2], float) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y0 + 0.5
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(x):
        return MARGIN + (np.asarray(x) - x0) / (x1 - x0) * pw

    def py(y):
        return HEIGHT - MARGIN - (np.asarray(y) - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        X = float(px(t))
        out.append(f'<line x1="{X:.1f}" y1="{HEIGHT - MARGIN}" x2="{X:.1f}" y2="{HEIGHT - MARGIN + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.1f}" y="{HEIGHT - MARGIN + 20}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        Y = float(py(t))
        out.append(f'<line x1="{MARGIN - 5}" y1="{Y:.1f}" x2="{MARGIN}" y2="{Y:.1f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN - 8}" y="{Y + 4:.1f}" text-anchor="end">{t:.4g}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="16">{title}</text>')

    for i, (label, x, y) in enumerate(series):
        x, y = _thin(np.asarray(x, float), np.asarray(y, float), max_points)
        pts = " ".join(f"{u:.2f},{v:.2f}" for u, v in zip(px(x), py(y)))
        color = COLORS[i % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
        if label:
            ly = MARGIN + 16 * i
            out.append(f'<text x="{WIDTH - MARGIN - 4}" y="{ly}" text-anchor="end" fill="{color}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _thin(x: np.ndarray, y: np.ndarray, max_points: int) -> tuple[np.ndarray, np.ndarray]:
    if x.size <= max_points:
        return x, y
    cols = max_points // 2
    edges = np.linspace(0, x.size, cols + 1).astype(int)
    keep = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        seg = y[lo:hi]
        i, j = lo + int(seg.argmin()), lo + int(seg.argmax())
        keep.extend(sorted((i, j)))
    keep = np.unique(np.concatenate(([0], keep, [x.size - 1])))
    return x[keep], y[keep]


def write_svg(path, series, title: str = "") -> None:
    with open(path, "w") as fh:
        fh.write(polyline_svg(series, title))
