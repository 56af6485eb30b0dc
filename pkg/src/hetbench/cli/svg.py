"""Small dependency-free SVG plots.

Output is a pure function of the inputs (fixed number formatting, no
timestamps or random ids), so identical data gives identical files.
"""
from __future__ import annotations

from html import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
           "#7f7f7f", "#bcbd22")
W, H = 480, 360
LEFT, RIGHT, TOP, BOTTOM = 62, 130, 34, 48


def _n(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = np.ceil(lo / step) * step
    return np.arange(start, hi + 0.5 * step, step)


def _range(values, pad: float = 0.05) -> tuple[float, float]:
    v = np.asarray(values, float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str, xr, yr):
        self.x0, self.x1 = xr
        self.y0, self.y1 = yr
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
            'font-family="sans-serif" font-size="11">',
            f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
            f'<text x="{_n(W / 2)}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
        ]
        self._axes(xlabel, ylabel)

    def sx(self, x):
        return LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)

    def sy(self, y):
        return H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)

    def _axes(self, xlabel, ylabel):
        p = self.parts
        p.append(f'<rect x="{LEFT}" y="{TOP}" width="{W - LEFT - RIGHT}" height="{H - TOP - BOTTOM}" '
                 'fill="none" stroke="black"/>')
        for t in _ticks(self.x0, self.x1):
            x = self.sx(t)
            p.append(f'<line x1="{_n(x)}" y1="{H - BOTTOM}" x2="{_n(x)}" y2="{H - BOTTOM + 4}" stroke="black"/>')
            p.append(f'<text x="{_n(x)}" y="{H - BOTTOM + 16}" text-anchor="middle">{t:.3g}</text>')
        for t in _ticks(self.y0, self.y1):
            y = self.sy(t)
            p.append(f'<line x1="{LEFT - 4}" y1="{_n(y)}" x2="{LEFT}" y2="{_n(y)}" stroke="black"/>')
            p.append(f'<text x="{LEFT - 7}" y="{_n(y + 4)}" text-anchor="end">{t:.3g}</text>')
        p.append(f'<text x="{_n(LEFT + (W - LEFT - RIGHT) / 2)}" y="{H - 10}" text-anchor="middle">'
                 f'{escape(xlabel)}</text>')
        cy = TOP + (H - TOP - BOTTOM) / 2
        p.append(f'<text x="14" y="{_n(cy)}" text-anchor="middle" transform="rotate(-90 14 {_n(cy)})">'
                 f'{escape(ylabel)}</text>')

    def legend(self, names):
        for i, name in enumerate(names):
            y = TOP + 8 + 16 * i
            x = W - RIGHT + 10
            c = PALETTE[i % len(PALETTE)]
            self.parts.append(f'<rect x="{x}" y="{y - 8}" width="10" height="10" fill="{c}"/>')
            self.parts.append(f'<text x="{x + 14}" y="{y + 1}">{escape(str(name))}</text>')

    def text(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def line_plot(series, title: str = "", xlabel: str = "", ylabel: str = "", yrange=None) -> str:
    """``series`` is a list of ``(name, x, y, yerr or None)``; error bars are
    drawn as vertical segments of +-yerr."""
    xs = np.concatenate([np.asarray(s[1], float) for s in series]) if series else np.zeros(1)
    ys = [np.asarray(s[2], float) for s in series]
    errs = [np.zeros_like(y) if s[3] is None else np.asarray(s[3], float) for s, y in zip(series, ys)]
    yr = yrange or _range(np.concatenate([np.r_[y - e, y + e] for y, e in zip(ys, errs)]) if series else [0, 1])
    c = _Canvas(title, xlabel, ylabel, _range(xs, 0.02), yr)
    for i, ((name, x, _, err), y, e) in enumerate(zip(series, ys, errs)):
        col = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_n(c.sx(a))},{_n(c.sy(b))}" for a, b in zip(np.asarray(x, float), y))
        c.parts.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        if err is not None:
            for a, b, d in zip(np.asarray(x, float), y, e):
                c.parts.append(f'<line x1="{_n(c.sx(a))}" y1="{_n(c.sy(b - d))}" x2="{_n(c.sx(a))}" '
                               f'y2="{_n(c.sy(b + d))}" stroke="{col}" stroke-width="0.8"/>')
    c.legend([s[0] for s in series])
    return c.text()


def scatter_plot(xy: np.ndarray, groups=None, title: str = "", xlabel: str = "", ylabel: str = "",
                 names=None, radius: float = 2.0) -> str:
    """Points coloured by integer ``groups`` (or one colour). ``names`` labels
    the legend entries in group order."""
    xy = np.asarray(xy, float)
    g = np.zeros(len(xy), int) if groups is None else np.asarray(groups, int)
    c = _Canvas(title, xlabel, ylabel, _range(xy[:, 0]), _range(xy[:, 1]))
    uniq = np.unique(g)
    for (a, b), k in zip(xy, g):
        col = PALETTE[int(np.searchsorted(uniq, k)) % len(PALETTE)]
        c.parts.append(f'<circle cx="{_n(c.sx(a))}" cy="{_n(c.sy(b))}" r="{radius}" fill="{col}" '
                       'fill-opacity="0.7"/>')
    if names is not None:
        c.legend(list(names))
    elif groups is not None and len(uniq) <= len(PALETTE):
        c.legend([str(k) for k in uniq])
    return c.text()


def heatmap(matrix: np.ndarray, title: str = "", xlabel: str = "", ylabel: str = "",
            vmin: float | None = None, vmax: float | None = None) -> str:
    """Grey-to-blue heatmap with row 0 at the top."""
    m = np.asarray(matrix, float)
    lo = float(np.nanmin(m)) if vmin is None else vmin
    hi = float(np.nanmax(m)) if vmax is None else vmax
    span = hi - lo if hi > lo else 1.0
    rows, cols = m.shape
    c = _Canvas(title, xlabel, ylabel, (0, cols), (rows, 0))
    cw = (W - LEFT - RIGHT) / cols
    ch = (H - TOP - BOTTOM) / rows
    for i in range(rows):
        for j in range(cols):
            t = min(max((m[i, j] - lo) / span, 0.0), 1.0)
            r, g, b = (int(round(240 - t * (240 - a))) for a in (31, 119, 180))
            c.parts.append(f'<rect x="{_n(LEFT + j * cw)}" y="{_n(TOP + i * ch)}" width="{_n(cw + 0.05)}" '
                           f'height="{_n(ch + 0.05)}" fill="rgb({r},{g},{b})"/>')
    x = W - RIGHT + 16
    c.parts.append(f'<text x="{x}" y="{TOP + 8}">max {hi:.4g}</text>')
    c.parts.append(f'<text x="{x}" y="{TOP + 24}">min {lo:.4g}</text>')
    return c.text()
