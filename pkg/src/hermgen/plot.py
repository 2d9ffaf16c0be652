"""Minimal SVG line chart for loss curves (log-x, mean with +/-1 std band)."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
MARGIN = dict(left=70, right=20, top=30, bottom=55)
COLORS = ("#1f77b4", "#d62728")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, count: int = 5):
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-12 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def line_chart_svg(x, series, title: str = "", xlabel: str = "step", ylabel: str = "test loss") -> str:
    """Render curves sharing ``x`` (positive, log axis).

    ``series`` is a list of ``(label, mean, std)`` tuples; ``std`` may be None.
    """
    x = [float(v) for v in x]
    if not x:
        raise ValueError("nothing to plot")
    lows, highs = [], []
    for _, mean, std in series:
        sd = std if std is not None else [0.0] * len(mean)
        lows.extend(m - s for m, s in zip(mean, sd))
        highs.extend(m + s for m, s in zip(mean, sd))
    ylo, yhi = min(lows), max(highs)
    if yhi - ylo < 1e-12:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad

    lx = [math.log10(max(v, 1e-300)) for v in x]
    xlo, xhi = min(lx), max(lx)
    if xhi - xlo < 1e-12:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (v - xlo) / (xhi - xlo) * pw

    def py(v):
        return MARGIN["top"] + (yhi - v) / (yhi - ylo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
    ]
    for dec in range(math.ceil(xlo), math.floor(xhi) + 1):
        X = px(dec)
        out.append(f'<line x1="{_fmt(X)}" y1="{MARGIN["top"] + ph}" x2="{_fmt(X)}" '
                   f'y2="{MARGIN["top"] + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_fmt(X)}" y="{MARGIN["top"] + ph + 18}" text-anchor="middle">'
                   f"1e{dec}</text>")
    for t in _nice_ticks(ylo, yhi):
        Y = py(t)
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{_fmt(Y)}" x2="{MARGIN["left"]}" '
                   f'y2="{_fmt(Y)}" stroke="black"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{_fmt(Y + 4)}" text-anchor="end">{t:g}</text>')

    for idx, (label, mean, std) in enumerate(series):
        color = COLORS[idx % len(COLORS)]
        if std is not None and len(x) > 1:
            upper = [f"{_fmt(px(a))},{_fmt(py(m + s))}" for a, m, s in zip(lx, mean, std)]
            lower = [f"{_fmt(px(a))},{_fmt(py(m - s))}" for a, m, s in zip(lx, mean, std)]
            pts = " ".join(upper + lower[::-1])
            out.append(f'<polygon class="band" points="{pts}" fill="{color}" '
                       'fill-opacity="0.2" stroke="none"/>')
        if len(x) > 1:
            pts = " ".join(f"{_fmt(px(a))},{_fmt(py(m))}" for a, m in zip(lx, mean))
            out.append(f'<polyline class="curve" points="{pts}" fill="none" '
                       f'stroke="{color}" stroke-width="2"/>')
        else:
            out.append(f'<circle class="marker" cx="{_fmt(px(lx[0]))}" cy="{_fmt(py(mean[0]))}" '
                       f'r="4" fill="{color}"/>')
        ly = MARGIN["top"] + 15 + 18 * idx
        lx0 = WIDTH - MARGIN["right"] - 190
        out.append(f'<line x1="{lx0}" y1="{ly}" x2="{lx0 + 25}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx0 + 32}" y="{ly + 4}">{escape(label)}</text>')

    out.append(f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">'
               f"{escape(xlabel)}</text>")
    out.append(f'<text x="16" y="{MARGIN["top"] + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN["top"] + ph / 2:.1f})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
