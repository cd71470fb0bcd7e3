"""Minimal deterministic SVG line charts for daily series and forecasts."""

from __future__ import annotations

import math
from datetime import date
from xml.sax.saxutils import escape

COLOURS = ("#1f5fa8", "#c0392b", "#2e8b57", "#b8860b")
WIDTH, HEIGHT, PAD = 720, 360, 48


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def series_chart(series: dict, forecasts: dict | None = None, title: str = "") -> str:
    """``series`` maps a label to ``(days, values)``; ``forecasts`` maps the
    same labels to a single ``(day, value)`` point drawn as a dashed
    extension. NaN values break the line."""
    forecasts = forecasts or {}
    days = [d for ds, _ in series.values() for d in ds] + [d for d, _ in forecasts.values()]
    vals = [v for _, vs in series.values() for v in vs if not math.isnan(v)]
    vals += [v for _, v in forecasts.values()]
    if not days or not vals:
        raise ValueError("nothing to plot")
    d0, d1 = min(days).toordinal(), max(days).toordinal()
    lo, hi = min(vals), max(vals)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    span_d = max(d1 - d0, 1)

    def xy(d: date, v: float):
        x = PAD + (WIDTH - 2 * PAD) * (d.toordinal() - d0) / span_d
        y = HEIGHT - PAD - (HEIGHT - 2 * PAD) * (v - lo) / (hi - lo)
        return _fmt(x), _fmt(y)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{PAD}" y="{PAD // 2}" font-size="14">{escape(title)}</text>',
           f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" y2="{HEIGHT - PAD}" '
           'stroke="black"/>',
           f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{HEIGHT - PAD}" stroke="black"/>',
           f'<text x="4" y="{PAD}" font-size="10">{hi:.4g}</text>',
           f'<text x="4" y="{HEIGHT - PAD}" font-size="10">{lo:.4g}</text>',
           f'<text x="{PAD}" y="{HEIGHT - PAD + 16}" font-size="10">'
           f'{date.fromordinal(d0).isoformat()}</text>',
           f'<text x="{WIDTH - PAD - 60}" y="{HEIGHT - PAD + 16}" font-size="10">'
           f'{date.fromordinal(d1).isoformat()}</text>']
    if lo < 0 < hi:
        _, y0 = xy(date.fromordinal(d0), 0.0)
        out.append(f'<line x1="{PAD}" y1="{y0}" x2="{WIDTH - PAD}" y2="{y0}" '
                   'stroke="#999" stroke-dasharray="2,3"/>')
    for i, (label, (ds, vs)) in enumerate(series.items()):
        colour = COLOURS[i % len(COLOURS)]
        runs, cur = [], []
        for d, v in zip(ds, vs):
            if math.isnan(v):
                if cur:
                    runs.append(cur)
                cur = []
            else:
                cur.append(xy(d, v))
        if cur:
            runs.append(cur)
        for run in runs:
            pts = " ".join(f"{x},{y}" for x, y in run)
            out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" '
                       f'points="{pts}"/>')
        if label in forecasts and runs:
            fx, fy = xy(*forecasts[label])
            lx, ly = runs[-1][-1]
            out.append(f'<line x1="{lx}" y1="{ly}" x2="{fx}" y2="{fy}" stroke="{colour}" '
                       'stroke-dasharray="4,3"/>')
            out.append(f'<circle cx="{fx}" cy="{fy}" r="3" fill="{colour}"/>')
        out.append(f'<text x="{WIDTH - PAD - 110}" y="{PAD + 14 * i}" font-size="11" '
                   f'fill="{colour}">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_series_chart(series: dict, forecasts: dict | None, path, title: str = "") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(series_chart(series, forecasts, title))
