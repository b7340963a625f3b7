"""Render sweep results as a static SVG, one panel per metric.

Pure rendering: every number drawn is read off the :class:`SweepResult`.
The x-axis is the realised propensity change in the intervened stratum;
odds factors at powers of ten are marked along the top edge.
"""
from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

from ..exceptions import ConfigError
from ..metrics import METRICS

PANEL_W, PANEL_H = 300, 240
MARGIN = dict(left=52, right=14, top=44, bottom=46)
SERIES = (
    (0, "group 0", "#1f77b4", ""),
    (1, "group 1", "#ff7f0e", ""),
    ("abs_diff", "abs_diff", "#555555", ' stroke-dasharray="5,3"'),
)


def _num(v):
    return f"{v:.2f}".rstrip("0").rstrip(".") if v != int(v) else str(int(v))


def _choose_path(result, variant, source):
    paths = {r.path for r in result.select(variant)}
    if source != "auto":
        if source not in paths:
            raise ConfigError(f"no {source!r} rows for variant {variant!r}", "source")
        return source
    for p in ("oracle", "mc"):
        if p in paths:
            return p
    raise ConfigError(f"result has no rows for variant {variant!r}", "variant")


def _panel(ox, recs, metric):
    w = PANEL_W - MARGIN["left"] - MARGIN["right"]
    h = PANEL_H - MARGIN["top"] - MARGIN["bottom"]
    x0, y0 = ox + MARGIN["left"], MARGIN["top"]
    xs = [r.delta_pi for r in recs]
    lo, hi = min(xs), max(xs)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    sx = lambda v: x0 + (v - lo) / (hi - lo) * w
    sy = lambda v: y0 + (1.0 - v) * h
    out = [f'<g class="panel" data-metric="{metric}">',
           f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#000"/>',
           f'<text x="{x0 + w / 2:.1f}" y="16" text-anchor="middle" font-size="13">{escape(metric)}</text>']
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = sy(t)
        out.append(f'<line x1="{x0 - 4}" y1="{y:.2f}" x2="{x0}" y2="{y:.2f}" stroke="#000"/>')
        out.append(f'<text x="{x0 - 6}" y="{y + 4:.2f}" text-anchor="end" font-size="10">{_num(t)}</text>')
    for i in range(5):
        v = lo + (hi - lo) * i / 4
        x = sx(v)
        out.append(f'<line x1="{x:.2f}" y1="{y0 + h}" x2="{x:.2f}" y2="{y0 + h + 4}" stroke="#000"/>')
        out.append(f'<text x="{x:.2f}" y="{y0 + h + 16}" text-anchor="middle" font-size="10">{v:.2f}</text>')
    out.append(f'<text x="{x0 + w / 2:.1f}" y="{PANEL_H - 8}" text-anchor="middle" font-size="11">'
               'change in approval rate</text>')
    # powers of ten in k, placed by interpolating delta_pi linearly in log10 k
    logk = [math.log10(r.k) for r in recs]
    last_label = -math.inf
    for e in range(math.ceil(logk[0] - 1e-9), math.floor(logk[-1] + 1e-9) + 1):
        j = next(i for i, v in enumerate(logk) if v >= e - 1e-9)
        if j == 0 or logk[j] - logk[j - 1] == 0:
            dpi = xs[j]
        else:
            t = (e - logk[j - 1]) / (logk[j] - logk[j - 1])
            dpi = xs[j - 1] + t * (xs[j] - xs[j - 1])
        x = sx(dpi)
        out.append(f'<line x1="{x:.2f}" y1="{y0}" x2="{x:.2f}" y2="{y0 - 4}" stroke="#888"/>')
        if x - last_label < 34:
            continue
        last_label = x
        out.append(f'<text x="{x:.2f}" y="{y0 - 7}" text-anchor="middle" font-size="9" fill="#888">'
                   f'k=1e{e}</text>')
    for group, label, color, dash in SERIES:
        pts = []
        for r in recs:
            v = r.report.disparities[metric] if group == "abs_diff" else getattr(r.report.groups[group], metric)
            if v is not None:
                pts.append((sx(r.delta_pi), sy(v)))
        if len(pts) > 1:
            coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
            out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.6"{dash}>'
                       f'<title>{escape(label)}</title></polyline>')
        else:
            out += [f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"><title>{escape(label)}</title></circle>'
                    for x, y in pts]
    out.append("</g>")
    return out


def emit_plot(result, metrics, path, variant="observable", source="auto"):
    """Write an SVG with one panel per name in ``metrics``.

    ``source`` picks the ``"oracle"`` or ``"mc"`` rows; ``"auto"`` prefers
    the oracle when both are present.
    """
    metrics = list(metrics)
    bad = [m for m in metrics if m not in METRICS]
    if bad or not metrics:
        raise ConfigError(f"unknown metric(s) {bad}; valid names are {list(METRICS)}", "metrics")
    if len(result) == 0:
        raise ConfigError("cannot plot an empty sweep", "result")
    src = _choose_path(result, variant, source)
    recs = result.select(variant, src)

    width = PANEL_W * len(metrics)
    height = PANEL_H + 24
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
             f'<rect width="{width}" height="{height}" fill="#fff"/>']
    for i, m in enumerate(metrics):
        parts += _panel(i * PANEL_W, recs, m)
    lx = 12
    for _, label, color, dash in SERIES:
        parts.append(f'<line x1="{lx}" y1="{height - 10}" x2="{lx + 22}" y2="{height - 10}" '
                     f'stroke="{color}" stroke-width="2"{dash}/>')
        parts.append(f'<text x="{lx + 26}" y="{height - 6}" font-size="11">{label}</text>')
        lx += 100
    parts.append(f'<text x="{width - 8}" y="{height - 6}" text-anchor="end" font-size="10" fill="#666">'
                 f'{escape(variant)} / {src}</text>')
    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n")
    return path
