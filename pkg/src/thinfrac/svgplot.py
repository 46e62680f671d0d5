"""Tiny log-log SVG writer for sweep diagnostics."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

W, H, PAD = 480, 360, 56


def _span(vals):
    lo, hi = min(vals), max(vals)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def loglog_svg(x, y, title: str = "", slope: float | None = None, xlabel="eps", ylabel="E") -> str:
    """Polyline of log10(y) against log10(x) with decade ticks.

    ``slope`` adds a dashed reference line through the last point.
    """
    pts = [(math.log10(a), math.log10(b)) for a, b in zip(x, y) if a > 0 and b > 0]
    if not pts:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}"></svg>\n'
    x0, x1 = _span([p[0] for p in pts])
    y0, y1 = _span([p[1] for p in pts])

    def tx(v):
        return PAD + (v - x0) / (x1 - x0) * (W - 2 * PAD)

    def ty(v):
        return H - PAD - (v - y0) / (y1 - y0) * (H - 2 * PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
        f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
    ]
    for k in range(math.ceil(x0), math.floor(x1) + 1):
        out.append(f'<text x="{tx(k):.1f}" y="{H - PAD + 16}" text-anchor="middle">1e{k}</text>')
    for k in range(math.ceil(y0), math.floor(y1) + 1):
        out.append(f'<text x="{PAD - 6}" y="{ty(k) + 4:.1f}" text-anchor="end">1e{k}</text>')
    poly = " ".join(f"{tx(a):.1f},{ty(b):.1f}" for a, b in pts)
    out.append(f'<polyline points="{poly}" fill="none" stroke="#1f5fa8" stroke-width="1.5"/>')
    for a, b in pts:
        out.append(f'<circle cx="{tx(a):.1f}" cy="{ty(b):.1f}" r="2.5" fill="#1f5fa8"/>')
    if slope is not None:
        xa, ya = pts[-1]
        xb = pts[0][0]
        yb = ya + slope * (xb - xa)
        out.append(
            f'<line x1="{tx(xa):.1f}" y1="{ty(ya):.1f}" x2="{tx(xb):.1f}" y2="{ty(yb):.1f}" '
            'stroke="#b03030" stroke-dasharray="4 3"/>'
        )
        out.append(f'<text x="{W - PAD}" y="{PAD - 8}" text-anchor="end" fill="#b03030">slope {slope:g}</text>')
    out.append(f'<text x="{W / 2}" y="{PAD / 2}" text-anchor="middle">{escape(title)}</text>')
    out.append(f'<text x="{W / 2}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{H / 2}" transform="rotate(-90 14 {H / 2})" text-anchor="middle">{escape(ylabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
