"""Hand-written SVG log-log plots; no plotting dependency.

Axes, decade ticks and labels are drawn with line/text elements; the
data curves and the optional reference-rate guide are the only
polyline elements, so a parser can count one polyline per curve.
"""

import math

WIDTH, HEIGHT = 720, 500
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 55
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


def _decades(lo, hi):
    first = math.ceil(lo - 1e-12)
    return [d for d in range(first, math.floor(hi + 1e-12) + 1)]


class _Frame:
    def __init__(self, xlo, xhi, ylo, yhi):
        pad_x = 0.02 * (xhi - xlo or 1.0)
        pad_y = 0.04 * (yhi - ylo or 1.0)
        self.xlo, self.xhi = xlo - pad_x, xhi + pad_x
        self.ylo, self.yhi = ylo - pad_y, yhi + pad_y

    def px(self, x):
        span = self.xhi - self.xlo
        return MARGIN_L + (x - self.xlo) / span * (WIDTH - MARGIN_L - MARGIN_R)

    def py(self, y):
        span = self.yhi - self.ylo
        return HEIGHT - MARGIN_B - (y - self.ylo) / span * (HEIGHT - MARGIN_T - MARGIN_B)


def svg_loglog(path, curves, title="", xlabel="iteration k",
               ylabel="value", guide_slope=None):
    """Write a log-log plot of ``curves`` = [(label, ks, values), ...].

    Values must be positive; points with nonpositive values are
    dropped. ``guide_slope = -1`` adds a reference polyline with that
    log-log slope anchored at the first curve's starting point.
    """
    data = []
    for label, ks, vals in curves:
        pts = [(math.log10(k + 1.0), math.log10(v))
               for k, v in zip(ks, vals) if v > 0.0]
        if not pts:
            raise ValueError(f"curve {label!r} has no positive values")
        data.append((label, pts))
    xs = [p[0] for _, pts in data for p in pts]
    ys = [p[1] for _, pts in data for p in pts]

    guide = None
    if guide_slope is not None:
        x0, y0 = data[0][1][0]
        x1 = max(xs)
        guide = [(x0, y0), (x1, y0 + guide_slope * (x1 - x0))]
        ys += [guide[1][1]]

    fr = _Frame(min(xs), max(xs), min(ys), max(ys))
    out = []
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
               f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">')
    out.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" '
               f'fill="white"/>')
    if title:
        out.append(f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" '
                   f'font-size="15" font-family="sans-serif">{title}</text>')

    # frame
    x0p, x1p = fr.px(fr.xlo), fr.px(fr.xhi)
    y0p, y1p = fr.py(fr.ylo), fr.py(fr.yhi)
    frame = (f'M {x0p:.1f} {y1p:.1f} L {x1p:.1f} {y1p:.1f} '
             f'L {x1p:.1f} {y0p:.1f} L {x0p:.1f} {y0p:.1f} Z')
    out.append(f'<path d="{frame}" fill="none" stroke="black"/>')

    # decade ticks
    for d in _decades(fr.xlo, fr.xhi):
        px = fr.px(d)
        out.append(f'<line x1="{px:.1f}" y1="{y0p:.1f}" x2="{px:.1f}" '
                   f'y2="{y0p + 5:.1f}" stroke="black"/>')
        out.append(f'<text x="{px:.1f}" y="{y0p + 20:.1f}" text-anchor="middle" '
                   f'font-size="12" font-family="sans-serif">1e{d}</text>')
    for d in _decades(fr.ylo, fr.yhi):
        py = fr.py(d)
        out.append(f'<line x1="{x0p - 5:.1f}" y1="{py:.1f}" x2="{x0p:.1f}" '
                   f'y2="{py:.1f}" stroke="black"/>')
        out.append(f'<text x="{x0p - 8:.1f}" y="{py + 4:.1f}" text-anchor="end" '
                   f'font-size="12" font-family="sans-serif">1e{d}</text>')
    out.append(f'<text x="{(x0p + x1p) / 2:.1f}" y="{HEIGHT - 12}" '
               f'text-anchor="middle" font-size="13" '
               f'font-family="sans-serif">{xlabel}</text>')
    out.append(f'<text x="16" y="{(y0p + y1p) / 2:.1f}" text-anchor="middle" '
               f'font-size="13" font-family="sans-serif" '
               f'transform="rotate(-90 16 {(y0p + y1p) / 2:.1f})">{ylabel}</text>')

    legend_y = MARGIN_T + 8
    for i, (label, pts) in enumerate(data):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{fr.px(x):.2f},{fr.py(y):.2f}" for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" '
                   f'stroke="{color}" stroke-width="1.6"/>')
        out.append(f'<line x1="{x1p - 150:.1f}" y1="{legend_y}" '
                   f'x2="{x1p - 120:.1f}" y2="{legend_y}" stroke="{color}" '
                   f'stroke-width="1.6"/>')
        out.append(f'<text x="{x1p - 114:.1f}" y="{legend_y + 4}" '
                   f'font-size="12" font-family="sans-serif">{label}</text>')
        legend_y += 18
    if guide is not None:
        coords = " ".join(f"{fr.px(x):.2f},{fr.py(y):.2f}" for x, y in guide)
        out.append(f'<polyline points="{coords}" fill="none" stroke="#777777" '
                   f'stroke-width="1.2" stroke-dasharray="6,4"/>')
        out.append(f'<line x1="{x1p - 150:.1f}" y1="{legend_y}" '
                   f'x2="{x1p - 120:.1f}" y2="{legend_y}" stroke="#777777" '
                   f'stroke-dasharray="6,4"/>')
        out.append(f'<text x="{x1p - 114:.1f}" y="{legend_y + 4}" '
                   f'font-size="12" font-family="sans-serif">slope '
                   f'{guide_slope:g} guide</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(out) + "\n")
    return path
