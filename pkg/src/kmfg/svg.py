"""Minimal native SVG rendering: line plots and density heat maps.

Paths and axes are computed in-library so runs stay dependency-free and
byte-deterministic (no timestamps or renderer metadata).
"""

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

WIDTH, HEIGHT = 640, 440
MARGIN = {"left": 70, "right": 20, "top": 40, "bottom": 55}


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min(m for m in (1.0, 2.0, 2.5, 5.0, 10.0) if m * mag >= raw) * mag
    first = np.ceil(lo / step) * step
    return np.arange(first, hi + step / 2.0, step)


def _fmt(v):
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:.4g}"


class _Frame:
    def __init__(self, xlim, ylim):
        self.xlim, self.ylim = xlim, ylim
        self.x0, self.x1 = MARGIN["left"], WIDTH - MARGIN["right"]
        self.y0, self.y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]

    def px(self, x):
        a, b = self.xlim
        return self.x0 + (x - a) / (b - a) * (self.x1 - self.x0)

    def py(self, y):
        a, b = self.ylim
        return self.y0 + (y - a) / (b - a) * (self.y1 - self.y0)


def _axes(parts, frame, title, xlabel, ylabel):
    parts.append(
        f'<rect x="{frame.x0}" y="{frame.y1}" width="{frame.x1 - frame.x0}" '
        f'height="{frame.y0 - frame.y1}" fill="none" stroke="#333"/>'
    )
    for tx in _ticks(*frame.xlim):
        px = frame.px(tx)
        parts.append(f'<line x1="{px:.1f}" y1="{frame.y0}" x2="{px:.1f}" y2="{frame.y0 + 5}" stroke="#333"/>')
        parts.append(f'<text x="{px:.1f}" y="{frame.y0 + 18}" font-size="11" text-anchor="middle">{_fmt(tx)}</text>')
    for ty in _ticks(*frame.ylim):
        py = frame.py(ty)
        parts.append(f'<line x1="{frame.x0 - 5}" y1="{py:.1f}" x2="{frame.x0}" y2="{py:.1f}" stroke="#333"/>')
        parts.append(f'<text x="{frame.x0 - 8}" y="{py + 4:.1f}" font-size="11" text-anchor="end">{_fmt(ty)}</text>')
    parts.append(f'<text x="{(frame.x0 + frame.x1) / 2}" y="22" font-size="14" text-anchor="middle">{title}</text>')
    parts.append(
        f'<text x="{(frame.x0 + frame.x1) / 2}" y="{HEIGHT - 12}" font-size="12" text-anchor="middle">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{(frame.y0 + frame.y1) / 2}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 18 {(frame.y0 + frame.y1) / 2})">{ylabel}</text>'
    )


def _polyline(frame, xs, ys, color, dashed=False):
    pts = " ".join(f"{frame.px(x):.2f},{frame.py(y):.2f}" for x, y in zip(xs, ys))
    dash = ' stroke-dasharray="5,4"' if dashed else ""
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>'


def line_plot(path, xs, series, title="", xlabel="", ylabel="", markers=None):
    """Render overlaid curves.

    ``series`` is a list of (ys, label, dashed) triples sharing ``xs``;
    ``markers`` is an optional list of (x, y) dots.
    """
    xs = np.asarray(xs, dtype=float)
    all_y = np.concatenate([np.asarray(ys, dtype=float) for ys, _, _ in series])
    ylo, yhi = float(all_y.min()), float(all_y.max())
    pad = 0.05 * (yhi - ylo or 1.0)
    frame = _Frame((float(xs.min()), float(xs.max())), (ylo - pad, yhi + pad))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    _axes(parts, frame, title, xlabel, ylabel)
    for i, (ys, label, dashed) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        parts.append(_polyline(frame, xs, np.asarray(ys, dtype=float), color, dashed))
        if label:
            ty = frame.y1 + 16 + 15 * i
            parts.append(f'<line x1="{frame.x1 - 120}" y1="{ty - 4}" x2="{frame.x1 - 95}" y2="{ty - 4}" stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{frame.x1 - 90}" y="{ty}" font-size="11">{label}</text>')
    for x, y in markers or []:
        parts.append(f'<circle cx="{frame.px(x):.2f}" cy="{frame.py(y):.2f}" r="4" fill="#000"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def _shade(u):
    # white -> blue -> dark colormap on [0, 1]
    r = int(255 * (1.0 - 0.85 * u))
    g = int(255 * (1.0 - 0.55 * u))
    b = int(255 * (1.0 - 0.15 * u))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(path, t, x, z, title="", xlabel="t", ylabel="x", max_cells=160):
    """Density heat map over (t, x); z has shape (len(t), len(x))."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    st = max(1, t.size // max_cells)
    sx = max(1, x.size // max_cells)
    t_s, x_s, z_s = t[::st], x[::sx], z[::st, ::sx]
    zmax = float(z_s.max()) or 1.0
    frame = _Frame((t_s[0], t[-1]), (x_s[0], x[-1] + (x[1] - x[0]) * sx))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    dt_px = (frame.x1 - frame.x0) / t_s.size
    dx_px = (frame.y0 - frame.y1) / x_s.size
    for i in range(t_s.size):
        for j in range(x_s.size):
            u = z_s[i, j] / zmax
            px = frame.x0 + i * dt_px
            py = frame.y0 - (j + 1) * dx_px
            parts.append(
                f'<rect x="{px:.2f}" y="{py:.2f}" width="{dt_px + 0.5:.2f}" '
                f'height="{dx_px + 0.5:.2f}" fill="{_shade(u)}"/>'
            )
    _axes(parts, frame, title, xlabel, ylabel)
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
