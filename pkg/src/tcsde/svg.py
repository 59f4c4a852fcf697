"""Minimal self-contained SVG rendering for campaign reports.

Two plot kinds: "loglog" (strong-error grids with the fitted order line)
and "linear" (time series such as mean-square curves, with dashed
envelopes).  Output is a single <svg> element with no external references,
deterministic down to the text formatting.  Series with fewer than two
points cannot be drawn and raise :class:`RenderError`.
"""

import math
from dataclasses import dataclass

from .errors import RenderError

__all__ = ["Series", "render_svg", "render_strong_error", "render_stability"]

_W, _H = 640.0, 480.0
_ML, _MR, _MT, _MB = 70.0, 20.0, 30.0, 50.0
_PALETTE = ("#1f6f8b", "#c1492e", "#3a7d44", "#7b4b94", "#b8860b", "#444444")


@dataclass(frozen=True)
class Series:
    """One polyline: name for the legend, points, optional dashing/markers."""

    name: str
    xs: tuple
    ys: tuple
    dashed: bool = False
    markers: bool = False


def _fmt(v):
    return f"{v:.6g}"


def _tick_label(v, log):
    if log:
        e = round(math.log10(v))
        if abs(math.log10(v) - e) < 1e-9:
            return f"1e{int(e)}"
        return f"{v:.2g}"
    return f"{v:.3g}"


def _nice_ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(1, n - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks or [lo, hi]


def _log_ticks(lo, hi):
    e0 = math.floor(math.log10(lo))
    e1 = math.ceil(math.log10(hi))
    ticks = [10.0**e for e in range(int(e0), int(e1) + 1)
             if lo <= 10.0**e <= hi]
    return ticks or [lo, hi]


def render_svg(series_list, kind="linear", title="", xlabel="", ylabel=""):
    """Render series to an SVG document string.

    kind "linear" plots raw coordinates; "loglog" plots both axes on
    decimal log scales and requires strictly positive data.
    """
    if kind not in ("linear", "loglog"):
        raise RenderError(f"unknown plot kind {kind!r}; use 'linear' or 'loglog'")
    series_list = list(series_list)
    if not series_list:
        raise RenderError("nothing to draw: no series")
    for s in series_list:
        pts = [(x, y) for x, y in zip(s.xs, s.ys)
               if math.isfinite(x) and math.isfinite(y)]
        if len(pts) < 2:
            raise RenderError(
                f"series {s.name!r} has {len(pts)} finite point(s); "
                f"at least 2 are needed")
        if kind == "loglog" and any(x <= 0 or y <= 0 for x, y in pts):
            raise RenderError(
                f"series {s.name!r} has nonpositive values; loglog needs "
                f"positive data")

    def tx(v):
        return math.log10(v) if kind == "loglog" else v

    xs_all = [tx(x) for s in series_list for x, y in zip(s.xs, s.ys)
              if math.isfinite(x) and math.isfinite(y)]
    ys_all = [tx(y) for s in series_list for x, y in zip(s.xs, s.ys)
              if math.isfinite(x) and math.isfinite(y)]
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad_x = 0.03 * (x_hi - x_lo)
    pad_y = 0.06 * (y_hi - y_lo)
    x_lo -= pad_x
    x_hi += pad_x
    y_lo -= pad_y
    y_hi += pad_y

    px_w = _W - _ML - _MR
    px_h = _H - _MT - _MB

    def sx(v):
        return _ML + (tx(v) - x_lo) / (x_hi - x_lo) * px_w

    def sy(v):
        return _MT + (y_hi - tx(v)) / (y_hi - y_lo) * px_h

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(_W)}" '
           f'height="{_fmt(_H)}" viewBox="0 0 {_fmt(_W)} {_fmt(_H)}">',
           f'<rect width="{_fmt(_W)}" height="{_fmt(_H)}" fill="#ffffff"/>']
    if title:
        out.append(f'<text x="{_fmt(_W / 2)}" y="20" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="14">{_esc(title)}</text>')

    # axes
    out.append(f'<rect x="{_fmt(_ML)}" y="{_fmt(_MT)}" width="{_fmt(px_w)}" '
               f'height="{_fmt(px_h)}" fill="none" stroke="#000" stroke-width="1"/>')
    if kind == "loglog":
        x_ticks = _log_ticks(10.0**x_lo, 10.0**x_hi)
        y_ticks = _log_ticks(10.0**y_lo, 10.0**y_hi)
    else:
        x_ticks = _nice_ticks(x_lo, x_hi)
        y_ticks = _nice_ticks(y_lo, y_hi)
    for t in x_ticks:
        x = sx(t)
        out.append(f'<line x1="{_fmt(x)}" y1="{_fmt(_MT + px_h)}" '
                   f'x2="{_fmt(x)}" y2="{_fmt(_MT + px_h + 5)}" stroke="#000"/>')
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(_MT + px_h + 18)}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{_tick_label(t, kind == "loglog")}</text>')
    for t in y_ticks:
        y = sy(t)
        out.append(f'<line x1="{_fmt(_ML - 5)}" y1="{_fmt(y)}" '
                   f'x2="{_fmt(_ML)}" y2="{_fmt(y)}" stroke="#000"/>')
        out.append(f'<text x="{_fmt(_ML - 8)}" y="{_fmt(y + 4)}" '
                   f'text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{_tick_label(t, kind == "loglog")}</text>')
    if xlabel:
        out.append(f'<text x="{_fmt(_ML + px_w / 2)}" y="{_fmt(_H - 12)}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="12">{_esc(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{_fmt(_MT + px_h / 2)}" '
                   f'text-anchor="middle" font-family="sans-serif" font-size="12" '
                   f'transform="rotate(-90 16 {_fmt(_MT + px_h / 2)})">'
                   f'{_esc(ylabel)}</text>')

    for idx, s in enumerate(series_list):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = [(sx(x), sy(y)) for x, y in zip(s.xs, s.ys)
               if math.isfinite(x) and math.isfinite(y)]
        path = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5"{dash}/>')
        if s.markers:
            for x, y in pts:
                out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" '
                           f'fill="{color}"/>')

    # legend
    ly = _MT + 10
    for idx, s in enumerate(series_list):
        color = _PALETTE[idx % len(_PALETTE)]
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        out.append(f'<line x1="{_fmt(_ML + px_w - 150)}" y1="{_fmt(ly)}" '
                   f'x2="{_fmt(_ML + px_w - 125)}" y2="{_fmt(ly)}" '
                   f'stroke="{color}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{_fmt(_ML + px_w - 120)}" y="{_fmt(ly + 4)}" '
                   f'font-family="sans-serif" font-size="11">{_esc(s.name)}</text>')
        ly += 16
    out.append("</svg>")
    return "\n".join(out)


def _esc(s):
    return (str(s).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def render_strong_error(report, fit=None):
    """Log-log mse-vs-delta plot, with the fitted order line when given."""
    rows = [r for r in report.rows if math.isfinite(r.mse) and r.mse > 0]
    series = [Series(name=f"mse (alpha={report.alpha:g})",
                     xs=tuple(r.delta for r in rows),
                     ys=tuple(r.mse for r in rows), markers=True)]
    if fit is not None:
        ds = sorted(r.delta for r in rows)
        # mse = exp(2 intercept) delta^(2 slope) on the fitted line
        ys = tuple(math.exp(2.0 * (fit.slope * math.log(d) + fit.intercept))
                   for d in ds)
        series.append(Series(name=f"fit: order {fit.slope:.3f}",
                             xs=tuple(ds), ys=ys, dashed=True))
    return render_svg(series, kind="loglog", title="strong error",
                      xlabel="delta", ylabel="mse")


def render_stability(curve):
    """Linear-time mean-square decay plot with the envelope when present."""
    finite = [(t, m) for t, m in zip(curve.times, curve.msq) if math.isfinite(m)]
    series = [Series(name=f"msq (theta={curve.theta:g}, delta={curve.delta:g})",
                     xs=tuple(t for t, _ in finite),
                     ys=tuple(m for _, m in finite))]
    if curve.envelope is not None:
        series.append(Series(name="envelope",
                             xs=tuple(curve.times),
                             ys=tuple(curve.envelope), dashed=True))
    return render_svg(series, kind="linear", title="mean-square stability",
                      xlabel="internal time", ylabel="E|X|^2")
