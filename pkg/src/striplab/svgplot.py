"""Minimal self-contained SVG line plots (no plotting dependency).

Produces convergence pictures: marked data series over linear or log-log
axes with ticks, labels, and a legend.  Output is deterministic for fixed
input, so plots can serve as regression artifacts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

WIDTH, HEIGHT = 640, 440
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 34, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    x: list
    y: list
    label: str = ""
    marker: bool = True
    dashed: bool = False


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list:
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    return [10.0**e for e in range(lo_e, hi_e + 1)]


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:.4g}"


def line_plot(series: list, path, title: str = "", xlabel: str = "", ylabel: str = "",
              loglog: bool = False):
    """Write an SVG plot of the given series (list of Series)."""
    pts = [(x, y) for s in series for x, y in zip(s.x, s.y)]
    if loglog:
        pts = [(x, y) for x, y in pts if x > 0 and y > 0]
    if not pts:
        raise ValueError("nothing to plot")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if loglog:
        x_ticks = _log_ticks(x_lo, x_hi)
        y_ticks = _log_ticks(y_lo, y_hi)
        x_lo, x_hi = x_ticks[0], x_ticks[-1]
        y_lo, y_hi = y_ticks[0], y_ticks[-1]
        tx = lambda v: math.log10(v)
        x0, x1 = math.log10(x_lo), math.log10(x_hi)
        y0, y1 = math.log10(y_lo), math.log10(y_hi)
    else:
        pad_x = 0.05 * (x_hi - x_lo or 1.0)
        pad_y = 0.05 * (y_hi - y_lo or 1.0)
        x_lo, x_hi = x_lo - pad_x, x_hi + pad_x
        y_lo, y_hi = y_lo - pad_y, y_hi + pad_y
        x_ticks = _nice_ticks(x_lo, x_hi)
        y_ticks = _nice_ticks(y_lo, y_hi)
        tx = lambda v: v
        x0, x1, y0, y1 = x_lo, x_hi, y_lo, y_hi

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(v):
        return MARGIN_L + (tx(v) - x0) / (x1 - x0 or 1.0) * plot_w

    def py(v):
        return MARGIN_T + plot_h - (tx(v) - y0) / (y1 - y0 or 1.0) * plot_h

    out = []
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
               f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">')
    out.append(f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
    out.append(f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
               f'fill="none" stroke="#333"/>')
    if title:
        out.append(f'<text x="{WIDTH/2:.1f}" y="20" text-anchor="middle" '
                   f'font-size="14">{_esc(title)}</text>')

    for t in x_ticks:
        if not (x_lo <= t <= x_hi or loglog):
            continue
        x = px(t)
        out.append(f'<line x1="{x:.1f}" y1="{MARGIN_T + plot_h}" x2="{x:.1f}" '
                   f'y2="{MARGIN_T + plot_h + 5}" stroke="#333"/>')
        out.append(f'<line x1="{x:.1f}" y1="{MARGIN_T}" x2="{x:.1f}" '
                   f'y2="{MARGIN_T + plot_h}" stroke="#eee"/>')
        out.append(f'<text x="{x:.1f}" y="{MARGIN_T + plot_h + 18}" '
                   f'text-anchor="middle">{_fmt(t)}</text>')
    for t in y_ticks:
        y = py(t)
        out.append(f'<line x1="{MARGIN_L - 5}" y1="{y:.1f}" x2="{MARGIN_L}" '
                   f'y2="{y:.1f}" stroke="#333"/>')
        out.append(f'<line x1="{MARGIN_L}" y1="{y:.1f}" x2="{MARGIN_L + plot_w}" '
                   f'y2="{y:.1f}" stroke="#eee"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{y + 4:.1f}" '
                   f'text-anchor="end">{_fmt(t)}</text>')
    if xlabel:
        out.append(f'<text x="{MARGIN_L + plot_w/2:.1f}" y="{HEIGHT - 12}" '
                   f'text-anchor="middle">{_esc(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{MARGIN_T + plot_h/2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {MARGIN_T + plot_h/2:.1f})">{_esc(ylabel)}</text>')

    for idx, s in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        data = [(x, y) for x, y in zip(s.x, s.y)
                if not loglog or (x > 0 and y > 0)]
        if not data:
            continue
        path_d = " ".join(f"{'M' if i == 0 else 'L'}{px(x):.2f},{py(y):.2f}"
                          for i, (x, y) in enumerate(data))
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        out.append(f'<path d="{path_d}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        if s.marker:
            for x, y in data:
                out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3" fill="{color}"/>')
        if s.label:
            ly = MARGIN_T + 14 + 16 * idx
            lx = MARGIN_L + plot_w - 150
            out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                       f'stroke="{color}" stroke-width="1.5"{dash}/>')
            out.append(f'<text x="{lx + 28}" y="{ly}">{_esc(s.label)}</text>')

    out.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(out) + "\n")


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def plot_report(report, out_dir, stem: str = "sweep"):
    """Convergence pictures for a sweep report: d_k vs the predictor, and the
    log-log rate diagnostic."""
    from .experiments import ConvergenceReport  # noqa: F401  (type only)

    entries = report.entries
    k = report.k
    preds = [e.predictor for e in entries]
    linear = []
    logs = []
    for i in range(k):
        ds = [e.differences[i] for e in entries]
        linear.append(Series(preds, ds, label=f"k={i+1}"))
        logs.append(Series(preds, [abs(d) for d in ds], label=f"|d_{i+1}|"))
    # predictor reference line for the log-log picture
    c = max(r for r in report.sup_ratio) if report.sup_ratio else 1.0
    logs.append(Series(preds, [c * p for p in preds], label="c * predictor",
                       marker=False, dashed=True))
    p1 = f"{out_dir}/{stem}_differences.svg"
    p2 = f"{out_dir}/{stem}_rate.svg"
    line_plot(linear, p1, title=f"{report.regime}: eigenvalue differences",
              xlabel="predictor", ylabel="d_k")
    line_plot(logs, p2, title=f"{report.regime}: attained rate",
              xlabel="predictor", ylabel="|d_k|", loglog=True)
    return [p1, p2]
