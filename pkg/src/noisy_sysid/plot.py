"""Self-contained log-log SVG of median error against trajectory length."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .errors import SysIdError

COLORS = {
    "LS": "#d62728",
    "HoKalman": "#ff7f0e",
    "IV": "#1f77b4",
    "BC": "#2ca02c",
}
FLOOR = 1e-16

WIDTH, HEIGHT = 720, 480
LEFT, RIGHT, TOP, BOTTOM = 80, 150, 50, 60


class EmptyPlotError(SysIdError):
    pass


def _log_range(values: list[float]) -> tuple[float, float]:
    lo = math.floor(math.log10(min(values)))
    hi = math.ceil(math.log10(max(values)))
    if hi == lo:
        hi += 1
    return lo, hi


def emit_svg_plot(res, path) -> None:
    """Polyline of medians per estimator with interquartile whiskers."""
    rows = [r for r in res.summary if r.n_ok > 0 and not math.isnan(r.median)]
    if not rows:
        raise EmptyPlotError("no successful runs to plot")
    title = res.config_echo.get("description") or "Estimation error"

    xs = [float(r.T) for r in rows]
    ys = [max(v, FLOOR) for r in rows for v in (r.q25, r.median, r.q75)]
    x_lo, x_hi = _log_range(xs)
    y_lo, y_hi = _log_range(ys)
    pw = WIDTH - LEFT - RIGHT
    ph = HEIGHT - TOP - BOTTOM

    def px(T: float) -> float:
        return LEFT + (math.log10(T) - x_lo) / (x_hi - x_lo) * pw

    def py(v: float) -> float:
        return TOP + (y_hi - math.log10(max(v, FLOOR))) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="13">{escape(title[:110])}</text>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
    ]
    for e in range(x_lo, x_hi + 1):
        x = px(10.0**e)
        out.append(f'<line x1="{x:.2f}" y1="{TOP}" x2="{x:.2f}" y2="{TOP + ph}" stroke="#ddd"/>')
        out.append(f'<text x="{x:.2f}" y="{TOP + ph + 18}" text-anchor="middle">1e{e}</text>')
    for e in range(y_lo, y_hi + 1):
        y = py(10.0**e)
        out.append(f'<line x1="{LEFT}" y1="{y:.2f}" x2="{LEFT + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y + 4:.2f}" text-anchor="end">1e{e}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle">trajectory length T</text>')
    out.append(
        f'<text x="20" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 20 {TOP + ph / 2:.1f})">median max(||A - Â||, ||B - B̂||)</text>'
    )

    names = list(dict.fromkeys(r.estimator for r in rows))
    for i, name in enumerate(names):
        color = COLORS.get(name, "#555")
        series = sorted((r for r in rows if r.estimator == name), key=lambda r: r.T)
        points = " ".join(f"{px(r.T):.2f},{py(r.median):.2f}" for r in series)
        out.append(f'<g class="series" data-estimator="{escape(name)}">')
        out.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="2"/>')
        for r in series:
            x = px(r.T)
            y1, y2 = py(r.q25), py(r.q75)
            out.append(f'<line x1="{x:.2f}" y1="{y1:.2f}" x2="{x:.2f}" y2="{y2:.2f}" stroke="{color}"/>')
            for y in (y1, y2):
                out.append(f'<line x1="{x - 4:.2f}" y1="{y:.2f}" x2="{x + 4:.2f}" y2="{y:.2f}" stroke="{color}"/>')
            out.append(f'<circle cx="{x:.2f}" cy="{py(r.median):.2f}" r="3" fill="{color}"/>')
        out.append("</g>")
        ly = TOP + 10 + 20 * i
        lx = LEFT + pw + 15
        out.append(
            f'<g class="legend-entry"><line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" stroke-width="2"/>'
            f'<text x="{lx + 30}" y="{ly + 4}">{escape(name)}</text></g>'
        )
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
