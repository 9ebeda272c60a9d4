"""Static SVG charts rendered directly from result rows.

Charts are pure functions of the tabular data: same rows, same bytes.
Output is a self-contained SVG with axes, labels and one styled series per
row class, which keeps tests structural (count points, read attributes)
instead of pixel-based.
"""

from typing import Dict, List, Sequence

from .errors import ConfigurationError
from .experiments import fit_linear

CHART_KINDS = ("rate_vs_nodes", "fidelity_vs_distance", "min_repeaters_vs_distance")

WIDTH = 640
HEIGHT = 420
MARGIN_L = 64
MARGIN_R = 24
MARGIN_T = 32
MARGIN_B = 56

SERIES_STYLE = {
    "even": ("#1f77b4", "circle"),
    "odd-left": ("#d62728", "square"),
    "odd-right": ("#2ca02c", "diamond"),
    "all": ("#1f77b4", "circle"),
}


def _scale(lo: float, hi: float):
    if hi == lo:
        hi = lo + 1.0
    return lo, hi


def _ticks(lo: float, hi: float, n: int = 5) -> List[float]:
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def _fmt(x: float) -> str:
    return f"{x:.6g}"


class _Canvas:
    def __init__(self, x_label: str, y_label: str, title: str,
                 x_range, y_range):
        self.parts: List[str] = []
        self.x_lo, self.x_hi = _scale(*x_range)
        self.y_lo, self.y_hi = _scale(*y_range)
        self.parts.append(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">')
        self.parts.append(
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>')
        self.parts.append(
            f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" '
            f'font-size="14" class="title">{title}</text>')
        self._axes(x_label, y_label)

    def px(self, x: float) -> float:
        span = WIDTH - MARGIN_L - MARGIN_R
        return MARGIN_L + (x - self.x_lo) / (self.x_hi - self.x_lo) * span

    def py(self, y: float) -> float:
        span = HEIGHT - MARGIN_T - MARGIN_B
        return HEIGHT - MARGIN_B - (y - self.y_lo) / (self.y_hi - self.y_lo) * span

    def _axes(self, x_label: str, y_label: str):
        x0, x1 = MARGIN_L, WIDTH - MARGIN_R
        y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
        self.parts.append(
            f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
        self.parts.append(
            f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
        for t in _ticks(self.x_lo, self.x_hi):
            px = self.px(t)
            self.parts.append(
                f'<line x1="{px:.1f}" y1="{y0}" x2="{px:.1f}" y2="{y0 + 5}" stroke="black"/>')
            self.parts.append(
                f'<text x="{px:.1f}" y="{y0 + 20}" text-anchor="middle" '
                f'font-size="11">{_fmt(t)}</text>')
        for t in _ticks(self.y_lo, self.y_hi):
            py = self.py(t)
            self.parts.append(
                f'<line x1="{x0 - 5}" y1="{py:.1f}" x2="{x0}" y2="{py:.1f}" stroke="black"/>')
            self.parts.append(
                f'<text x="{x0 - 8}" y="{py + 4:.1f}" text-anchor="end" '
                f'font-size="11">{_fmt(t)}</text>')
        self.parts.append(
            f'<text x="{(x0 + x1) // 2}" y="{HEIGHT - 12}" text-anchor="middle" '
            f'font-size="12" class="x-label">{x_label}</text>')
        self.parts.append(
            f'<text x="16" y="{(y0 + y1) // 2}" text-anchor="middle" font-size="12" '
            f'class="y-label" transform="rotate(-90 16 {(y0 + y1) // 2})">{y_label}</text>')

    def series(self, name: str, points: Sequence, connect: bool = True):
        color, marker = SERIES_STYLE.get(name, ("#7f7f7f", "circle"))
        pts = sorted(points)
        if connect and len(pts) > 1:
            path = " ".join(f"{self.px(x):.1f},{self.py(y):.1f}" for x, y in pts)
            self.parts.append(
                f'<polyline points="{path}" fill="none" stroke="{color}" '
                f'stroke-width="1.5" class="series-{name}"/>')
        for x, y in pts:
            px, py = self.px(x), self.py(y)
            if marker == "square":
                self.parts.append(
                    f'<rect x="{px - 3:.1f}" y="{py - 3:.1f}" width="6" height="6" '
                    f'fill="{color}" class="pt-{name}"/>')
            elif marker == "diamond":
                self.parts.append(
                    f'<polygon points="{px:.1f},{py - 4:.1f} {px + 4:.1f},{py:.1f} '
                    f'{px:.1f},{py + 4:.1f} {px - 4:.1f},{py:.1f}" '
                    f'fill="{color}" class="pt-{name}"/>')
            else:
                self.parts.append(
                    f'<circle cx="{px:.1f}" cy="{py:.1f}" r="3.2" '
                    f'fill="{color}" class="pt-{name}"/>')

    def line(self, slope: float, intercept: float, label: str):
        y_a = slope * self.x_lo + intercept
        y_b = slope * self.x_hi + intercept
        self.parts.append(
            f'<line x1="{self.px(self.x_lo):.1f}" y1="{self.py(y_a):.1f}" '
            f'x2="{self.px(self.x_hi):.1f}" y2="{self.py(y_b):.1f}" '
            f'stroke="#555" stroke-dasharray="5,4" class="fit-line"/>')
        self.parts.append(
            f'<text x="{WIDTH - MARGIN_R}" y="{MARGIN_T + 14}" text-anchor="end" '
            f'font-size="12" class="fit-label">{label}</text>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _classify(row: Dict) -> str:
    if row["parity"] == "even":
        return "even"
    return f"odd-{row['odd_subclass'] or 'left'}"


def render_chart(rows: Sequence[Dict], kind: str, path: str = None) -> str:
    """Render one chart kind from parsed result rows; returns the SVG text
    and writes it to `path` when given."""
    if kind not in CHART_KINDS:
        raise ConfigurationError(f"unknown chart kind: {kind!r}")
    if not rows:
        raise ConfigurationError("cannot chart an empty result set")
    if kind == "rate_vs_nodes":
        groups: Dict[str, list] = {}
        for r in rows:
            groups.setdefault(_classify(r), []).append(
                (r["router_count"], r["e_count"]))
        xs = [r["router_count"] for r in rows]
        ys = [r["e_count"] for r in rows]
        canvas = _Canvas("router count", "entanglement count",
                         "Entanglement count vs router count",
                         (min(xs), max(xs)), (0, max(max(ys), 1)))
        for name in ("even", "odd-left", "odd-right"):
            if name in groups:
                canvas.series(name, groups[name])
    elif kind == "fidelity_vs_distance":
        pts = [(r["total_distance_km"], r["mean_f_e2e"])
               for r in rows if r["mean_f_e2e"] is not None]
        if not pts:
            raise ConfigurationError("no successful rows to chart fidelity from")
        xs = [p[0] for p in pts]
        canvas = _Canvas("total distance (km)", "mean end-to-end fidelity",
                         "Fidelity vs total distance",
                         (min(xs), max(xs)), (0.25, 1.0))
        canvas.series("all", pts)
    else:  # min_repeaters_vs_distance
        pts = [(r["total_distance_km"], r["router_count"] - 2) for r in rows]
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        canvas = _Canvas("total distance (km)", "minimum repeater count",
                         "Minimum repeaters vs total distance",
                         (min(xs), max(xs)), (0, max(max(ys), 1)))
        canvas.series("all", pts, connect=False)
        if len(set(xs)) >= 2:
            fit = fit_linear(pts)
            canvas.line(fit.slope, fit.intercept,
                        f"fit: slope {_fmt(fit.slope)} per km, "
                        f"r^2 {_fmt(fit.r_squared)}")
    svg = canvas.render()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(svg)
    return svg
