"""Deterministic SVG charts for distribution summaries.

Everything is drawn from primitives (rects, lines, circles, text) with
fixed-precision coordinates, so identical input gives byte-identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

from .distributions import BARS, CDF, DISCRETE, HISTOGRAM, INVERSE_CDF, SEQUENCE, TIME_SERIES, DistributionSummary

POINT = "point"
LINE = "line"
BAR = "bar"
LINEAR = "linear"
LOG = "log"

MAX_LINEAR_TICKS = 8
FONT = "DejaVu Sans, Arial, Helvetica, sans-serif"
CHAR_WIDTH = 6.6  # rough advance for 11px text, used for label layout only
MARK_COLOR = "#1f5fa8"


class ChartSpecError(ValueError):
    pass


@dataclass(frozen=True)
class ChartSpec:
    source: DistributionSummary
    mark: str
    x_scale: str = LINEAR
    y_scale: str = LINEAR
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    width: int = 640
    height: int = 400

    def check(self) -> None:
        kind = self.source.kind
        if self.mark not in (POINT, LINE, BAR):
            raise ChartSpecError(f"unknown mark {self.mark!r}")
        for s in (self.x_scale, self.y_scale):
            if s not in (LINEAR, LOG):
                raise ChartSpecError(f"unknown scale {s!r}")
        if kind == BARS:
            if self.mark != BAR or self.x_scale == LOG:
                raise ChartSpecError("categorical data is drawn as horizontal bars on a linear count axis")
        elif kind == HISTOGRAM:
            if self.mark != BAR or self.x_scale == LOG:
                raise ChartSpecError("histograms are drawn as bars over linear bin edges")
        elif self.mark == BAR:
            raise ChartSpecError(f"bar mark does not fit {kind} data")
        if self.width < 200 or self.height < 150:
            raise ChartSpecError("chart dimensions too small")


def spec_for(d: DistributionSummary, width: int = 640, height: int = 400) -> ChartSpec:
    """Default chart for a distribution kind."""
    mark = {
        DISCRETE: POINT,
        SEQUENCE: POINT,
        INVERSE_CDF: LINE,
        CDF: LINE,
        TIME_SERIES: LINE,
        HISTOGRAM: BAR,
        BARS: BAR,
    }[d.kind]
    return ChartSpec(
        source=d,
        mark=mark,
        x_scale=LOG if d.x_log and d.kind not in (BARS, HISTOGRAM) else LINEAR,
        y_scale=LOG if d.y_log and d.kind != BARS else LINEAR,
        title=d.provenance or d.name,
        x_label=d.x_label,
        y_label=d.y_label,
        width=width,
        height=height,
    )


# ---- scales -----------------------------------------------------------


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _nice_step(span: float, integer: bool = False) -> float:
    raw = span / (MAX_LINEAR_TICKS - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1, 2, 5, 10):
        step = m * mag
        if integer and step < 1:
            continue
        if math.ceil(span / step - 1e-9) + 1 <= MAX_LINEAR_TICKS:
            return step
    return 10 * mag


def _snap(lo: float, hi: float, step: float) -> tuple[float, float]:
    # the 1e-9 slack absorbs quotient noise like 0.3 / 0.1; the checks keep the data inside
    start = math.floor(lo / step + 1e-9) * step
    stop = math.ceil(hi / step - 1e-9) * step
    if round(start, 12) > lo:
        start -= step
    if round(stop, 12) < hi:
        stop += step
    return start, stop


def linear_ticks(lo: float, hi: float, integer: bool = False) -> tuple[float, float, list[float]]:
    """Round domain and at most eight evenly spaced ticks covering [lo, hi]."""
    if hi < lo:
        lo, hi = hi, lo
    if hi == lo:
        pad = 1.0 if lo == 0 else abs(lo) * 0.5
        lo, hi = lo - pad, hi + pad
    step = _nice_step(hi - lo, integer)
    start, stop = _snap(lo, hi, step)
    while round((stop - start) / step) + 1 > MAX_LINEAR_TICKS:
        step = _nice_step(stop - start + step, integer)
        start, stop = _snap(lo, hi, step)
    count = int(round((stop - start) / step)) + 1
    ticks = [round(start + i * step, 12) for i in range(count)]
    return ticks[0], ticks[-1], ticks


def log_ticks(lo: float, hi: float) -> tuple[float, float, list[float]]:
    """Decade-aligned domain; ticks only at powers of ten."""
    a = math.floor(math.log10(lo) + 1e-12)
    b = math.ceil(math.log10(hi) - 1e-12)
    if b <= a:
        b = a + 1
    stride = max(1, math.ceil((b - a + 1) / MAX_LINEAR_TICKS))
    ticks = [10.0 ** k for k in range(a, b + 1, stride)]
    return 10.0 ** a, 10.0 ** b, ticks


def _tick_label(v: float, scale: str, step: float | None = None) -> str:
    if scale == LOG:
        k = round(math.log10(v))
        return f"{10 ** k:g}" if -3 <= k <= 5 else f"1e{k}"
    decimals = 0
    if step is not None:
        while decimals < 9 and abs(step * 10 ** decimals - round(step * 10 ** decimals)) > 1e-6:
            decimals += 1
    s = f"{v:.{decimals}f}"
    return "0" if s.strip("-0.") == "" else s


class _Axis:
    def __init__(self, lo: float, hi: float, scale: str, p0: float, p1: float, integer: bool = False):
        self.scale = scale
        if scale == LOG:
            self.lo, self.hi, self.ticks = log_ticks(lo, hi)
            self._a, self._b = math.log10(self.lo), math.log10(self.hi)
            self.step = None
        else:
            self.lo, self.hi, self.ticks = linear_ticks(lo, hi, integer)
            self._a, self._b = self.lo, self.hi
            self.step = self.ticks[1] - self.ticks[0] if len(self.ticks) > 1 else None
        self.p0, self.p1 = p0, p1

    def __call__(self, v: float) -> float:
        t = math.log10(v) if self.scale == LOG else v
        return self.p0 + (t - self._a) / (self._b - self._a) * (self.p1 - self.p0)

    def label(self, v: float) -> str:
        return _tick_label(v, self.scale, self.step)


# ---- drawing ----------------------------------------------------------


@dataclass
class _Canvas:
    width: int
    height: int
    parts: list[str] = field(default_factory=list)

    def add(self, s: str) -> None:
        self.parts.append(s)

    def text(self, x, y, s, anchor="middle", size=11, rotate=False, cls="") -> None:
        attrs = f'x="{_f(x)}" y="{_f(y)}" text-anchor="{anchor}" font-size="{size}"'
        if rotate:
            attrs += f' transform="rotate(-90 {_f(x)} {_f(y)})"'
        if cls:
            attrs += f' class="{cls}"'
        self.add(f"<text {attrs}>{escape(str(s))}</text>")

    def line(self, x1, y1, x2, y2, stroke="#000", width=1.0, dash=False) -> None:
        extra = ' stroke-dasharray="2,3"' if dash else ""
        self.add(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
                 f'stroke="{stroke}" stroke-width="{_f(width)}"{extra}/>')


def _positive(points, x_log, y_log):
    kept = [(x, y) for x, y in points if (not x_log or x > 0) and (not y_log or y > 0)]
    return kept, len(points) - len(kept)


def render_chart(spec: ChartSpec) -> str:
    """Standalone SVG document for ``spec``."""
    spec.check()
    d = spec.source
    notes = list(d.notes)
    if d.kind == BARS:
        labels = [str(x) for x in d.xs]
        left = min(220, 16 + CHAR_WIDTH * max((len(s) for s in labels), default=1))
    else:
        left = 72
    points = list(d.points)
    if spec.x_scale == LOG or spec.y_scale == LOG:
        points, dropped = _positive(points, spec.x_scale == LOG, spec.y_scale == LOG)
        if dropped:
            notes.append(f"{dropped} point(s) with non-positive values omitted from the log-scaled axis")

    caption_h = 15 * len(notes)
    w, h = spec.width, spec.height + caption_h
    top, right, bottom = 36, 24, 56
    plot_bottom = spec.height - bottom
    cv = _Canvas(w, h)
    cv.add(f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           f'viewBox="0 0 {w} {h}" font-family={quoteattr(FONT)}>')
    cv.add(f"<title>{escape(spec.title)}</title>")
    cv.add(f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>')
    cv.text(w / 2, 22, spec.title, size=14, cls="title")

    if not points:
        cv.text(w / 2, (top + plot_bottom) / 2, "no data to plot", size=12)
    elif d.kind == BARS:
        _draw_hbars(cv, spec, points, left, top, w - right, plot_bottom)
    else:
        _draw_xy(cv, spec, points, left, top, w - right, plot_bottom)

    for i, note in enumerate(notes):
        cv.text(12, spec.height - 8 + 15 * i, "Note: " + note, anchor="start", size=10, cls="note")
    cv.add("</svg>")
    return "\n".join(cv.parts) + "\n"


def _integral(values) -> bool:
    return all(float(v).is_integer() for v in values)


def _frame(cv: _Canvas, x0, y0, x1, y1) -> None:
    cv.add(f'<rect x="{_f(x0)}" y="{_f(y0)}" width="{_f(x1 - x0)}" height="{_f(y1 - y0)}" '
           f'fill="none" stroke="#000" stroke-width="1.00"/>')


def _draw_xy(cv: _Canvas, spec: ChartSpec, points, x0, y0, x1, y1) -> None:
    d = spec.source
    if d.kind == HISTOGRAM:
        edges = d.bin_edges
        xlo, xhi = edges[0], edges[-1]
    else:
        xs = [float(p[0]) for p in points]
        xlo, xhi = min(xs), max(xs)
    ys = [float(p[1]) for p in points]
    ylo, yhi = min(ys), max(ys)
    if spec.y_scale == LINEAR and d.kind in (DISCRETE, HISTOGRAM, TIME_SERIES, SEQUENCE, CDF, INVERSE_CDF):
        ylo = min(0.0, ylo)
    if d.kind in (CDF, INVERSE_CDF) and spec.y_scale == LINEAR:
        yhi = max(1.0, yhi)
    xa = _Axis(xlo, xhi, spec.x_scale, x0, x1, integer=_integral(p[0] for p in points) and d.kind != HISTOGRAM)
    ya = _Axis(ylo, yhi, spec.y_scale, y1, y0, integer=_integral(ys))

    for t in ya.ticks:
        py = ya(t)
        cv.line(x0, py, x1, py, stroke="#d0d0d0", width=0.5, dash=True)
        cv.line(x0 - 4, py, x0, py)
        cv.text(x0 - 7, py + 4, ya.label(t), anchor="end", cls="tick")
    for t in xa.ticks:
        px = xa(t)
        cv.line(px, y1, px, y1 + 4)
        cv.text(px, y1 + 17, xa.label(t), cls="tick")
    _frame(cv, x0, y0, x1, y1)
    cv.text((x0 + x1) / 2, y1 + 38, spec.x_label, size=12, cls="axis-label")
    cv.text(16, (y0 + y1) / 2, spec.y_label, size=12, rotate=True, cls="axis-label")

    if d.kind == HISTOGRAM:
        base = ya(ya.lo) if spec.y_scale == LOG else ya(0.0)
        edges = d.bin_edges
        for i, (_, c) in enumerate(d.points):
            if c <= 0:
                continue
            left, right, top = xa(edges[i]), xa(edges[i + 1]), ya(c)
            cv.add(f'<rect class="mark" x="{_f(left)}" y="{_f(top)}" width="{_f(right - left)}" '
                   f'height="{_f(base - top)}" fill="{MARK_COLOR}" stroke="#ffffff" stroke-width="0.50"/>')
        return

    coords = [(xa(float(x)), ya(float(y))) for x, y in points]
    if spec.mark == LINE:
        if d.kind in (CDF, INVERSE_CDF):
            path = [coords[0]]
            for (px, py), (qx, qy) in zip(coords, coords[1:]):
                path += [(qx, py), (qx, qy)]
            coords_line = path
        else:
            coords_line = coords
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in coords_line)
        cv.add(f'<polyline class="mark" points="{pts}" fill="none" stroke="{MARK_COLOR}" stroke-width="1.50"/>')
    else:
        for px, py in coords:
            cv.add(f'<circle class="mark" cx="{_f(px)}" cy="{_f(py)}" r="3.00" fill="{MARK_COLOR}"/>')


def _draw_hbars(cv: _Canvas, spec: ChartSpec, points, x0, y0, x1, y1) -> None:
    counts = [float(p[1]) for p in points]
    xa = _Axis(0.0, max(max(counts), 1.0), LINEAR, x0, x1, integer=_integral(counts))
    band = (y1 - y0) / len(points)
    bar = band * 0.72
    for t in xa.ticks:
        px = xa(t)
        cv.line(px, y0, px, y1, stroke="#d0d0d0", width=0.5, dash=True)
        cv.line(px, y1, px, y1 + 4)
        cv.text(px, y1 + 17, xa.label(t), cls="tick")
    for i, (label, count) in enumerate(points):
        top = y0 + i * band + (band - bar) / 2
        cv.add(f'<rect class="mark" x="{_f(x0)}" y="{_f(top)}" width="{_f(xa(float(count)) - x0)}" '
               f'height="{_f(bar)}" fill="{MARK_COLOR}"/>')
        cv.text(x0 - 6, top + bar / 2 + 4, label, anchor="end", cls="category")
    _frame(cv, x0, y0, x1, y1)
    cv.text((x0 + x1) / 2, y1 + 38, spec.y_label, size=12, cls="axis-label")
