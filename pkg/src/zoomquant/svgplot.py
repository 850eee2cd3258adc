"""Minimal deterministic SVG line plots (one panel per signal)."""

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _num(v):
    return "%.3f" % v


def _ticks(lo, hi, count=5):
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def line_plot(t, series, title="", width=640, panel_height=160, xlabel="t [s]"):
    """Render ``{label: values}`` against ``t`` as stacked panels.

    Non-finite samples break the polyline. Output depends only on the
    inputs, so equal data yields byte-identical files.
    """
    t = np.asarray(t, dtype=float)
    left, right, top, gap = 70, 20, 30, 40
    inner_w = width - left - right
    inner_h = panel_height - gap
    height = top + panel_height * len(series) + 20
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width // 2}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>',
    ]
    t0, t1 = (float(t[0]), float(t[-1])) if t.size else (0.0, 1.0)
    if t1 <= t0:
        t1 = t0 + 1.0

    for i, (label, values) in enumerate(series.items()):
        v = np.asarray(values, dtype=float)
        y0 = top + i * panel_height
        finite = v[np.isfinite(v)]
        lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (-1.0, 1.0)
        if hi - lo < 1e-12 * max(1.0, abs(hi)):
            lo, hi = lo - 1.0, hi + 1.0

        def px(tt):
            return left + (tt - t0) / (t1 - t0) * inner_w

        def py(vv):
            return y0 + inner_h - (vv - lo) / (hi - lo) * inner_h

        out.append(
            f'<rect x="{left}" y="{y0}" width="{inner_w}" height="{inner_h}" '
            'fill="none" stroke="#888"/>'
        )
        for val in _ticks(lo, hi):
            out.append(
                f'<text x="{left - 4}" y="{_num(py(val) + 4)}" text-anchor="end">{val:.3g}</text>'
            )
        for tt in _ticks(t0, t1):
            out.append(
                f'<text x="{_num(px(tt))}" y="{y0 + inner_h + 14}" text-anchor="middle">{tt:.3g}</text>'
            )
        if lo < 0.0 < hi:
            out.append(
                f'<line x1="{left}" y1="{_num(py(0.0))}" x2="{left + inner_w}" '
                f'y2="{_num(py(0.0))}" stroke="#ccc"/>'
            )
        color = PALETTE[i % len(PALETTE)]
        segment = []
        for tt, vv in zip(t, v):
            if np.isfinite(vv):
                segment.append(f"{_num(px(tt))},{_num(py(vv))}")
            elif segment:
                out.append(_polyline(segment, color))
                segment = []
        if segment:
            out.append(_polyline(segment, color))
        out.append(
            f'<text x="{left + 6}" y="{y0 + 14}" fill="{color}">{escape(label)}</text>'
        )
    out.append(
        f'<text x="{left + inner_w // 2}" y="{height - 4}" text-anchor="middle">{escape(xlabel)}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _polyline(points, color):
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
        f'points="{" ".join(points)}"/>'
    )


def save(path, svg):
    with open(path, "w") as fh:
        fh.write(svg)
