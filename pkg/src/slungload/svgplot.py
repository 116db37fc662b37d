"""Minimal deterministic SVG line plots; no plotting runtime dependency.

Output depends only on the data passed in (fixed float formatting, no
timestamps), so re-plotting the same log is byte-identical.
"""

from __future__ import annotations

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")

_MARGIN = dict(left=62, right=16, top=34, bottom=42)
_MAX_POINTS = 1500


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** np.floor(np.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = np.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else float(v))
        v += step
    return ticks


def _tick_label(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:.4g}"


def _decimate(arr: np.ndarray) -> np.ndarray:
    stride = max(1, int(np.ceil(arr.shape[0] / _MAX_POINTS)))
    return arr[::stride]


class Series:
    def __init__(self, label: str, y: np.ndarray, color: str | None = None, dashed: bool = False):
        self.label = label
        self.y = np.asarray(y, dtype=float)
        self.color = color
        self.dashed = dashed


def line_plot(
    path,
    x: np.ndarray,
    series: list[Series],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    size=(880, 320),
) -> None:
    """Write one multi-series line chart to an SVG file."""
    x = _decimate(np.asarray(x, dtype=float))
    ys = [_decimate(s.y) for s in series]
    width, height = size
    px0, px1 = _MARGIN["left"], width - _MARGIN["right"]
    py0, py1 = height - _MARGIN["bottom"], _MARGIN["top"]

    xlo, xhi = float(x.min()), float(x.max())
    ylo = min(float(np.nanmin(y)) for y in ys)
    yhi = max(float(np.nanmax(y)) for y in ys)
    if yhi - ylo < 1e-12:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad

    def sx(v):
        return px0 + (v - xlo) / (xhi - xlo) * (px1 - px0) if xhi > xlo else px0

    def sy(v):
        return py0 - (v - ylo) / (yhi - ylo) * (py0 - py1)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    # grid and ticks
    for tv in _nice_ticks(xlo, xhi):
        X = _fmt(sx(tv))
        parts.append(
            f'<line x1="{X}" y1="{_fmt(py0)}" x2="{X}" y2="{_fmt(py1)}" stroke="#e0e0e0" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{X}" y="{_fmt(py0 + 16)}" font-size="11" font-family="sans-serif" '
            f'text-anchor="middle" fill="#333">{_tick_label(tv)}</text>'
        )
    for tv in _nice_ticks(ylo, yhi):
        Y = _fmt(sy(tv))
        parts.append(
            f'<line x1="{_fmt(px0)}" y1="{Y}" x2="{_fmt(px1)}" y2="{Y}" stroke="#e0e0e0" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_fmt(px0 - 6)}" y="{Y}" font-size="11" font-family="sans-serif" '
            f'text-anchor="end" dominant-baseline="middle" fill="#333">{_tick_label(tv)}</text>'
        )
    parts.append(
        f'<rect x="{_fmt(px0)}" y="{_fmt(py1)}" width="{_fmt(px1 - px0)}" '
        f'height="{_fmt(py0 - py1)}" fill="none" stroke="#444" stroke-width="1"/>'
    )
    # curves
    for idx, (s, y) in enumerate(zip(series, ys)):
        color = s.color or PALETTE[idx % len(PALETTE)]
        pts = " ".join(f"{_fmt(sx(px))},{_fmt(sy(py))}" for px, py in zip(x, y))
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.4"{dash}/>'
        )
    # legend + labels
    lx = px0 + 8
    for idx, s in enumerate(series):
        color = s.color or PALETTE[idx % len(PALETTE)]
        ly = py1 + 14 + 14 * idx
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        parts.append(
            f'<line x1="{_fmt(lx)}" y1="{_fmt(ly - 4)}" x2="{_fmt(lx + 22)}" y2="{_fmt(ly - 4)}" '
            f'stroke="{color}" stroke-width="1.6"{dash}/>'
        )
        parts.append(
            f'<text x="{_fmt(lx + 27)}" y="{_fmt(ly)}" font-size="11" '
            f'font-family="sans-serif" fill="#333">{s.label}</text>'
        )
    if title:
        parts.append(
            f'<text x="{_fmt((px0 + px1) / 2)}" y="20" font-size="13" font-family="sans-serif" '
            f'text-anchor="middle" fill="#111">{title}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{_fmt((px0 + px1) / 2)}" y="{_fmt(height - 8)}" font-size="12" '
            f'font-family="sans-serif" text-anchor="middle" fill="#111">{xlabel}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="16" y="{_fmt((py0 + py1) / 2)}" font-size="12" font-family="sans-serif" '
            f'text-anchor="middle" fill="#111" transform="rotate(-90 16 {_fmt((py0 + py1) / 2)})">'
            f"{ylabel}</text>"
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def xy_plot(path, curves: list[tuple[str, np.ndarray, np.ndarray]], title="", xlabel="x (m)", ylabel="y (m)", size=(520, 520)):
    """Parametric x-y curves (e.g. top view of trajectories)."""
    # reuse line_plot by treating the first curve's x as the axis is wrong for
    # parametric data, so build the plot directly from per-curve point lists
    width, height = size
    px0, px1 = _MARGIN["left"], width - _MARGIN["right"]
    py0, py1 = height - _MARGIN["bottom"], _MARGIN["top"]
    xs = [_decimate(np.asarray(c[1], dtype=float)) for c in curves]
    ys = [_decimate(np.asarray(c[2], dtype=float)) for c in curves]
    xlo = min(float(v.min()) for v in xs)
    xhi = max(float(v.max()) for v in xs)
    ylo = min(float(v.min()) for v in ys)
    yhi = max(float(v.max()) for v in ys)
    for lo, hi in ((xlo, xhi), (ylo, yhi)):
        if hi - lo < 1e-12:
            hi += 1.0
    padx = 0.05 * (xhi - xlo) + 1e-12
    pady = 0.05 * (yhi - ylo) + 1e-12
    xlo, xhi, ylo, yhi = xlo - padx, xhi + padx, ylo - pady, yhi + pady

    def sx(v):
        return px0 + (v - xlo) / (xhi - xlo) * (px1 - px0)

    def sy(v):
        return py0 - (v - ylo) / (yhi - ylo) * (py0 - py1)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for tv in _nice_ticks(xlo, xhi):
        X = _fmt(sx(tv))
        parts.append(f'<line x1="{X}" y1="{_fmt(py0)}" x2="{X}" y2="{_fmt(py1)}" stroke="#e0e0e0"/>')
        parts.append(
            f'<text x="{X}" y="{_fmt(py0 + 16)}" font-size="11" font-family="sans-serif" '
            f'text-anchor="middle" fill="#333">{_tick_label(tv)}</text>'
        )
    for tv in _nice_ticks(ylo, yhi):
        Y = _fmt(sy(tv))
        parts.append(f'<line x1="{_fmt(px0)}" y1="{Y}" x2="{_fmt(px1)}" y2="{Y}" stroke="#e0e0e0"/>')
        parts.append(
            f'<text x="{_fmt(px0 - 6)}" y="{Y}" font-size="11" font-family="sans-serif" '
            f'text-anchor="end" dominant-baseline="middle" fill="#333">{_tick_label(tv)}</text>'
        )
    parts.append(
        f'<rect x="{_fmt(px0)}" y="{_fmt(py1)}" width="{_fmt(px1 - px0)}" '
        f'height="{_fmt(py0 - py1)}" fill="none" stroke="#444"/>'
    )
    for idx, (label, cx, cy) in enumerate(curves):
        color = PALETTE[idx % len(PALETTE)]
        pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(_decimate(np.asarray(cx, dtype=float)), _decimate(np.asarray(cy, dtype=float))))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.4"/>')
        ly = py1 + 14 + 14 * idx
        parts.append(
            f'<line x1="{_fmt(px0 + 8)}" y1="{_fmt(ly - 4)}" x2="{_fmt(px0 + 30)}" y2="{_fmt(ly - 4)}" '
            f'stroke="{color}" stroke-width="1.6"/>'
        )
        parts.append(
            f'<text x="{_fmt(px0 + 35)}" y="{_fmt(ly)}" font-size="11" '
            f'font-family="sans-serif" fill="#333">{label}</text>'
        )
    if title:
        parts.append(
            f'<text x="{_fmt((px0 + px1) / 2)}" y="20" font-size="13" font-family="sans-serif" '
            f'text-anchor="middle" fill="#111">{title}</text>'
        )
    parts.append(
        f'<text x="{_fmt((px0 + px1) / 2)}" y="{_fmt(height - 8)}" font-size="12" '
        f'font-family="sans-serif" text-anchor="middle" fill="#111">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{_fmt((py0 + py1) / 2)}" font-size="12" font-family="sans-serif" '
        f'text-anchor="middle" fill="#111" transform="rotate(-90 16 {_fmt((py0 + py1) / 2)})">'
        f"{ylabel}</text>"
    )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
