"""Dependency-free SVG charts and PGM raster output.

All writers are deterministic: fixed float formatting, fixed palettes,
no timestamps, so repeated runs produce byte-identical files.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 20, 40, 50  # plot margins


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    start = np.ceil(lo / step) * step
    return list(np.arange(start, hi + step * 1e-9, step))


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str, xlim, ylim):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
            f'viewBox="0 0 {_W} {_H}">',
            f'<rect width="{_W}" height="{_H}" fill="white"/>',
            f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" font-size="15" '
            f'font-family="sans-serif">{escape(title)}</text>',
        ]
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 <= self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 <= self.y0:
            self.y1 = self.y0 + 1.0
        self._axes(xlabel, ylabel)

    def px(self, x: float) -> float:
        return _ML + (x - self.x0) / (self.x1 - self.x0) * (_W - _ML - _MR)

    def py(self, y: float) -> float:
        return _H - _MB - (y - self.y0) / (self.y1 - self.y0) * (_H - _MT - _MB)

    def _axes(self, xlabel: str, ylabel: str):
        p = self.parts
        p.append(
            f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
            f'fill="none" stroke="black" stroke-width="1"/>'
        )
        for t in _ticks(self.x0, self.x1):
            x = self.px(t)
            p.append(
                f'<line x1="{x:.1f}" y1="{_H - _MB}" x2="{x:.1f}" y2="{_H - _MB + 5}" stroke="black"/>'
            )
            p.append(
                f'<text x="{x:.1f}" y="{_H - _MB + 18}" text-anchor="middle" font-size="11" '
                f'font-family="sans-serif">{t:g}</text>'
            )
        for t in _ticks(self.y0, self.y1):
            y = self.py(t)
            p.append(f'<line x1="{_ML - 5}" y1="{y:.1f}" x2="{_ML}" y2="{y:.1f}" stroke="black"/>')
            p.append(
                f'<text x="{_ML - 8}" y="{y + 4:.1f}" text-anchor="end" font-size="11" '
                f'font-family="sans-serif">{t:g}</text>'
            )
        p.append(
            f'<text x="{(_ML + _W - _MR) / 2:.1f}" y="{_H - 12}" text-anchor="middle" '
            f'font-size="13" font-family="sans-serif">{escape(xlabel)}</text>'
        )
        p.append(
            f'<text x="18" y="{(_MT + _H - _MB) / 2:.1f}" text-anchor="middle" font-size="13" '
            f'font-family="sans-serif" transform="rotate(-90 18 {(_MT + _H - _MB) / 2:.1f})">'
            f"{escape(ylabel)}</text>"
        )

    def legend(self, names):
        for i, name in enumerate(names):
            x, y = _W - _MR - 130, _MT + 16 + 18 * i
            self.parts.append(
                f'<circle cx="{x}" cy="{y - 4}" r="4" fill="{PALETTE[i % len(PALETTE)]}"/>'
            )
            self.parts.append(
                f'<text x="{x + 10}" y="{y}" font-size="12" font-family="sans-serif">'
                f"{escape(str(name))}</text>"
            )

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def svg_scatter(series: dict, title: str, xlabel: str, ylabel: str) -> str:
    """Scatter chart; series maps name -> (x array, y array), one color each."""
    xs = np.concatenate([np.asarray(v[0], dtype=float) for v in series.values()])
    ys = np.concatenate([np.asarray(v[1], dtype=float) for v in series.values()])
    padx = 0.05 * (xs.max() - xs.min() or 1.0)
    pady = 0.05 * (ys.max() - ys.min() or 1.0)
    cv = _Canvas(title, xlabel, ylabel, (xs.min() - padx, xs.max() + padx),
                 (ys.min() - pady, ys.max() + pady))
    for i, (name, (x, y)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        for xi, yi in zip(np.asarray(x, dtype=float), np.asarray(y, dtype=float)):
            cv.parts.append(
                f'<circle cx="{cv.px(xi):.2f}" cy="{cv.py(yi):.2f}" r="3" fill="{color}" '
                f'fill-opacity="0.6"/>'
            )
    cv.legend(series.keys())
    return cv.render()


def svg_lines(series: dict, title: str, xlabel: str, ylabel: str) -> str:
    """Line chart; series maps name -> (x array, y array)."""
    xs = np.concatenate([np.asarray(v[0], dtype=float) for v in series.values()])
    ys = np.concatenate([np.asarray(v[1], dtype=float) for v in series.values()])
    pady = 0.05 * (ys.max() - ys.min() or 1.0)
    cv = _Canvas(title, xlabel, ylabel, (xs.min(), xs.max()), (ys.min() - pady, ys.max() + pady))
    for i, (name, (x, y)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(
            f"{cv.px(xi):.2f},{cv.py(yi):.2f}"
            for xi, yi in zip(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        )
        cv.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
    cv.legend(series.keys())
    return cv.render()


# ---------------------------------------------------------------------------
# rasters
# ---------------------------------------------------------------------------

def write_pgm(path, image: np.ndarray) -> None:
    """Binary P5 portable graymap from a 2D array in [0, 1]."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"PGM image must be 2D, got {img.shape}")
    data = np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def cells_to_strip(cells, pad: int = 2, pad_value: float = 0.5) -> np.ndarray:
    """Horizontal montage of cells separated by thin gray gutters."""
    cells = [np.asarray(c, dtype=np.float64) for c in cells]
    h = cells[0].shape[0]
    gutter = np.full((h, pad), pad_value)
    parts = []
    for i, c in enumerate(cells):
        if i:
            parts.append(gutter)
        parts.append(c)
    return np.hstack(parts)


def cells_to_mosaic(grid: np.ndarray, pad: int = 2, pad_value: float = 0.5) -> np.ndarray:
    """Montage of a (rows, cols, h, w) cell grid with gray gutters."""
    rows = [cells_to_strip(grid[r], pad, pad_value) for r in range(grid.shape[0])]
    gutter = np.full((pad, rows[0].shape[1]), pad_value)
    parts = []
    for i, r in enumerate(rows):
        if i:
            parts.append(gutter)
        parts.append(r)
    return np.vstack(parts)


def _cell_rects(cell: np.ndarray, ox: float, oy: float, scale: float) -> list[str]:
    """Run-length encode material pixels (>= 0.5) into SVG rects."""
    rects = []
    binary = np.asarray(cell) >= 0.5
    for r in range(binary.shape[0]):
        c = 0
        while c < binary.shape[1]:
            if binary[r, c]:
                start = c
                while c < binary.shape[1] and binary[r, c]:
                    c += 1
                rects.append(
                    f'<rect x="{ox + start * scale:.2f}" y="{oy + r * scale:.2f}" '
                    f'width="{(c - start) * scale:.2f}" height="{scale:.2f}" fill="white"/>'
                )
            else:
                c += 1
    return rects


def svg_cell_mosaic(grid, caption: str = "", scale: float = 2.0) -> str:
    """Grid of cells rendered black (void) / white (material)."""
    grid = np.asarray(grid, dtype=np.float64)
    rows, cols = grid.shape[0], grid.shape[1]
    size = 50 * scale
    gap = 6.0
    top = 26.0 if caption else 8.0
    w = cols * size + (cols - 1) * gap + 16
    h = top + rows * size + (rows - 1) * gap + 10
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
        f'viewBox="0 0 {w:.0f} {h:.0f}">',
        f'<rect width="{w:.0f}" height="{h:.0f}" fill="#dddddd"/>',
    ]
    if caption:
        parts.append(
            f'<text x="{w / 2:.1f}" y="17" text-anchor="middle" font-size="13" '
            f'font-family="sans-serif">{escape(caption)}</text>'
        )
    for r in range(rows):
        for c in range(cols):
            ox = 8 + c * (size + gap)
            oy = top + r * (size + gap)
            parts.append(
                f'<rect x="{ox:.2f}" y="{oy:.2f}" width="{size:.2f}" height="{size:.2f}" fill="black"/>'
            )
            parts.extend(_cell_rects(grid[r, c], ox, oy, scale))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def svg_cell_strip(cells, labels=None, caption: str = "", scale: float = 2.0) -> str:
    """Labeled strip of cells rendered black (void) / white (material)."""
    cells = [np.asarray(c, dtype=np.float64) for c in cells]
    n = len(cells)
    size = 50 * scale
    gap = 6.0
    top = 26.0 if caption else 8.0
    label_h = 16.0 if labels is not None else 0.0
    w = n * size + (n - 1) * gap + 16
    h = top + size + label_h + 10
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" height="{h:.0f}" '
        f'viewBox="0 0 {w:.0f} {h:.0f}">',
        f'<rect width="{w:.0f}" height="{h:.0f}" fill="#dddddd"/>',
    ]
    if caption:
        parts.append(
            f'<text x="{w / 2:.1f}" y="17" text-anchor="middle" font-size="13" '
            f'font-family="sans-serif">{escape(caption)}</text>'
        )
    for i, cell in enumerate(cells):
        ox = 8 + i * (size + gap)
        parts.append(f'<rect x="{ox:.2f}" y="{top:.2f}" width="{size:.2f}" height="{size:.2f}" fill="black"/>')
        parts.extend(_cell_rects(cell, ox, top, scale))
        if labels is not None:
            parts.append(
                f'<text x="{ox + size / 2:.1f}" y="{top + size + 13:.1f}" text-anchor="middle" '
                f'font-size="10" font-family="sans-serif">{escape(str(labels[i]))}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
