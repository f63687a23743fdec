"""Dependency-free SVG figures: stacked panels of polylines and rasters."""

from __future__ import annotations

from dataclasses import dataclass, field
from html import escape
from typing import Optional

import numpy as np

from .model import MINUTES_PER_DAY

WIDTH = 1000
PANEL_HEIGHT = 140
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
GAP = 30
TITLE_HEIGHT = 30


@dataclass
class Panel:
    title: str
    ymax: float = 1.0
    lines: list = field(default_factory=list)    # (values, colour)
    rasters: list = field(default_factory=list)  # (mask, colour)


def _x(n: int) -> np.ndarray:
    return MARGIN_LEFT + np.arange(n) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / max(n - 1, 1)


def _polyline(values, top: float, ymax: float, colour: str) -> str:
    values = np.asarray(values, dtype=float)
    xs = _x(values.size)
    frac = np.clip(np.nan_to_num(values, nan=0.0) / ymax, 0.0, 1.0)
    ys = top + PANEL_HEIGHT * (1.0 - frac)
    points = " ".join(f"{x:.1f},{y:.1f}" for x, y in zip(xs, ys))
    return f'<polyline fill="none" stroke="{colour}" stroke-width="0.8" points="{points}"/>'


def _raster(mask, top: float, colour: str) -> str:
    mask = np.asarray(mask, dtype=bool)
    xs = _x(mask.size + 1)
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    rects = []
    for start, end in zip(edges[0::2], edges[1::2]):
        rects.append(
            f'<rect x="{xs[start]:.1f}" y="{top:.1f}" width="{max(xs[end] - xs[start], 0.5):.1f}"'
            f' height="{PANEL_HEIGHT}" fill="{colour}"/>'
        )
    return "".join(rects)


def render(panels: list[Panel], title: str, n: int, banner: Optional[str] = None) -> str:
    height = TITLE_HEIGHT + len(panels) * (PANEL_HEIGHT + GAP) + 20
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}"'
        f' viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{height}" fill="white"/>',
        f'<text x="{MARGIN_LEFT}" y="18" font-size="14">{escape(title)}</text>',
    ]
    if banner:
        out.append(f'<text x="{WIDTH - MARGIN_RIGHT}" y="18" text-anchor="end" fill="#c00"'
                   f' font-size="14">{escape(banner)}</text>')
    xs = _x(n)
    for k, panel in enumerate(panels):
        top = TITLE_HEIGHT + k * (PANEL_HEIGHT + GAP)
        out.append(f'<g class="panel" data-title="{escape(panel.title)}">')
        out.append(f'<text x="{MARGIN_LEFT}" y="{top - 4}">{escape(panel.title)}</text>')
        out.append(
            f'<rect x="{MARGIN_LEFT}" y="{top}" width="{WIDTH - MARGIN_LEFT - MARGIN_RIGHT}"'
            f' height="{PANEL_HEIGHT}" fill="none" stroke="#999"/>'
        )
        for mask, colour in panel.rasters:
            out.append(_raster(mask, top, colour))
        for values, colour in panel.lines:
            out.append(_polyline(values, top, panel.ymax, colour))
        out.append(f'<text x="{MARGIN_LEFT - 6}" y="{top + 10}" text-anchor="end">{panel.ymax:g}</text>')
        out.append(f'<text x="{MARGIN_LEFT - 6}" y="{top + PANEL_HEIGHT}" text-anchor="end">0</text>')
        # day ticks
        for d in range(0, n // MINUTES_PER_DAY + 1):
            i = min(d * MINUTES_PER_DAY, n - 1)
            out.append(f'<line x1="{xs[i]:.1f}" x2="{xs[i]:.1f}" y1="{top + PANEL_HEIGHT}"'
                       f' y2="{top + PANEL_HEIGHT + 4}" stroke="#666"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out)


def subject_figure(activity, self_report, posterior, title: str, banner: Optional[str] = None) -> str:
    """Activity trace, self-report raster and posterior P(sleep)."""
    activity = np.asarray(activity, dtype=float)
    report = np.asarray(self_report, dtype=float)
    top = float(np.nanpercentile(activity, 99.5)) if np.any(~np.isnan(activity)) else 1.0
    panels = [
        Panel("activity count", ymax=max(top, 1.0), lines=[(activity, "#333")]),
        Panel("self-report (black = asleep, grey = missing)", rasters=[
            (np.isnan(report), "#ddd"), (report == 1, "#000"),
        ]),
        Panel("posterior probability of sleep", lines=[(posterior, "#1f5fbf")]),
    ]
    return render(panels, title, activity.size, banner)


def study_figure(truth, mean_posterior, band_width, title: str) -> str:
    """Fixed pattern, mean posterior and 2.5-97.5 percentile band width."""
    band = np.asarray(band_width, dtype=float)
    panels = [
        Panel("fixed sleep pattern", rasters=[(np.asarray(truth) == 1, "#000")]),
        Panel("mean posterior probability of sleep", lines=[(mean_posterior, "#1f5fbf")]),
        Panel("97.5th - 2.5th percentile", ymax=max(float(band.max()), 1e-3), lines=[(band, "#bf3f1f")]),
    ]
    return render(panels, title, band.size)
