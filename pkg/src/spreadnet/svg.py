"""Minimal SVG line plots: polylines, axes with ticks, a legend and shaded bands."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"]
DASHES = {"solid": None, "dash": "6,4", "dot": "2,3", "dashdot": "6,3,2,3"}


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    style: str = "solid"
    band: Optional[np.ndarray] = None  # half-width of a shaded band around y


@dataclass
class Plot:
    title: str = ""
    xlabel: str = "t"
    ylabel: str = "f"
    width: int = 640
    height: int = 420
    series: list = field(default_factory=list)

    def add(self, label, x, y, style="solid", band=None) -> "Plot":
        self.series.append(Series(label, np.asarray(x, float), np.asarray(y, float), style,
                                  None if band is None else np.asarray(band, float)))
        return self

    def render(self) -> str:
        left, right, top, bottom = 60, 20, 30, 45
        W, H = self.width - left - right, self.height - top - bottom
        xs = np.concatenate([s.x for s in self.series]) if self.series else np.array([0.0, 1.0])
        ys = [s.y for s in self.series]
        ys += [s.y + s.band for s in self.series if s.band is not None]
        ys += [s.y - s.band for s in self.series if s.band is not None]
        ys = np.concatenate(ys) if ys else np.array([0.0, 1.0])
        x0, x1 = float(np.min(xs)), float(np.max(xs))
        y0, y1 = min(0.0, float(np.min(ys))), max(1.0, float(np.max(ys)))
        x1 = x1 if x1 > x0 else x0 + 1

        def px(x):
            return left + (np.asarray(x) - x0) / (x1 - x0) * W

        def py(y):
            return top + (1 - (np.asarray(y) - y0) / (y1 - y0)) * H

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
               f'height="{self.height}" font-family="sans-serif" font-size="11">',
               f'<rect width="{self.width}" height="{self.height}" fill="white"/>']
        if self.title:
            out.append(f'<text x="{self.width / 2}" y="18" text-anchor="middle" '
                       f'font-size="13">{escape(self.title)}</text>')
        out.append(f'<rect x="{left}" y="{top}" width="{W}" height="{H}" fill="none" stroke="black"/>')
        for v in np.linspace(x0, x1, 6):
            out.append(f'<line x1="{px(v):.1f}" y1="{top + H}" x2="{px(v):.1f}" y2="{top + H + 4}" stroke="black"/>')
            out.append(f'<text x="{px(v):.1f}" y="{top + H + 16}" text-anchor="middle">{v:.3g}</text>')
        for v in np.linspace(y0, y1, 6):
            out.append(f'<line x1="{left - 4}" y1="{py(v):.1f}" x2="{left}" y2="{py(v):.1f}" stroke="black"/>')
            out.append(f'<text x="{left - 6}" y="{py(v) + 4:.1f}" text-anchor="end">{v:.3g}</text>')
        out.append(f'<text x="{left + W / 2}" y="{self.height - 8}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="14" y="{top + H / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 14 {top + H / 2})">{escape(self.ylabel)}</text>')

        for i, s in enumerate(self.series):
            color = PALETTE[i % len(PALETTE)]
            if s.band is not None:
                upper = np.column_stack([px(s.x), py(s.y + s.band)])
                lower = np.column_stack([px(s.x), py(s.y - s.band)])[::-1]
                pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in np.vstack([upper, lower]))
                out.append(f'<polygon points="{pts}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(s.x), py(s.y)))
            dash = DASHES.get(s.style)
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash_attr}/>')
            ly = top + 14 + 15 * i
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<line x1="{left + W - 150}" y1="{ly}" x2="{left + W - 125}" y2="{ly}" '
                       f'stroke="{color}" stroke-width="1.5"{dash_attr}/>')
            out.append(f'<text x="{left + W - 120}" y="{ly + 4}">{escape(s.label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"
