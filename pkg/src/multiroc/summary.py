"""Multiclass ROC curve and its area summary from the centered components.

Each threshold row contributes the point (logistic(shared FPR effect),
logistic(shared TPR effect)). Points are sorted by x (the factorization does
not guarantee monotone shared effects), the corners (0,0) and (1,1) are
added so the area is comparable to a binary AUC, and the area is computed
by the trapezoid rule.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .factorization import CenteredComponents

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RocCurve:
    """Ordered curve points in the unit square, corners included."""

    points: np.ndarray
    source_thresholds: np.ndarray | None = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2:
            raise ValueError("points must be an (m, 2) array")
        if points.min() < 0.0 or points.max() > 1.0:
            raise ValueError("curve points must lie in [0, 1]^2")
        if not (points[0] == (0.0, 0.0)).all() or not (points[-1] == (1.0, 1.0)).all():
            raise ValueError("curve must start at (0,0) and end at (1,1)")
        if np.any(np.diff(points[:, 0]) < 0):
            raise ValueError("curve x coordinates must be non-decreasing")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]


def curve(centered: CenteredComponents, levels=None) -> RocCurve:
    """Map the shared threshold effects through the logistic and order by x."""
    l0_tp = np.asarray(centered.lambda0_tp, dtype=float)
    l0_fp = np.asarray(centered.lambda0_fp, dtype=float)
    if l0_tp.shape != l0_fp.shape or l0_tp.ndim != 1:
        raise ValueError("lambda0 halves must be 1-D of equal length")
    x = expit(l0_fp)
    y = expit(l0_tp)
    order = np.lexsort((y, x))
    if np.any(order != np.arange(order.size)):
        logger.info("curve points reordered to make x non-decreasing")
    pts = np.column_stack([x[order], y[order]])
    pts = np.vstack([[0.0, 0.0], pts, [1.0, 1.0]])
    src = None if levels is None else np.asarray(levels, dtype=float)
    return RocCurve(pts, src)


def d_statistic(roc: RocCurve) -> float:
    """Trapezoidal area under the curve, in [0, 1]."""
    return float(np.trapezoid(roc.y, roc.x))


def curve_to_csv(roc: RocCurve, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for px, py in roc.points:
            writer.writerow([f"{px:.17g}", f"{py:.17g}"])


_SVG_SIZE = 600
_SVG_MARGIN = 60


def _to_px(x: float, y: float):
    span = _SVG_SIZE - 2 * _SVG_MARGIN
    return _SVG_MARGIN + x * span, _SVG_SIZE - _SVG_MARGIN - y * span


def curve_to_svg(roc: RocCurve, path, title: str = "multiclass ROC") -> None:
    """Self-contained SVG line plot with a diagonal reference line."""
    pts = " ".join(f"{px:.2f},{py:.2f}" for px, py in (_to_px(x, y) for x, y in roc.points))
    x0, y0 = _to_px(0.0, 0.0)
    x1, y1 = _to_px(1.0, 1.0)
    svg = f"""<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_SVG_SIZE} {_SVG_SIZE}">
  <rect width="{_SVG_SIZE}" height="{_SVG_SIZE}" fill="white"/>
  <rect x="{_SVG_MARGIN}" y="{_SVG_MARGIN}" width="{_SVG_SIZE - 2 * _SVG_MARGIN}" height="{_SVG_SIZE - 2 * _SVG_MARGIN}" fill="none" stroke="black"/>
  <line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" stroke="gray" stroke-dasharray="6,4"/>
  <polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="2"/>
  <text x="{_SVG_SIZE / 2:.0f}" y="{_SVG_SIZE - 15}" text-anchor="middle" font-family="sans-serif" font-size="16">FPR-like</text>
  <text x="20" y="{_SVG_SIZE / 2:.0f}" text-anchor="middle" font-family="sans-serif" font-size="16" transform="rotate(-90 20 {_SVG_SIZE / 2:.0f})">TPR-like</text>
  <text x="{_SVG_SIZE / 2:.0f}" y="35" text-anchor="middle" font-family="sans-serif" font-size="18">{title}</text>
</svg>
"""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
