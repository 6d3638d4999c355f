"""Static artifacts for solver reports: SVG overlays and vertex CSV files."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from pegs.configspace import TWO_PI
from pegs.curves import Curve
from pegs.solver import SolveReport

CURVE_SAMPLES = 720
VIEW_SIZE = 400.0
MARGIN = 20.0
COLORS = ["#1565c0", "#c62828", "#2e7d32", "#6a1b9a", "#ef6c00", "#00838f"]


class RenderError(Exception):
    """Raised when a report cannot be drawn."""


def render_svg(curve: Curve, report: SolveReport, samples: int = CURVE_SAMPLES) -> str:
    """Draw a planar curve, every inscribed polygon and the rejected pseudo-solutions.

    Pseudo-solutions are marked with a cross at their first point.

    Raises:
        RenderError: If the curve is not planar
    """
    if curve.dim != 2:
        raise RenderError(f"SVG output needs a planar curve, {curve.name} lives in R^{curve.dim}")

    outline = curve.eval_many(np.arange(samples) * (TWO_PI / samples))
    mins = outline.min(axis=0)
    span = float(np.maximum(outline.max(axis=0) - mins, 1e-9).max())
    scale = (VIEW_SIZE - 2 * MARGIN) / span
    view = VIEW_SIZE

    # SVG y-axis points down
    def to_svg(p: np.ndarray) -> tuple[float, float]:
        return MARGIN + (p[0] - mins[0]) * scale, view - (MARGIN + (p[1] - mins[1]) * scale)

    def coords(points: np.ndarray) -> str:
        return " ".join("{:.3f},{:.3f}".format(*to_svg(p)) for p in points)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {view:.3f} {view:.3f}" style="background:#ffffff">',
        f"  <!-- {curve.name}: {report.kind.value} pegs -->",
        f'  <polygon points="{coords(outline)}" fill="none" stroke="#333333" stroke-width="1.20"/>',
    ]
    for k, zero in enumerate(report.orbits):
        color = COLORS[k % len(COLORS)]
        lines.append(
            f'  <polygon points="{coords(zero.points)}" fill="{color}" fill-opacity="0.15" '
            f'stroke="{color}" stroke-width="1.00"/>'
        )
        for p in zero.points:
            x, y = to_svg(p)
            lines.append(f'  <circle cx="{x:.3f}" cy="{y:.3f}" r="2.50" fill="{color}"/>')
    for failure in report.pseudo_solutions:
        x, y = to_svg(curve.eval(failure.params[0]))
        lines.append(
            f'  <path d="M {x - 4:.3f} {y - 4:.3f} L {x + 4:.3f} {y + 4:.3f} '
            f'M {x - 4:.3f} {y + 4:.3f} L {x + 4:.3f} {y - 4:.3f}" stroke="#888888" stroke-width="1.00"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_vertices_csv(report: SolveReport, path: Path) -> None:
    """Write one row per vertex: orbit, vertex, then the coordinates."""
    axes = ["x", "y", "z"][: report.kind.dim]
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["orbit", "vertex", *axes])
        for k, zero in enumerate(report.orbits):
            for i, p in enumerate(zero.points, start=1):
                writer.writerow([k, i, *(repr(float(c)) for c in p)])
