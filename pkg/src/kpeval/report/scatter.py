"""Detection score against OKS: one scatter panel per method.

Each point is an evaluated ground truth whose selected detection has both
a score and an OKS. Panels are stacked in one SVG document; the score
axis of a panel spans 0 to 1 and every score it shows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import TYPE_CHECKING
from xml.sax.saxutils import escape

from kpeval.exceptions import OutputWriteError
from kpeval.logging_config import get_logger
from kpeval.report.circles import PALETTE

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence
    from pathlib import Path

    from kpeval.report.models import MetricReport
    from kpeval.report.results import FrameResult

logger = get_logger(__name__)

PANEL_WIDTH = 360.0
PANEL_HEIGHT = 240.0
MARGIN = 48.0
POINT_RADIUS = 2.5

_ATTR = {'"': "&quot;"}


@dataclass(frozen=True)
class ScatterPlotSpec:
    """Everything the scatter figure draws.

    Attributes:
        points: Per method, (score, OKS) pairs in reduction order
        rho: Per method Spearman correlation shown in the panel heading
        colors: Per method point color
        title: Figure title
    """

    points: Mapping[str, tuple[tuple[float, float], ...]]
    rho: Mapping[str, float | None] = field(default_factory=dict)
    colors: Mapping[str, str] = field(default_factory=dict)
    title: str = ""

    def __post_init__(self) -> None:
        for method, pairs in self.points.items():
            for score, value in pairs:
                if not math.isfinite(score):
                    msg = f"Score must be finite for {method}, got {score}"
                    raise ValueError(msg)
                if not 0.0 <= value <= 1.0:
                    msg = f"OKS must lie in [0, 1] for {method}, got {value}"
                    raise ValueError(msg)
        colors = dict(self.colors)
        for i, method in enumerate(self.points):
            colors.setdefault(method, PALETTE[i % len(PALETTE)])
        object.__setattr__(self, "points", MappingProxyType(dict(self.points)))
        object.__setattr__(self, "rho", MappingProxyType(dict(self.rho)))
        object.__setattr__(self, "colors", MappingProxyType(colors))


def build_scatter_spec(
    frames: Sequence[FrameResult],
    reports: Sequence[MetricReport] = (),
    title: str = "",
) -> ScatterPlotSpec:
    """Score and OKS of every evaluated ground truth, grouped by method.

    Panels follow the order of ``reports``; methods without a report come
    last, sorted by name. Methods without a single scored detection that
    has an OKS get no panel.
    """
    points: dict[str, list[tuple[float, float]]] = {}
    for frame in sorted(frames, key=lambda f: f.sort_key):
        for target in frame.targets:
            if target.score is None or target.oks is None:
                continue
            points.setdefault(frame.method, []).append((target.score, target.oks))
    rho = {r.method: r.spearman_rho for r in reports if r.method in points}
    order = [*rho, *(m for m in points if m not in rho)]
    return ScatterPlotSpec(points={m: tuple(points[m]) for m in order}, rho=rho, title=title)


def _num(value: float) -> str:
    return f"{value:.10f}"


def _panel(spec: ScatterPlotSpec, method: str, top: float) -> list[str]:
    pairs = spec.points[method]
    x_min = min([0.0, *(s for s, _ in pairs)])
    x_max = max([1.0, *(s for s, _ in pairs)])
    left = MARGIN
    bottom = top + PANEL_HEIGHT
    rho = spec.rho.get(method)
    heading = method if rho is None else f"{method} (rho = {rho:.2f})"
    lines = [
        f'<g class="panel" data-method="{escape(method, _ATTR)}" '
        f'data-score-min="{_num(x_min)}" data-score-max="{_num(x_max)}">',
        f'<rect x="{_num(left)}" y="{_num(top)}" width="{_num(PANEL_WIDTH)}" '
        f'height="{_num(PANEL_HEIGHT)}" fill="none" stroke="#888888"/>',
        f'<text x="{_num(left)}" y="{_num(top - 8)}" font-family="sans-serif" '
        f'font-size="13" fill="#333333">{escape(heading)}</text>',
        f'<text x="{_num(left + PANEL_WIDTH / 2)}" y="{_num(bottom + 28)}" '
        'font-family="sans-serif" font-size="11" text-anchor="middle">score</text>',
        f'<text x="{_num(left - 30)}" y="{_num(top + PANEL_HEIGHT / 2)}" '
        'font-family="sans-serif" font-size="11">OKS</text>',
        f'<text x="{_num(left)}" y="{_num(bottom + 14)}" font-family="sans-serif" '
        f'font-size="10">{x_min:g}</text>',
        f'<text x="{_num(left + PANEL_WIDTH)}" y="{_num(bottom + 14)}" '
        f'font-family="sans-serif" font-size="10" text-anchor="end">{x_max:g}</text>',
        f'<text x="{_num(left - 6)}" y="{_num(top + 10)}" font-family="sans-serif" '
        'font-size="10" text-anchor="end">1</text>',
        f'<g fill="{spec.colors[method]}" stroke="none">',
    ]
    for score, value in pairs:
        cx = left + (score - x_min) / (x_max - x_min) * PANEL_WIDTH
        cy = bottom - value * PANEL_HEIGHT
        lines.append(f'<circle cx="{_num(cx)}" cy="{_num(cy)}" r="{_num(POINT_RADIUS)}"/>')
    lines.append("</g>")
    lines.append("</g>")
    return lines


def render_scatter_svg(spec: ScatterPlotSpec) -> str:
    """Render the figure as a standalone SVG 1.1 document."""
    stride = PANEL_HEIGHT + 2 * MARGIN
    width = PANEL_WIDTH + 2 * MARGIN
    height = max(1, len(spec.points)) * stride
    lines = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">',
        f"<title>{escape(spec.title or 'Detection score against OKS')}</title>",
        f'<rect x="0" y="0" width="{_num(width)}" height="{_num(height)}" fill="#ffffff"/>',
    ]
    for i, method in enumerate(spec.points):
        lines.extend(_panel(spec, method, MARGIN + i * stride))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_scatter_plot(spec: ScatterPlotSpec, path: Path) -> Path:
    """Write the scatter figure as an SVG file.

    Raises:
        OutputWriteError: If the file cannot be written
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render_scatter_svg(spec), encoding="utf-8", newline="\n")
    except OSError as e:
        raise OutputWriteError(f"Cannot write figure: {e}", str(path)) from e
    logger.info("Wrote score scatter for %d methods to %s", len(spec.points), path)
    return path
