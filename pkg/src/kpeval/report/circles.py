"""Error-circle figure: one circle per method and keypoint on a reference pose.

Each circle is centred on the reference keypoint; its radius is the mean
Neck-MidHip error of the keypoint times the reference torso length, so
radii are in figure units and directly comparable across methods.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from types import MappingProxyType
from typing import TYPE_CHECKING, Any
from xml.sax.saxutils import escape

from kpeval.core.poses import GroundTruthPose, Keypoint2D
from kpeval.core.skeleton import REAL_KEYPOINTS, SKELETON_EDGES, KeypointId
from kpeval.exceptions import OutputWriteError, ParseError
from kpeval.ingest.formats import as_float
from kpeval.logging_config import get_logger
from kpeval.metrics.nmh import nmh_length_image

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence
    from pathlib import Path

    from kpeval.report.models import MetricReport

logger = get_logger(__name__)

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)  # fmt: skip

LEGEND_ROW = 18.0


@dataclass(frozen=True)
class ReferencePose:
    """Canonical keypoint positions in figure coordinates."""

    width: float
    height: float
    points: Mapping[KeypointId, tuple[float, float]]

    def __post_init__(self) -> None:
        missing = [k.canonical_name for k in REAL_KEYPOINTS if k not in self.points]
        if missing:
            msg = f"Reference pose is missing keypoints: {', '.join(missing)}"
            raise ValueError(msg)
        object.__setattr__(self, "points", MappingProxyType(dict(self.points)))

    @property
    def torso_length(self) -> float:
        """Neck-MidHip length of the reference pose."""
        pose = GroundTruthPose(
            keypoints=tuple(Keypoint2D(*self.points[k]) for k in REAL_KEYPOINTS)
        )
        length = nmh_length_image(pose)
        if length is None or length <= 0:
            msg = "Reference pose has no Neck-MidHip length"
            raise ValueError(msg)
        return length

    @classmethod
    def from_document(cls, document: Any, source: str) -> ReferencePose:
        """Decode ``{"width", "height", "keypoints": {name: [x, y]}}``."""
        if not isinstance(document, dict) or not isinstance(document.get("keypoints"), dict):
            raise ParseError("Reference pose needs a 'keypoints' object", source)
        points: dict[KeypointId, tuple[float, float]] = {}
        for name, value in document["keypoints"].items():
            locus = f"{source}:keypoints.{name}"
            try:
                kid = KeypointId.from_name(name)
            except KeyError as e:
                raise ParseError(str(e), locus) from None
            if not isinstance(value, list) or len(value) != 2:
                raise ParseError("Expected [x, y]", locus)
            points[kid] = (as_float(value[0], locus), as_float(value[1], locus))
        try:
            return cls(
                width=as_float(document.get("width"), f"{source}:width"),
                height=as_float(document.get("height"), f"{source}:height"),
                points=points,
            )
        except ValueError as e:
            raise ParseError(str(e), source) from None

    @classmethod
    def default(cls) -> ReferencePose:
        """The packaged supine-infant layout."""
        text = resources.files("kpeval").joinpath("data/reference_pose.json").read_text("utf-8")
        return cls.from_document(json.loads(text), "reference_pose.json")

    @classmethod
    def from_file(cls, path: Path) -> ReferencePose:
        """Load a reference pose file."""
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ParseError(f"Cannot load reference pose: {e}", str(path)) from e
        return cls.from_document(document, str(path))


@dataclass(frozen=True)
class CirclePlotSpec:
    """Everything the circle figure draws.

    Attributes:
        reference: Reference pose the circles are centred on
        radii: Per method, per keypoint radius in figure units
        colors: Per method stroke color
        title: Figure title
    """

    reference: ReferencePose
    radii: Mapping[str, Mapping[KeypointId, float]]
    colors: Mapping[str, str] = field(default_factory=dict)
    title: str = ""

    def __post_init__(self) -> None:
        for method, per_keypoint in self.radii.items():
            bad = [k.canonical_name for k, r in per_keypoint.items() if not r >= 0]
            if bad:
                msg = f"Negative radius for {method}: {', '.join(bad)}"
                raise ValueError(msg)
        colors = dict(self.colors)
        for i, method in enumerate(self.radii):
            colors.setdefault(method, PALETTE[i % len(PALETTE)])
        object.__setattr__(self, "colors", MappingProxyType(colors))


def build_circle_spec(
    reports: Sequence[MetricReport],
    reference: ReferencePose | None = None,
    title: str = "",
) -> CirclePlotSpec:
    """Circle radii from the per-keypoint Neck-MidHip means of ``reports``."""
    reference = reference or ReferencePose.default()
    torso = reference.torso_length
    radii: dict[str, dict[KeypointId, float]] = {}
    for report in reports:
        per_keypoint: dict[KeypointId, float] = {}
        for name, stat in report.nmh_per_keypoint.items():
            if stat.mean is not None:
                per_keypoint[KeypointId.from_name(name)] = stat.mean / 100.0 * torso
        radii[report.method] = per_keypoint
    return CirclePlotSpec(reference=reference, radii=radii, title=title)


def _num(value: float) -> str:
    return f"{value:.10f}"


def render_svg(spec: CirclePlotSpec) -> str:
    """Render the figure as a standalone SVG 1.1 document."""
    ref = spec.reference
    legend_height = LEGEND_ROW * (len(spec.radii) + 1)
    width = ref.width
    height = ref.height + legend_height
    lines = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">',
        f"<title>{escape(spec.title or 'Keypoint errors')}</title>",
        f'<rect x="0" y="0" width="{_num(width)}" height="{_num(height)}" fill="#ffffff"/>',
        '<g id="skeleton" stroke="#bbbbbb" stroke-width="2" fill="none">',
    ]
    for a, b in SKELETON_EDGES:
        (x1, y1), (x2, y2) = ref.points[a], ref.points[b]
        lines.append(
            f'<line x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}"/>'
        )
    lines.append("</g>")
    for method, per_keypoint in spec.radii.items():
        color = spec.colors[method]
        lines.append(
            f'<g class="method" data-method="{escape(method, {chr(34): "&quot;"})}" '
            f'stroke="{color}" stroke-width="1.5" fill="none">'
        )
        for k in REAL_KEYPOINTS:
            if k not in per_keypoint:
                continue
            cx, cy = ref.points[k]
            lines.append(
                f'<circle data-keypoint="{k.canonical_name}" cx="{_num(cx)}" cy="{_num(cy)}" '
                f'r="{_num(per_keypoint[k])}"/>'
            )
        lines.append("</g>")
    lines.append('<g id="legend" font-family="sans-serif" font-size="12">')
    for i, method in enumerate(spec.radii):
        y = ref.height + LEGEND_ROW * (i + 1)
        lines.append(
            f'<rect x="10" y="{_num(y - 10)}" width="10" height="10" '
            f'fill="{spec.colors[method]}"/>'
        )
        lines.append(f'<text x="26" y="{_num(y)}" fill="#333333">{escape(method)}</text>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_circle_plot(spec: CirclePlotSpec, path: Path) -> Path:
    """Write the circle figure as an SVG file.

    Raises:
        OutputWriteError: If the file cannot be written
    """
    if not all(math.isfinite(v) for v in (spec.reference.width, spec.reference.height)):
        msg = "Reference pose size must be finite"
        raise ValueError(msg)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render_svg(spec), encoding="utf-8", newline="\n")
    except OSError as e:
        raise OutputWriteError(f"Cannot write figure: {e}", str(path)) from e
    logger.info("Wrote circle plot for %d methods to %s", len(spec.radii), path)
    return path
