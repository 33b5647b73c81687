"""Supported on-disk formats and the parsed detection stream type."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import TYPE_CHECKING, Any

from kpeval.core.poses import Role
from kpeval.exceptions import ParseError, SchemaMismatchError

if TYPE_CHECKING:
    from collections.abc import Mapping

    from kpeval.core.poses import CanonicalPose
    from kpeval.core.schema import NativeKeypoint


class FormatKind(str, Enum):
    """Input formats understood by the parsers."""

    CANONICAL_JSON = "canonical_json"
    COCO_RESULT_JSON = "coco_result_json"
    PER_FRAME_JSON_DIRECTORY = "per_frame_json_dir"
    WIDE_CSV = "wide_csv"

    @classmethod
    def parse(cls, value: str) -> FormatKind:
        """Resolve a format name; dashes and case are ignored.

        Raises:
            ValueError: If the name is not a known format
        """
        key = value.strip().lower().replace("-", "_")
        aliases = {"canonical": cls.CANONICAL_JSON, "coco": cls.COCO_RESULT_JSON,
                   "per_frame": cls.PER_FRAME_JSON_DIRECTORY, "csv": cls.WIDE_CSV}  # fmt: skip
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class DetectionFile:
    """Detections of one method for one sequence, already on the canonical skeleton.

    ``frames`` keeps file order; a frame listed with an empty tuple was
    processed by the method but produced no detection.
    """

    method_name: str
    sequence_id: str
    frames: Mapping[str, tuple[CanonicalPose, ...]]
    native_count: int
    source: str = ""
    dropped_empty: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", MappingProxyType(dict(self.frames)))

    @property
    def detection_count(self) -> int:
        """Total number of detections over all frames."""
        return sum(len(d) for d in self.frames.values())


def read_json(path: Path) -> Any:
    """Read a UTF-8 JSON document, raising ParseError with the JSON position."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"Cannot read file: {e}", str(path)) from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"{path}:{e.lineno}:{e.colno}") from None


def as_float(value: Any, locus: str) -> float:
    """Convert a JSON or CSV value to a finite float."""
    if isinstance(value, bool):
        raise ParseError(f"Expected a number, got {value!r}", locus)
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ParseError(f"Expected a number, got {value!r}", locus) from None
    if not math.isfinite(number):
        raise ParseError(f"Expected a finite number, got {value!r}", locus)
    return number


def optional_float(value: Any, locus: str) -> float | None:
    """Like as_float, but None and empty strings give None."""
    if value is None or (isinstance(value, str) and not value.strip()):
        return None
    return as_float(value, locus)


def confidence_value(value: Any, locus: str) -> float | None:
    """Read an optional keypoint confidence, which must not be negative."""
    conf = optional_float(value, locus)
    if conf is not None and conf < 0:
        raise ParseError(f"Confidence must be >= 0, got {conf}", locus)
    return conf


def parse_role(value: Any, locus: str, default: Role) -> Role:
    """Parse a role label; missing labels give ``default``."""
    if value is None or (isinstance(value, str) and not value.strip()):
        return default
    try:
        return Role(str(value).strip().lower())
    except ValueError:
        raise ParseError(f"Unknown role {value!r}", locus) from None


def point_from_list(value: Any, locus: str) -> NativeKeypoint:
    """Decode ``[x, y]``, ``[x, y, conf]`` or ``null``."""
    if value is None:
        return None
    if not isinstance(value, list) or len(value) not in (2, 3):
        raise ParseError("Keypoint must be null, [x, y] or [x, y, conf]", locus)
    x = as_float(value[0], locus)
    y = as_float(value[1], locus)
    conf = confidence_value(value[2], locus) if len(value) == 3 else None
    return (x, y, conf)


def triples_from_flat(values: Any, native_count: int, locus: str) -> list[NativeKeypoint]:
    """Split a flat ``x, y, c, x, y, c...`` array into native keypoints."""
    if not isinstance(values, list):
        raise ParseError("Keypoints must be a flat array", locus)
    if len(values) != 3 * native_count:
        raise SchemaMismatchError(
            f"Expected {3 * native_count} values ({native_count} keypoints), got {len(values)}",
            locus,
        )
    points: list[NativeKeypoint] = []
    for i in range(native_count):
        x, y, c = values[3 * i : 3 * i + 3]
        if x is None or y is None:
            points.append(None)
            continue
        points.append(
            (
                as_float(x, f"{locus}[{3 * i}]"),
                as_float(y, f"{locus}[{3 * i + 1}]"),
                confidence_value(c, f"{locus}[{3 * i + 2}]"),
            )
        )
    return points


def sequence_id_from_path(path: Path) -> str:
    """Sequence id for formats that do not embed one."""
    return path.name if path.is_dir() else path.stem
