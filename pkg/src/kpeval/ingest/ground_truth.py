"""Ground-truth parsing for every supported format."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any

from kpeval.core.poses import FrameRecord, GroundTruthPose, Keypoint2D, Role, SequenceDataset
from kpeval.core.schema import native_to_keypoint
from kpeval.core.skeleton import NUM_KEYPOINTS, REAL_KEYPOINTS
from kpeval.exceptions import DuplicateFrameIdError, EmptyDatasetError, ParseError
from kpeval.ingest.canonical import load_canonical_json
from kpeval.ingest.formats import (
    FormatKind,
    parse_role,
    read_json,
    sequence_id_from_path,
    triples_from_flat,
)
from kpeval.ingest.wide_csv import has_column, iter_rows, keypoint_prefixes, read_wide_csv
from kpeval.logging_config import get_logger

if TYPE_CHECKING:
    from kpeval.core.schema import NativeKeypoint

logger = get_logger(__name__)


def _pose(points: list[NativeKeypoint], role: Role, locus: str) -> GroundTruthPose:
    if role is Role.UNKNOWN:
        raise ParseError("Ground-truth role must be infant or adult", locus)
    keypoints = []
    for p in points:
        kp = native_to_keypoint(p)
        keypoints.append(Keypoint2D(kp.x, kp.y) if kp.present else kp)
    return GroundTruthPose(keypoints=tuple(keypoints), role=role)


def _resolve_roles(
    raw: list[tuple[list[NativeKeypoint], Any, str]], locus: str
) -> tuple[GroundTruthPose, ...]:
    if len(raw) > 1 and any(not label for _, label, _ in raw):
        raise ParseError(f"{len(raw)} ground truths in one frame need explicit roles", locus)
    return tuple(
        _pose(points, parse_role(label, rec_locus, Role.INFANT), rec_locus)
        for points, label, rec_locus in raw
    )


def _build(
    sequence_id: str,
    grouped: dict[str, list[tuple[list[NativeKeypoint], Any, str]]],
    source: str,
) -> SequenceDataset:
    if not grouped:
        raise EmptyDatasetError(locus=source)
    frames = tuple(
        FrameRecord(frame_id=fid, ground_truths=_resolve_roles(raw, f"{source}:{fid}"))
        for fid, raw in grouped.items()
    )
    expected = max([1, *(len(f.ground_truths) for f in frames)])
    return SequenceDataset(sequence_id=sequence_id, frames=frames, expected_persons=expected)


def _parse_wide_csv(path: Path) -> SequenceDataset:
    table = read_wide_csv(path)
    known = {k.canonical_name for k in REAL_KEYPOINTS}
    unknown = sorted(keypoint_prefixes(table) - known)
    if unknown:
        logger.warning(
            "Ignoring non-canonical keypoint columns: %s",
            ", ".join(unknown),
            extra={"code": "unknown_columns", "source": str(path), "columns": unknown},
        )
    with_roles = has_column(table, "role")
    grouped: dict[str, list[tuple[list[NativeKeypoint], Any, str]]] = {}
    for row in iter_rows(table, [k.canonical_name for k in REAL_KEYPOINTS], str(path)):
        locus = f"{path}:{row.line}"
        if row.frame_id in grouped and not with_roles:
            raise DuplicateFrameIdError(f"Frame id {row.frame_id!r} occurs more than once", locus)
        entries = grouped.setdefault(row.frame_id, [])
        if not row.is_empty:
            entries.append((row.points, row.role, locus))
    return _build(sequence_id_from_path(path), grouped, str(path))


def _people_entry(entry: Any, locus: str) -> tuple[Any, Any]:
    if isinstance(entry, list):
        return entry, None
    if isinstance(entry, dict):
        flat = entry.get("pose_keypoints_2d", entry.get("keypoints"))
        return flat, entry.get("role")
    raise ParseError("Person entry must be an array or an object", locus)


def _parse_frame_directory(path: Path) -> SequenceDataset:
    if not path.is_dir():
        raise ParseError("Expected a directory of per-frame JSON files", str(path))
    grouped: dict[str, list[tuple[list[NativeKeypoint], Any, str]]] = {}
    for file in sorted(path.glob("*.json")):
        document = read_json(file)
        if not isinstance(document, dict) or not isinstance(document.get("people", []), list):
            raise ParseError("Expected an object with a 'people' array", str(file))
        entries = grouped.setdefault(file.stem, [])
        for i, person in enumerate(document.get("people", [])):
            locus = f"{file}:people[{i}]"
            flat, role = _people_entry(person, locus)
            entries.append((triples_from_flat(flat, NUM_KEYPOINTS, locus), role, locus))
    return _build(sequence_id_from_path(path), grouped, str(path))


def _parse_coco(path: Path) -> SequenceDataset:
    document = read_json(path)
    if isinstance(document, dict):
        document = document.get("annotations")
    if not isinstance(document, list):
        raise ParseError("Expected an array of annotations", str(path))
    grouped: dict[str, list[tuple[list[NativeKeypoint], Any, str]]] = {}
    for i, record in enumerate(document):
        locus = f"{path}:[{i}]"
        if not isinstance(record, dict) or "image_id" not in record:
            raise ParseError("Annotation must be an object with 'image_id'", locus)
        points = triples_from_flat(record.get("keypoints"), NUM_KEYPOINTS, f"{locus}.keypoints")
        # third value is the COCO visibility flag: 0 means not labelled
        points = [None if p is None or p[2] == 0 else (p[0], p[1], None) for p in points]
        grouped.setdefault(str(record["image_id"]), []).append(
            (points, record.get("role"), locus)
        )
    return _build(sequence_id_from_path(path), grouped, str(path))


def parse_ground_truth(path: Path | str, fmt: FormatKind) -> SequenceDataset:
    """Parse a ground-truth file into a SequenceDataset.

    Args:
        path: File, or directory for PerFrameJsonDirectory
        fmt: Format of the file

    Returns:
        Dataset with annotated keypoints present and roles resolved

    Raises:
        ParseError: If the input is malformed
        DuplicateFrameIdError: If a frame id repeats
        EmptyDatasetError: If there are no frames
    """
    path = Path(path)
    logger.debug("Parsing ground truth %s as %s", path, fmt.value)
    match fmt:
        case FormatKind.CANONICAL_JSON:
            dataset = load_canonical_json(path)
        case FormatKind.WIDE_CSV:
            dataset = _parse_wide_csv(path)
        case FormatKind.PER_FRAME_JSON_DIRECTORY:
            dataset = _parse_frame_directory(path)
        case FormatKind.COCO_RESULT_JSON:
            dataset = _parse_coco(path)
    logger.info(
        "Loaded ground truth %s: %d frames",
        dataset.sequence_id,
        len(dataset.frames),
        extra={"code": "ground_truth_loaded", "sequence": dataset.sequence_id},
    )
    return dataset
