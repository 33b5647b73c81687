"""CanonicalJson: the interchange format every other format converts to.

Document shape (UTF-8, one sequence per file)::

    {"sequence_id": "s1", "expected_persons": 1, "normalization": "median",
     "metadata": {"age_weeks": "12"},
     "frames": [{"frame_id": "0001", "width": 640, "height": 480,
                 "ground_truths": [{"role": "infant", "keypoints": [[x, y] | null, ...]}],
                 "detections": [{"rank": 0, "score": 0.9, "keypoints": [[x, y, c] | null, ...]}]}]}

``null`` marks an absent keypoint. Emitting a parsed document and parsing
it again gives value-identical datasets.
"""

from __future__ import annotations

import json
from typing import TYPE_CHECKING, Any

from kpeval.core.poses import (
    CanonicalPose,
    FrameRecord,
    GroundTruthPose,
    Keypoint2D,
    NormalizationMode,
    Role,
    SequenceDataset,
)
from kpeval.core.schema import identity_schema, map_to_canonical
from kpeval.core.skeleton import NUM_KEYPOINTS
from kpeval.exceptions import (
    EmptyDatasetError,
    EmptyDetectionError,
    OutputWriteError,
    ParseError,
    SchemaMismatchError,
)
from kpeval.ingest.formats import optional_float, parse_role, point_from_list, read_json
from kpeval.logging_config import get_logger

if TYPE_CHECKING:
    from pathlib import Path

    from kpeval.core.schema import NativeKeypoint, SchemaMap

logger = get_logger(__name__)

_IDENTITY = identity_schema()


def _keypoint_list(value: Any, expected: int, locus: str) -> list[NativeKeypoint]:
    if not isinstance(value, list):
        raise ParseError("'keypoints' must be an array", locus)
    if len(value) != expected:
        raise ParseError(f"Expected {expected} keypoints, got {len(value)}", locus)
    return [point_from_list(v, f"{locus}[{i}]") for i, v in enumerate(value)]


def ground_truth_from_record(record: Any, locus: str, default_role: Role) -> GroundTruthPose:
    """Decode one ground-truth object of a CanonicalJson frame."""
    if not isinstance(record, dict):
        raise ParseError("Ground truth must be an object", locus)
    role = parse_role(record.get("role"), f"{locus}.role", default_role)
    if role is Role.UNKNOWN:
        raise ParseError("Ground-truth role must be infant or adult", f"{locus}.role")
    points = _keypoint_list(record.get("keypoints"), NUM_KEYPOINTS, f"{locus}.keypoints")
    keypoints = tuple(
        Keypoint2D.absent() if p is None else Keypoint2D(p[0], p[1]) for p in points
    )
    return GroundTruthPose(keypoints=keypoints, role=role)


def check_roles(records: list[Any], locus: str) -> Role:
    """Default role for a frame's ground truths.

    A single unlabelled ground truth is the infant; several must all be labelled.
    """
    unlabelled = sum(1 for r in records if isinstance(r, dict) and not r.get("role"))
    if len(records) > 1 and unlabelled:
        raise ParseError(
            f"{len(records)} ground truths in one frame need explicit roles", locus
        )
    return Role.INFANT


def _optional_size(value: Any, locus: str) -> int | None:
    if value is None:
        return None
    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
        raise ParseError(f"Image size must be a positive integer, got {value!r}", locus)
    return value


def rank_detections(
    items: list[tuple[int | None, int, CanonicalPose]],
) -> tuple[CanonicalPose, ...]:
    """Order detections by explicit rank, then file position, and renumber from 0."""
    ordered = sorted(items, key=lambda t: (t[0] is None, t[0] or 0, t[1]))
    return tuple(pose.with_rank(i) for i, (_, _, pose) in enumerate(ordered))


def _detections_from_records(
    records: Any, schema: SchemaMap, locus: str
) -> tuple[tuple[CanonicalPose, ...], int]:
    if records is None:
        return (), 0
    if not isinstance(records, list):
        raise ParseError("'detections' must be an array", locus)
    items: list[tuple[int | None, int, CanonicalPose]] = []
    dropped = 0
    for i, record in enumerate(records):
        rec_locus = f"{locus}[{i}]"
        if not isinstance(record, dict):
            raise ParseError("Detection must be an object", rec_locus)
        raw_rank = record.get("rank")
        if raw_rank is not None and (not isinstance(raw_rank, int) or raw_rank < 0):
            raise ParseError(f"Rank must be a non-negative integer, got {raw_rank!r}", rec_locus)
        raw_points = record.get("keypoints")
        if isinstance(raw_points, list) and len(raw_points) != schema.native_count:
            raise SchemaMismatchError(
                f"Expected {schema.native_count} keypoints for {schema.method_name}, "
                f"got {len(raw_points)}",
                f"{rec_locus}.keypoints",
            )
        points = _keypoint_list(raw_points, schema.native_count, f"{rec_locus}.keypoints")
        try:
            pose = map_to_canonical(
                points,
                schema,
                score=optional_float(record.get("score"), f"{rec_locus}.score"),
                box_score=optional_float(record.get("box_score"), f"{rec_locus}.box_score"),
                role=parse_role(record.get("role"), f"{rec_locus}.role", Role.UNKNOWN),
            )
        except EmptyDetectionError:
            dropped += 1
            continue
        items.append((raw_rank, i, pose))
    return rank_detections(items), dropped


def dataset_from_document(
    document: Any, source: str, schema: SchemaMap | None = None
) -> SequenceDataset:
    """Build a SequenceDataset from a decoded CanonicalJson document.

    Detection keypoint arrays are read in the layout of ``schema``
    (the canonical layout by default).
    """
    schema = schema or _IDENTITY
    if not isinstance(document, dict):
        raise ParseError("Document must be an object", source)
    sequence_id = document.get("sequence_id")
    if not isinstance(sequence_id, str) or not sequence_id:
        raise ParseError("'sequence_id' must be a non-empty string", source)
    try:
        normalization = NormalizationMode(document.get("normalization", "median"))
    except ValueError:
        raise ParseError(
            f"Unknown normalization {document.get('normalization')!r}", f"{source}:normalization"
        ) from None
    expected = document.get("expected_persons", 1)
    if not isinstance(expected, int) or isinstance(expected, bool) or expected < 1:
        raise ParseError(
            f"'expected_persons' must be a positive integer, got {expected!r}",
            f"{source}:expected_persons",
        )
    metadata = document.get("metadata") or {}
    if not isinstance(metadata, dict):
        raise ParseError("'metadata' must be an object", f"{source}:metadata")
    raw_frames = document.get("frames")
    if not isinstance(raw_frames, list):
        raise ParseError("'frames' must be an array", source)
    if not raw_frames:
        raise EmptyDatasetError(locus=source)

    frames: list[FrameRecord] = []
    dropped = 0
    for i, raw in enumerate(raw_frames):
        locus = f"{source}:frames[{i}]"
        if not isinstance(raw, dict):
            raise ParseError("Frame must be an object", locus)
        frame_id = raw.get("frame_id")
        if not isinstance(frame_id, str) or not frame_id:
            raise ParseError("'frame_id' must be a non-empty string", locus)
        gt_records = raw.get("ground_truths") or []
        if not isinstance(gt_records, list):
            raise ParseError("'ground_truths' must be an array", locus)
        default_role = check_roles(gt_records, locus)
        ground_truths = tuple(
            ground_truth_from_record(r, f"{locus}.ground_truths[{j}]", default_role)
            for j, r in enumerate(gt_records)
        )
        detections, n_dropped = _detections_from_records(
            raw.get("detections"), schema, f"{locus}.detections"
        )
        dropped += n_dropped
        frames.append(
            FrameRecord(
                frame_id=frame_id,
                ground_truths=ground_truths,
                detections=detections,
                width=_optional_size(raw.get("width"), f"{locus}.width"),
                height=_optional_size(raw.get("height"), f"{locus}.height"),
            )
        )
    if dropped:
        logger.warning(
            "Dropped %d detections without any canonical keypoint",
            dropped,
            extra={"code": "empty_detection_dropped", "source": source, "count": dropped},
        )
    return SequenceDataset(
        sequence_id=sequence_id,
        frames=tuple(frames),
        normalization=normalization,
        expected_persons=expected,
        metadata={str(k): str(v) for k, v in metadata.items()},
    )


def load_canonical_json(path: Path, schema: SchemaMap | None = None) -> SequenceDataset:
    """Parse a CanonicalJson file.

    Raises:
        ParseError: If the file is malformed
        DuplicateFrameIdError: If a frame id repeats
        EmptyDatasetError: If the document has no frames
    """
    return dataset_from_document(read_json(path), str(path), schema)


def _point_to_list(kp: Keypoint2D, with_confidence: bool) -> list[float] | None:
    if not kp.present:
        return None
    if with_confidence and kp.confidence is not None:
        return [kp.x, kp.y, kp.confidence]
    return [kp.x, kp.y]


def dataset_to_document(dataset: SequenceDataset) -> dict[str, Any]:
    """Encode a dataset as a CanonicalJson document."""
    frames: list[dict[str, Any]] = []
    for frame in dataset.frames:
        encoded: dict[str, Any] = {"frame_id": frame.frame_id}
        if frame.width is not None:
            encoded["width"] = frame.width
        if frame.height is not None:
            encoded["height"] = frame.height
        encoded["ground_truths"] = [
            {
                "role": gt.role.value,
                "keypoints": [_point_to_list(kp, with_confidence=False) for kp in gt.keypoints],
            }
            for gt in frame.ground_truths
        ]
        detections: list[dict[str, Any]] = []
        for det in frame.detections:
            item: dict[str, Any] = {"rank": det.rank}
            if det.score is not None:
                item["score"] = det.score
            if det.box_score is not None:
                item["box_score"] = det.box_score
            if det.role is not Role.UNKNOWN:
                item["role"] = det.role.value
            item["keypoints"] = [_point_to_list(kp, with_confidence=True) for kp in det.keypoints]
            detections.append(item)
        encoded["detections"] = detections
        frames.append(encoded)

    document: dict[str, Any] = {
        "sequence_id": dataset.sequence_id,
        "expected_persons": dataset.expected_persons,
        "normalization": dataset.normalization.value,
    }
    if dataset.metadata:
        document["metadata"] = dict(dataset.metadata)
    document["frames"] = frames
    return document


def dumps_canonical_json(dataset: SequenceDataset) -> str:
    """Serialize a dataset to CanonicalJson text."""
    return json.dumps(dataset_to_document(dataset), indent=2, ensure_ascii=False) + "\n"


def emit_canonical_json(dataset: SequenceDataset, path: Path) -> None:
    """Write a dataset as a CanonicalJson file.

    Raises:
        OutputWriteError: If the file cannot be written
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps_canonical_json(dataset), encoding="utf-8")
    except OSError as e:
        raise OutputWriteError(f"Cannot write CanonicalJson: {e}", str(path)) from e
