"""Detection parsing: every raw detection goes through the method's SchemaMap."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any

from kpeval.core.poses import CanonicalPose, Role
from kpeval.core.schema import map_to_canonical
from kpeval.core.skeleton import NUM_KEYPOINTS, KeypointId
from kpeval.exceptions import EmptyDetectionError, ParseError
from kpeval.ingest.canonical import load_canonical_json, rank_detections
from kpeval.ingest.formats import (
    DetectionFile,
    FormatKind,
    optional_float,
    parse_role,
    read_json,
    sequence_id_from_path,
    triples_from_flat,
)
from kpeval.ingest.wide_csv import iter_rows, keypoint_prefixes, read_wide_csv
from kpeval.logging_config import get_logger

if TYPE_CHECKING:
    from kpeval.core.schema import NativeKeypoint, SchemaMap

logger = get_logger(__name__)


class _Collector:
    """Accumulates raw detections per frame in file order."""

    def __init__(self, schema: SchemaMap, source: str) -> None:
        self.schema = schema
        self.source = source
        self.frames: dict[str, list[tuple[int | None, int, CanonicalPose]]] = {}
        self.dropped = 0
        self._position = 0

    def touch(self, frame_id: str) -> None:
        self.frames.setdefault(frame_id, [])

    def add(
        self,
        frame_id: str,
        points: list[NativeKeypoint],
        *,
        rank: int | None = None,
        score: float | None = None,
        box_score: float | None = None,
        role: Role = Role.UNKNOWN,
    ) -> None:
        self.touch(frame_id)
        self._position += 1
        try:
            pose = map_to_canonical(
                points, self.schema, score=score, box_score=box_score, role=role
            )
        except EmptyDetectionError:
            self.dropped += 1
            return
        self.frames[frame_id].append((rank, self._position, pose))

    def build(self, method_name: str, sequence_id: str) -> DetectionFile:
        if self.dropped:
            logger.warning(
                "Dropped %d detections without any canonical keypoint",
                self.dropped,
                extra={
                    "code": "empty_detection_dropped",
                    "source": self.source,
                    "count": self.dropped,
                },
            )
        return DetectionFile(
            method_name=method_name,
            sequence_id=sequence_id,
            frames={fid: rank_detections(items) for fid, items in self.frames.items()},
            native_count=self.schema.native_count,
            source=self.source,
            dropped_empty=self.dropped,
        )


def _rank_field(value: Any, locus: str) -> int | None:
    if value is None:
        return None
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ParseError(f"Rank must be a non-negative integer, got {value!r}", locus)
    return value


def _from_canonical(path: Path, schema: SchemaMap, method_name: str) -> DetectionFile:
    dataset = load_canonical_json(path, schema)
    return DetectionFile(
        method_name=method_name,
        sequence_id=dataset.sequence_id,
        frames={f.frame_id: f.detections for f in dataset.frames},
        native_count=schema.native_count,
        source=str(path),
    )


def _from_coco(path: Path, collector: _Collector) -> None:
    document = read_json(path)
    if not isinstance(document, list):
        raise ParseError("Expected an array of results", str(path))
    for i, record in enumerate(document):
        locus = f"{path}:[{i}]"
        if not isinstance(record, dict) or "image_id" not in record:
            raise ParseError("Result must be an object with 'image_id'", locus)
        collector.add(
            str(record["image_id"]),
            triples_from_flat(
                record.get("keypoints"), collector.schema.native_count, f"{locus}.keypoints"
            ),
            rank=_rank_field(record.get("rank"), f"{locus}.rank"),
            score=optional_float(record.get("score"), f"{locus}.score"),
            box_score=optional_float(record.get("box_score"), f"{locus}.box_score"),
            role=parse_role(record.get("role"), f"{locus}.role", Role.UNKNOWN),
        )


def _from_frame_directory(path: Path, collector: _Collector) -> None:
    if not path.is_dir():
        raise ParseError("Expected a directory of per-frame JSON files", str(path))
    for file in sorted(path.glob("*.json")):
        document = read_json(file)
        people = document.get("people", []) if isinstance(document, dict) else None
        if not isinstance(people, list):
            raise ParseError("Expected an object with a 'people' array", str(file))
        collector.touch(file.stem)
        for i, person in enumerate(people):
            locus = f"{file}:people[{i}]"
            extra: dict[str, Any] = {}
            if isinstance(person, dict):
                flat = person.get("pose_keypoints_2d", person.get("keypoints"))
                extra = person
            elif isinstance(person, list):
                flat = person
            else:
                raise ParseError("Person entry must be an array or an object", locus)
            collector.add(
                file.stem,
                triples_from_flat(flat, collector.schema.native_count, locus),
                rank=_rank_field(extra.get("rank"), f"{locus}.rank"),
                score=optional_float(extra.get("score"), f"{locus}.score"),
                box_score=optional_float(extra.get("box_score"), f"{locus}.box_score"),
                role=parse_role(extra.get("role"), f"{locus}.role", Role.UNKNOWN),
            )


def wide_csv_prefixes(schema: SchemaMap) -> list[str | None]:
    """Column prefixes of each native keypoint in a detection WideCsv.

    17-point layouts use canonical names; other layouts use ``kp<index>``.
    """
    if schema.native_count == NUM_KEYPOINTS:
        return [KeypointId(i).canonical_name for i in range(NUM_KEYPOINTS)]
    return [f"kp{i}" for i in range(schema.native_count)]


def _from_wide_csv(path: Path, collector: _Collector) -> None:
    table = read_wide_csv(path)
    prefixes = wide_csv_prefixes(collector.schema)
    if not keypoint_prefixes(table) & {p for p in prefixes if p is not None}:
        raise ParseError(
            f"No keypoint columns for the {collector.schema.method_name} layout", f"{path}:1"
        )
    for row in iter_rows(table, prefixes, str(path)):
        if row.is_empty:
            collector.touch(row.frame_id)
            continue
        collector.add(
            row.frame_id,
            row.points,
            rank=row.rank,
            score=row.score,
            box_score=row.box_score,
            role=parse_role(row.role, f"{path}:{row.line}:role", Role.UNKNOWN),
        )


def parse_detections(
    path: Path | str,
    fmt: FormatKind,
    schema: SchemaMap,
    *,
    method_name: str | None = None,
    sequence_id: str | None = None,
) -> DetectionFile:
    """Parse one method's detections for one sequence.

    Ranks follow explicit rank fields, else file order, and are renumbered
    contiguously from 0. Detections left without any canonical keypoint
    after mapping are dropped with a warning.

    Args:
        path: Detection file, or directory for PerFrameJsonDirectory
        fmt: Format of the file
        schema: Layout of the method's keypoints
        method_name: Name to report; defaults to the schema's method name
        sequence_id: Sequence id for formats that do not embed one;
            defaults to the file stem or directory name

    Raises:
        ParseError: If the input is malformed
        SchemaMismatchError: If keypoint arrays do not fit the schema
    """
    path = Path(path)
    name = method_name or schema.method_name
    if fmt is FormatKind.CANONICAL_JSON:
        result = _from_canonical(path, schema, name)
    else:
        collector = _Collector(schema, str(path))
        match fmt:
            case FormatKind.COCO_RESULT_JSON:
                _from_coco(path, collector)
            case FormatKind.PER_FRAME_JSON_DIRECTORY:
                _from_frame_directory(path, collector)
            case FormatKind.WIDE_CSV:
                _from_wide_csv(path, collector)
        result = collector.build(name, sequence_id or sequence_id_from_path(path))
    logger.debug(
        "Parsed %d detections of %s over %d frames",
        result.detection_count,
        name,
        len(result.frames),
    )
    return result
