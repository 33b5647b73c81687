"""Mapping from method-native keypoint layouts to the canonical skeleton.

A SchemaMap is declarative: plain one-to-one entries, composite entries
that average several native points, and the policy that decides where a
detection's score comes from. Built-in maps cover the layouts the common
estimators emit; anything else is loaded from a YAML file.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any

import numpy as np
import yaml

from kpeval.core.poses import CanonicalPose, Keypoint2D, Role
from kpeval.core.skeleton import NUM_KEYPOINTS, REAL_KEYPOINTS, KeypointId
from kpeval.exceptions import InvalidIndexError, ParseError, SchemaMismatchError
from kpeval.logging_config import get_logger

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = get_logger(__name__)

# A native keypoint as read from disk: (x, y, confidence) or None when the
# file marks the point as missing.
NativeKeypoint = tuple[float, float, float | None] | None


class ScorePolicy(str, Enum):
    """Where a detection's whole-body score comes from."""

    NATIVE_SCORE = "native_score"
    MEDIAN_OF_CONFIDENCES = "median_of_confidences"
    DETECTOR_BOX_SCORE = "detector_box_score"
    NO_SCORE = "no_score"


@dataclass(frozen=True)
class SchemaMap:
    """Declarative native-to-canonical keypoint mapping.

    Attributes:
        method_name: Name of the pose estimation method
        native_count: Number of keypoints in the native layout (m_kp)
        entries: (native index, canonical keypoint) pairs
        composite_entries: (canonical keypoint, native indices) averaged pairs
        score_policy: How the detection score is obtained
    """

    method_name: str
    native_count: int
    entries: tuple[tuple[int, KeypointId], ...]
    composite_entries: tuple[tuple[KeypointId, tuple[int, ...]], ...] = ()
    score_policy: ScorePolicy = ScorePolicy.NATIVE_SCORE

    def __post_init__(self) -> None:
        if self.native_count < 1:
            raise SchemaMismatchError(
                f"native_count must be positive, got {self.native_count}", self.method_name
            )
        targets: list[KeypointId] = []
        indices: list[int] = [i for i, _ in self.entries]
        for kid, sources in self.composite_entries:
            if not sources:
                raise SchemaMismatchError(
                    f"Composite entry for {kid.canonical_name} has no sources", self.method_name
                )
            indices.extend(sources)
            targets.append(kid)
        targets.extend(k for _, k in self.entries)
        for index in indices:
            if not 0 <= index < self.native_count:
                raise InvalidIndexError(
                    f"Native index {index} outside [0, {self.native_count})", self.method_name
                )
        virtual = [k.canonical_name for k in targets if k.is_virtual]
        if virtual:
            raise SchemaMismatchError(
                f"Virtual keypoints cannot be mapped: {', '.join(virtual)}", self.method_name
            )
        if len(set(targets)) != len(targets):
            raise SchemaMismatchError(
                "A canonical keypoint is mapped more than once", self.method_name
            )

    @property
    def mapped_keypoints(self) -> frozenset[KeypointId]:
        """Canonical keypoints this layout can express."""
        return frozenset(
            [k for _, k in self.entries] + [k for k, _ in self.composite_entries]
        )

    def renamed(self, method_name: str) -> SchemaMap:
        """Copy of the map for another method name."""
        return SchemaMap(
            method_name,
            self.native_count,
            self.entries,
            self.composite_entries,
            self.score_policy,
        )


def native_to_keypoint(native: NativeKeypoint) -> Keypoint2D:
    """Decode a native keypoint, applying the zero-confidence origin sentinel."""
    if native is None:
        return Keypoint2D.absent()
    x, y, conf = native
    # (0, 0) with zero confidence is the usual "not detected" sentinel
    if conf == 0 and x == 0 and y == 0:
        return Keypoint2D.absent()
    return Keypoint2D(float(x), float(y), None if conf is None else float(conf))


def _average(points: Sequence[Keypoint2D]) -> Keypoint2D:
    if not all(p.present for p in points):
        return Keypoint2D.absent()
    confs = [p.confidence for p in points]
    confidence = None
    if all(c is not None for c in confs):
        confidence = float(np.mean([c for c in confs if c is not None]))
    return Keypoint2D(
        float(np.mean([p.x for p in points])),
        float(np.mean([p.y for p in points])),
        confidence,
    )


def median_confidence(keypoints: Sequence[Keypoint2D]) -> float | None:
    """Median of the confidences of present keypoints (None when there are none)."""
    confs = [kp.confidence for kp in keypoints if kp.present and kp.confidence is not None]
    if not confs:
        return None
    return float(np.median(confs))


def resolve_score(
    policy: ScorePolicy,
    keypoints: Sequence[Keypoint2D],
    score: float | None = None,
    box_score: float | None = None,
) -> float | None:
    """Whole-detection score under ``policy``.

    DETECTOR_BOX_SCORE never falls back to the native score: a detection
    without a box score stays unscored and ranks after every scored one.
    """
    match policy:
        case ScorePolicy.NATIVE_SCORE:
            return score
        case ScorePolicy.MEDIAN_OF_CONFIDENCES:
            return median_confidence(keypoints)
        case ScorePolicy.DETECTOR_BOX_SCORE:
            return box_score
        case ScorePolicy.NO_SCORE:
            return None


def map_to_canonical(
    native: Sequence[NativeKeypoint],
    schema: SchemaMap,
    *,
    score: float | None = None,
    box_score: float | None = None,
    rank: int = 0,
    role: Role = Role.UNKNOWN,
) -> CanonicalPose:
    """Map a native keypoint list onto the canonical skeleton.

    Args:
        native: Native keypoints in the method's order
        schema: Layout description of the method
        score: Whole-detection score reported by the method, if any
        box_score: Person-detector box score reported by the method, if any
        rank: Output order of the detection within its frame
        role: Role label of the detection

    Returns:
        CanonicalPose with its score resolved by the schema's score policy

    Raises:
        SchemaMismatchError: If the native list length differs from native_count
        EmptyDetectionError: If no canonical keypoint ends up present
    """
    if len(native) != schema.native_count:
        raise SchemaMismatchError(
            f"Expected {schema.native_count} native keypoints, got {len(native)}",
            schema.method_name,
        )
    points = [native_to_keypoint(n) for n in native]
    canonical = [Keypoint2D.absent()] * NUM_KEYPOINTS
    for index, kid in schema.entries:
        canonical[kid.value] = points[index]
    for kid, sources in schema.composite_entries:
        canonical[kid.value] = _average([points[i] for i in sources])

    return CanonicalPose(
        keypoints=tuple(canonical),
        score=resolve_score(schema.score_policy, canonical, score, box_score),
        rank=rank,
        role=role,
        box_score=box_score,
        native_absent=sum(1 for p in points if not p.present),
    )


def identity_schema(
    method_name: str = "coco17", score_policy: ScorePolicy = ScorePolicy.NATIVE_SCORE
) -> SchemaMap:
    """Schema of a method that already emits the canonical 17 keypoints."""
    return SchemaMap(
        method_name=method_name,
        native_count=NUM_KEYPOINTS,
        entries=tuple((k.value, k) for k in REAL_KEYPOINTS),
        score_policy=score_policy,
    )


K = KeypointId

# OpenPose COCO-18: index 1 is Neck, which is not a canonical real keypoint
_OPENPOSE18 = (
    (0, K.NOSE), (2, K.RIGHT_SHOULDER), (3, K.RIGHT_ELBOW), (4, K.RIGHT_WRIST),
    (5, K.LEFT_SHOULDER), (6, K.LEFT_ELBOW), (7, K.LEFT_WRIST), (8, K.RIGHT_HIP),
    (9, K.RIGHT_KNEE), (10, K.RIGHT_ANKLE), (11, K.LEFT_HIP), (12, K.LEFT_KNEE),
    (13, K.LEFT_ANKLE), (14, K.RIGHT_EYE), (15, K.LEFT_EYE), (16, K.RIGHT_EAR),
    (17, K.LEFT_EAR),
)  # fmt: skip

# MediaPipe/BlazePose 33: face, hand and foot extras are dropped
_MEDIAPIPE33 = (
    (0, K.NOSE), (2, K.LEFT_EYE), (5, K.RIGHT_EYE), (7, K.LEFT_EAR), (8, K.RIGHT_EAR),
    (11, K.LEFT_SHOULDER), (12, K.RIGHT_SHOULDER), (13, K.LEFT_ELBOW),
    (14, K.RIGHT_ELBOW), (15, K.LEFT_WRIST), (16, K.RIGHT_WRIST), (23, K.LEFT_HIP),
    (24, K.RIGHT_HIP), (25, K.LEFT_KNEE), (26, K.RIGHT_KNEE), (27, K.LEFT_ANKLE),
    (28, K.RIGHT_ANKLE),
)  # fmt: skip

# DeeperCut MPII-14: chin (12) and forehead (13) have no canonical counterpart
_DEEPERCUT14 = (
    (0, K.RIGHT_ANKLE), (1, K.RIGHT_KNEE), (2, K.RIGHT_HIP), (3, K.LEFT_HIP),
    (4, K.LEFT_KNEE), (5, K.LEFT_ANKLE), (6, K.RIGHT_WRIST), (7, K.RIGHT_ELBOW),
    (8, K.RIGHT_SHOULDER), (9, K.LEFT_SHOULDER), (10, K.LEFT_ELBOW), (11, K.LEFT_WRIST),
)  # fmt: skip

BUILTIN_SCHEMAS: dict[str, SchemaMap] = {
    "coco17": identity_schema("coco17"),
    "coco17-median": identity_schema("coco17-median", ScorePolicy.MEDIAN_OF_CONFIDENCES),
    "coco17-box": identity_schema("coco17-box", ScorePolicy.DETECTOR_BOX_SCORE),
    "openpose18": SchemaMap("openpose18", 18, _OPENPOSE18),
    "mediapipe33": SchemaMap("mediapipe33", 33, _MEDIAPIPE33, score_policy=ScorePolicy.NO_SCORE),
    "deepercut14": SchemaMap(
        "deepercut14", 14, _DEEPERCUT14, score_policy=ScorePolicy.MEDIAN_OF_CONFIDENCES
    ),
}


def _keypoint_field(value: Any, locus: str) -> KeypointId:
    try:
        return KeypointId.from_name(str(value))
    except KeyError as e:
        raise ParseError(str(e), locus) from None


def schema_from_dict(data: dict[str, Any], source: str = "<schema>") -> SchemaMap:
    """Build a SchemaMap from its YAML/JSON document form.

    Document shape::

        method: openpose
        native_count: 18
        score_policy: native_score
        entries: {0: nose, 2: right_shoulder}
        composites: {left_hip: [11, 12]}
    """
    try:
        method = str(data["method"])
        native_count = int(data["native_count"])
        entries_raw = data.get("entries") or {}
        composites_raw = data.get("composites") or {}
        policy = ScorePolicy(str(data.get("score_policy", ScorePolicy.NATIVE_SCORE.value)))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"Invalid schema document: {e}", source) from e
    if not isinstance(entries_raw, dict) or not isinstance(composites_raw, dict):
        raise ParseError("'entries' and 'composites' must be mappings", source)

    entries = tuple(
        (int(index), _keypoint_field(name, f"{source}:entries.{index}"))
        for index, name in sorted(entries_raw.items(), key=lambda item: int(item[0]))
    )
    composites = tuple(
        (
            _keypoint_field(name, f"{source}:composites.{name}"),
            tuple(int(i) for i in sources),
        )
        for name, sources in composites_raw.items()
    )
    return SchemaMap(method, native_count, entries, composites, policy)


def load_schema(reference: str, method_name: str | None = None) -> SchemaMap:
    """Resolve a built-in schema name or load a SchemaMap file.

    Args:
        reference: Built-in name (``coco17``, ``openpose18``...) or a YAML/JSON path
        method_name: Optional name to give the resulting map

    Raises:
        ParseError: If the file cannot be read or is not a valid schema
    """
    if reference in BUILTIN_SCHEMAS:
        schema = BUILTIN_SCHEMAS[reference]
    else:
        path = Path(reference)
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except (OSError, yaml.YAMLError) as e:
            raise ParseError(f"Cannot load schema: {e}", reference) from e
        if not isinstance(data, dict):
            raise ParseError("Schema file must contain a mapping", reference)
        schema = schema_from_dict(data, reference)
        logger.debug("Loaded schema %s from %s", schema.method_name, reference)
    if method_name is not None and method_name != schema.method_name:
        schema = schema.renamed(method_name)
    return schema


__all__ = [
    "BUILTIN_SCHEMAS",
    "NativeKeypoint",
    "SchemaMap",
    "ScorePolicy",
    "identity_schema",
    "load_schema",
    "map_to_canonical",
    "median_confidence",
    "native_to_keypoint",
    "resolve_score",
    "schema_from_dict",
]
