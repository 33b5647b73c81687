"""Domain types: keypoints, poses, frames and sequences.

All types are frozen and safe to share between evaluation workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import TYPE_CHECKING, NamedTuple

from kpeval.core.skeleton import NUM_KEYPOINTS, REAL_KEYPOINTS, KeypointId
from kpeval.exceptions import DuplicateFrameIdError, EmptyDetectionError

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping


class Role(str, Enum):
    """Who a pose belongs to."""

    INFANT = "infant"
    ADULT = "adult"
    UNKNOWN = "unknown"


class EvaluationScope(str, Enum):
    """Which ground truths take part in the evaluation."""

    INFANT = "infant"
    ALL = "all"


class NormalizationMode(str, Enum):
    """How Neck-MidHip errors are normalized."""

    MEDIAN = "median"
    PER_IMAGE = "per_image"


@dataclass(frozen=True, slots=True)
class Keypoint2D:
    """A 2D keypoint in pixels.

    When ``present`` is false the coordinates and confidence carry no meaning.
    """

    x: float = 0.0
    y: float = 0.0
    confidence: float | None = None
    present: bool = True

    def __post_init__(self) -> None:
        if not self.present:
            return
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            msg = f"Present keypoint needs finite coordinates, got ({self.x}, {self.y})"
            raise ValueError(msg)
        if self.confidence is not None and not (
            math.isfinite(self.confidence) and self.confidence >= 0
        ):
            msg = f"Confidence must be finite and >= 0, got {self.confidence}"
            raise ValueError(msg)

    @classmethod
    def absent(cls) -> Keypoint2D:
        """A keypoint that was not placed or not detected."""
        return _ABSENT

    def distance_to(self, other: Keypoint2D) -> float:
        """Euclidean distance in pixels between two present keypoints."""
        return math.hypot(self.x - other.x, self.y - other.y)


_ABSENT = Keypoint2D(present=False)


def _check_keypoints(keypoints: tuple[Keypoint2D, ...]) -> None:
    if len(keypoints) != NUM_KEYPOINTS:
        msg = f"Expected {NUM_KEYPOINTS} keypoints, got {len(keypoints)}"
        raise ValueError(msg)


class _PoseMixin:
    keypoints: tuple[Keypoint2D, ...]

    def __getitem__(self, keypoint: KeypointId) -> Keypoint2D:
        return self.keypoints[keypoint.value]

    @property
    def present_ids(self) -> tuple[KeypointId, ...]:
        """Canonical keypoints that are present."""
        return tuple(k for k in REAL_KEYPOINTS if self.keypoints[k.value].present)

    @property
    def present_count(self) -> int:
        """Number of present canonical keypoints."""
        return sum(1 for kp in self.keypoints if kp.present)


@dataclass(frozen=True)
class CanonicalPose(_PoseMixin):
    """A detection expressed on the canonical skeleton.

    ``score`` is the whole-detection score already resolved by the schema's
    score policy; ``box_score`` keeps the person-detector score when the
    method reports one; ``native_absent`` counts native keypoints the method
    left out, before schema mapping dropped any.
    """

    keypoints: tuple[Keypoint2D, ...]
    score: float | None = None
    rank: int = 0
    role: Role = Role.UNKNOWN
    box_score: float | None = None
    native_absent: int | None = None

    def __post_init__(self) -> None:
        _check_keypoints(self.keypoints)
        if self.rank < 0:
            msg = f"Rank must be >= 0, got {self.rank}"
            raise ValueError(msg)
        if not any(kp.present for kp in self.keypoints):
            raise EmptyDetectionError

    def with_rank(self, rank: int) -> CanonicalPose:
        """Copy with another rank."""
        return replace(self, rank=rank)


@dataclass(frozen=True)
class GroundTruthPose(_PoseMixin):
    """A coder's annotation; only placed keypoints are present."""

    keypoints: tuple[Keypoint2D, ...]
    role: Role = Role.INFANT

    def __post_init__(self) -> None:
        _check_keypoints(self.keypoints)
        if self.role is Role.UNKNOWN:
            msg = "Ground-truth role must be infant or adult"
            raise ValueError(msg)

    @property
    def annotated_count(self) -> int:
        """Number of keypoints the coder placed."""
        return self.present_count


@dataclass(frozen=True)
class FrameRecord:
    """One image: its ground truths and every detection a method emitted.

    Detections are stored sorted by rank; ranks must be 0..n-1.
    """

    frame_id: str
    ground_truths: tuple[GroundTruthPose, ...] = ()
    detections: tuple[CanonicalPose, ...] = ()
    width: int | None = None
    height: int | None = None

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.detections, key=lambda d: d.rank))
        if [d.rank for d in ordered] != list(range(len(ordered))):
            msg = f"Frame {self.frame_id}: detection ranks must be contiguous from 0"
            raise ValueError(msg)
        object.__setattr__(self, "detections", ordered)

    def targets(self, scope: EvaluationScope) -> tuple[GroundTruthPose, ...]:
        """Ground truths that take part in evaluation under ``scope``."""
        if scope is EvaluationScope.ALL:
            return self.ground_truths
        return tuple(gt for gt in self.ground_truths if gt.role is Role.INFANT)

    def with_detections(self, detections: Iterable[CanonicalPose]) -> FrameRecord:
        """Copy with another detection list."""
        return replace(self, detections=tuple(detections))


@dataclass(frozen=True)
class SequenceDataset:
    """Ordered frames of one recording plus its normalization policy."""

    sequence_id: str
    frames: tuple[FrameRecord, ...]
    normalization: NormalizationMode = NormalizationMode.MEDIAN
    expected_persons: int = 1
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for frame in self.frames:
            if frame.frame_id in seen:
                raise DuplicateFrameIdError(
                    f"Frame id {frame.frame_id!r} occurs more than once",
                    self.sequence_id,
                )
            seen.add(frame.frame_id)
        if self.expected_persons < 1:
            msg = f"expected_persons must be >= 1, got {self.expected_persons}"
            raise ValueError(msg)
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))

    @property
    def frame_ids(self) -> tuple[str, ...]:
        """Frame ids in sequence order."""
        return tuple(f.frame_id for f in self.frames)

    def with_frames(self, frames: Iterable[FrameRecord]) -> SequenceDataset:
        """Copy with another frame list."""
        return replace(self, frames=tuple(frames))

    def with_normalization(self, mode: NormalizationMode) -> SequenceDataset:
        """Copy with another normalization mode."""
        return replace(self, normalization=mode)


class VirtualPoints(NamedTuple):
    """Derived Neck and MidHip points."""

    neck: Keypoint2D
    mid_hip: Keypoint2D


def _midpoint(a: Keypoint2D, b: Keypoint2D) -> Keypoint2D:
    if not (a.present and b.present):
        return Keypoint2D.absent()
    confidence = None
    if a.confidence is not None and b.confidence is not None:
        confidence = (a.confidence + b.confidence) / 2.0
    return Keypoint2D((a.x + b.x) / 2.0, (a.y + b.y) / 2.0, confidence)


def derive_virtual_points(pose: CanonicalPose | GroundTruthPose) -> VirtualPoints:
    """Derive Neck and MidHip as shoulder and hip midpoints.

    A virtual point is absent when either of its two sources is absent.
    """
    return VirtualPoints(
        neck=_midpoint(pose[KeypointId.LEFT_SHOULDER], pose[KeypointId.RIGHT_SHOULDER]),
        mid_hip=_midpoint(pose[KeypointId.LEFT_HIP], pose[KeypointId.RIGHT_HIP]),
    )
