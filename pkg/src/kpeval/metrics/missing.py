"""Missing-data percentage over detections and keypoints."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

from kpeval.core.skeleton import NUM_KEYPOINTS

if TYPE_CHECKING:
    from collections.abc import Sequence

    from kpeval.core.poses import CanonicalPose, SequenceDataset


@dataclass(frozen=True)
class MissingDataReport:
    """Missing detections and keypoints relative to everything a method could output.

    A missing detection counts as all ``method_keypoint_count`` keypoints missing.
    """

    images: int
    method_keypoint_count: int
    missing_detections: int
    missing_keypoints: int

    def __post_init__(self) -> None:
        if self.method_keypoint_count < 1:
            msg = f"method_keypoint_count must be positive, got {self.method_keypoint_count}"
            raise ValueError(msg)

    def _part(self, missing: int) -> float:
        if self.images == 0:
            return 0.0
        return float(Fraction(100 * missing, self.images * self.method_keypoint_count))

    @property
    def percent(self) -> float:
        """Total missing data in percent."""
        return self._part(
            self.missing_detections * self.method_keypoint_count + self.missing_keypoints
        )

    @property
    def detection_percent(self) -> float:
        """Share of the total caused by missing detections."""
        return self._part(self.missing_detections * self.method_keypoint_count)

    @property
    def keypoint_percent(self) -> float:
        """Share of the total caused by missing keypoints."""
        return self._part(self.missing_keypoints)

    def merged(self, other: MissingDataReport) -> MissingDataReport:
        """Pool two reports of the same method."""
        if other.method_keypoint_count != self.method_keypoint_count:
            msg = "Cannot pool reports with different keypoint counts"
            raise ValueError(msg)
        return MissingDataReport(
            self.images + other.images,
            self.method_keypoint_count,
            self.missing_detections + other.missing_detections,
            self.missing_keypoints + other.missing_keypoints,
        )


def absent_keypoints(pose: CanonicalPose) -> int:
    """Keypoints a detection is missing, over the method's native layout when known."""
    if pose.native_absent is not None:
        return pose.native_absent
    return NUM_KEYPOINTS - pose.present_count


def missing_data(
    dataset: SequenceDataset,
    method_keypoint_count: int,
    selected: Sequence[CanonicalPose | None],
) -> MissingDataReport:
    """Missing data of one sequence given the selected detection of every frame.

    Raises:
        ValueError: If ``selected`` does not have one entry per frame
    """
    if len(selected) != len(dataset.frames):
        msg = f"Got {len(selected)} selections for {len(dataset.frames)} frames"
        raise ValueError(msg)
    return MissingDataReport(
        images=len(dataset.frames),
        method_keypoint_count=method_keypoint_count,
        missing_detections=sum(1 for pose in selected if pose is None),
        missing_keypoints=sum(absent_keypoints(pose) for pose in selected if pose is not None),
    )
