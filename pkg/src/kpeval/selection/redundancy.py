"""Redundant-detection accounting."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence

    from kpeval.core.poses import SequenceDataset


@dataclass(frozen=True)
class RedundancyReport:
    """Detections provided versus expected on frames with any detection.

    ``percent`` is None when no frame has a detection. It is negative when
    the method finds fewer people than expected, which on multi-person
    data mixes redundant and missed people; ``multi_person`` flags that.
    """

    expected: int
    provided: int
    frames_with_detections: int
    percent: float | None
    multi_person: bool = False

    @classmethod
    def from_counts(
        cls, expected: int, provided: int, frames_with_detections: int, multi_person: bool
    ) -> RedundancyReport:
        """Build a report, computing the percentage exactly."""
        percent = None
        if frames_with_detections > 0:
            percent = float(Fraction(100 * (provided - expected), frames_with_detections))
        return cls(expected, provided, frames_with_detections, percent, multi_person)

    def merged(self, other: RedundancyReport) -> RedundancyReport:
        """Pool two reports by summing their counts."""
        return RedundancyReport.from_counts(
            self.expected + other.expected,
            self.provided + other.provided,
            self.frames_with_detections + other.frames_with_detections,
            self.multi_person or other.multi_person,
        )


def redundancy(
    dataset: SequenceDataset, counts: Sequence[int] | None = None
) -> RedundancyReport:
    """Percentage of redundant detections of one sequence.

    Args:
        dataset: Sequence, aligned with a method's detections
        counts: Detections per frame in frame order; defaults to the
            length of each frame's detection list

    Raises:
        ValueError: If ``counts`` does not match the frames
    """
    if counts is None:
        counts = [len(f.detections) for f in dataset.frames]
    if len(counts) != len(dataset.frames):
        msg = f"Got {len(counts)} counts for {len(dataset.frames)} frames"
        raise ValueError(msg)
    if any(c < 0 for c in counts):
        msg = "Detection counts must be >= 0"
        raise ValueError(msg)
    detected = sum(1 for c in counts if c > 0)
    return RedundancyReport.from_counts(
        expected=detected * dataset.expected_persons,
        provided=sum(counts),
        frames_with_detections=detected,
        multi_person=dataset.expected_persons > 1,
    )
