"""Per-frame evaluation results, the input of aggregation."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Mapping

    from kpeval.core.skeleton import KeypointId
    from kpeval.selection.matching import FrameAssignment


@dataclass(frozen=True)
class Agreement:
    """Whether the three selection strategies picked the same detection."""

    first_score: bool
    first_oracle: bool
    score_oracle: bool


@dataclass(frozen=True)
class TargetResult:
    """Measurements for one evaluated ground truth of a frame.

    ``nmh`` holds fractions of the torso length; it is empty when no
    detection was selected or no normalizer exists.
    """

    oks: float | None = None
    ks: Mapping[KeypointId, float] = field(default_factory=dict)
    nmh: Mapping[KeypointId, float] = field(default_factory=dict)
    score: float | None = None
    agreement: Agreement | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "ks", MappingProxyType(dict(self.ks)))
        object.__setattr__(self, "nmh", MappingProxyType(dict(self.nmh)))


@dataclass(frozen=True)
class FrameResult:
    """Everything one method produced and scored on one frame.

    ``selected_absent`` is None for a missing detection, else the number of
    keypoints the selected detection lacks. ``assignment`` is None for
    methods whose detections cannot be ranked (mixture averages).
    """

    method: str
    dataset_id: str
    sequence_id: str
    frame_id: str
    detection_count: int
    expected_persons: int
    method_keypoint_count: int
    selected_absent: int | None
    targets: tuple[TargetResult, ...] = ()
    assignment: FrameAssignment | None = None
    input_mode: str = "images"
    fps: float | None = None

    @property
    def sort_key(self) -> tuple[str, str, str, str]:
        """Deterministic reduction order."""
        return (self.method, self.dataset_id, self.sequence_id, self.frame_id)
