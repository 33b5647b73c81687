"""Detection selection, matching, redundancy and mixture averaging."""

from kpeval.selection.matching import (
    FrameAssignment,
    MatchedPair,
    assign_to_ground_truths,
    detection_order_key,
)
from kpeval.selection.mixture import MIXTURE_METHOD, mixture_average
from kpeval.selection.redundancy import RedundancyReport, redundancy
from kpeval.selection.strategies import (
    SelectionStrategy,
    mean_keypoint_distance,
    select_detection,
)

__all__ = [
    "MIXTURE_METHOD",
    "FrameAssignment",
    "MatchedPair",
    "RedundancyReport",
    "SelectionStrategy",
    "assign_to_ground_truths",
    "detection_order_key",
    "mean_keypoint_distance",
    "mixture_average",
    "redundancy",
    "select_detection",
]
