"""Detection selection strategies for single-target evaluation."""

from __future__ import annotations

import math
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from kpeval.core.poses import CanonicalPose, FrameRecord, GroundTruthPose


class SelectionStrategy(str, Enum):
    """Which of a frame's detections stands for the target."""

    FIRST_RANK = "first"
    HIGHEST_SCORE = "score"
    ORACLE_BEST = "oracle"


def mean_keypoint_distance(det: CanonicalPose, gt: GroundTruthPose) -> float:
    """Mean Euclidean distance over keypoints present in both; inf when none are."""
    common = [k for k in gt.present_ids if det[k].present]
    if not common:
        return math.inf
    return float(np.mean([det[k].distance_to(gt[k]) for k in common]))


def select_detection(
    frame: FrameRecord,
    strategy: SelectionStrategy,
    gt: GroundTruthPose | None = None,
) -> CanonicalPose | None:
    """Pick one detection of ``frame`` or None when it has none.

    FIRST_RANK takes rank 0. HIGHEST_SCORE takes the highest score, ties
    to the lower rank; without any score it behaves as FIRST_RANK.
    ORACLE_BEST takes the smallest mean keypoint distance to ``gt``, ties
    to the lower rank; with no common keypoint anywhere it takes rank 0.

    Raises:
        ValueError: If ORACLE_BEST is requested without a ground truth
    """
    if not frame.detections:
        if strategy is SelectionStrategy.ORACLE_BEST and gt is None:
            msg = "Oracle selection needs a ground truth"
            raise ValueError(msg)
        return None
    match strategy:
        case SelectionStrategy.FIRST_RANK:
            return frame.detections[0]
        case SelectionStrategy.HIGHEST_SCORE:
            scored = [d for d in frame.detections if d.score is not None]
            if not scored:
                return frame.detections[0]
            return min(scored, key=lambda d: (-(d.score or 0.0), d.rank))
        case SelectionStrategy.ORACLE_BEST:
            if gt is None:
                msg = "Oracle selection needs a ground truth"
                raise ValueError(msg)
            target = gt
            return min(
                frame.detections, key=lambda d: (mean_keypoint_distance(d, target), d.rank)
            )
