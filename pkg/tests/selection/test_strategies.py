"""Tests for detection selection."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import pytest

from kpeval.core.poses import FrameRecord
from kpeval.core.skeleton import REAL_KEYPOINTS, KeypointId
from kpeval.selection.strategies import (
    SelectionStrategy,
    mean_keypoint_distance,
    select_detection,
)

if TYPE_CHECKING:
    from tests.conftest import DetectionFactory, PoseFactory


class TestSelectDetection:
    """Tests for select_detection."""

    def test_first_rank_and_highest_score(self, make_det: DetectionFactory) -> None:
        """Test that rank and score pick different detections."""
        first = make_det(score=0.4, rank=0)
        best = make_det(dx=50, score=0.9, rank=1)
        frame = FrameRecord("f", detections=(first, best))

        assert select_detection(frame, SelectionStrategy.FIRST_RANK) is first
        assert select_detection(frame, SelectionStrategy.HIGHEST_SCORE) is best

    def test_score_tie_goes_to_lower_rank(self, make_det: DetectionFactory) -> None:
        """Test that equal scores fall back to rank."""
        a = make_det(score=0.5, rank=0)
        b = make_det(dx=10, score=0.5, rank=1)
        frame = FrameRecord("f", detections=(a, b))
        assert select_detection(frame, SelectionStrategy.HIGHEST_SCORE) is a

    def test_unscored_falls_back_to_rank(self, make_det: DetectionFactory) -> None:
        """Test that HIGHEST_SCORE without scores takes rank 0."""
        a = make_det(rank=0)
        frame = FrameRecord("f", detections=(a, make_det(dx=10, rank=1)))
        assert select_detection(frame, SelectionStrategy.HIGHEST_SCORE) is a

    def test_oracle_best(self, make_det: DetectionFactory, make_gt: PoseFactory) -> None:
        """Test that the oracle takes the detection closest to the ground truth."""
        far = make_det(dx=30, score=0.9, rank=0)
        near = make_det(dx=2, score=0.1, rank=1)
        frame = FrameRecord("f", ground_truths=(make_gt(),), detections=(far, near))
        assert select_detection(frame, SelectionStrategy.ORACLE_BEST, make_gt()) is near

    def test_oracle_needs_ground_truth(self, make_det: DetectionFactory) -> None:
        """Test that the oracle cannot run without a ground truth."""
        frame = FrameRecord("f", detections=(make_det(),))
        with pytest.raises(ValueError, match="ground truth"):
            select_detection(frame, SelectionStrategy.ORACLE_BEST)

    @pytest.mark.parametrize("strategy", [SelectionStrategy.FIRST_RANK, "score"])
    def test_empty_frame(self, strategy: SelectionStrategy | str) -> None:
        """Test that a frame without detections selects nothing."""
        assert select_detection(FrameRecord("f"), SelectionStrategy(strategy)) is None


class TestMeanKeypointDistance:
    """Tests for mean_keypoint_distance."""

    def test_translation(self, make_det: DetectionFactory, make_gt: PoseFactory) -> None:
        """Test that a 3-4 shift gives mean distance 5."""
        assert mean_keypoint_distance(make_det(dx=3, dy=4), make_gt()) == pytest.approx(5.0)

    def test_no_common_keypoints(self, make_det: DetectionFactory, make_gt: PoseFactory) -> None:
        """Test that disjoint poses are infinitely far apart."""
        det = make_det(absent=tuple(k for k in REAL_KEYPOINTS if k is not KeypointId.NOSE))
        gt = make_gt(absent=(KeypointId.NOSE,))
        assert math.isinf(mean_keypoint_distance(det, gt))
