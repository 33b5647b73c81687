"""Tests for keypoint similarity and OKS."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import pytest

from kpeval.core.poses import CanonicalPose, GroundTruthPose, Keypoint2D
from kpeval.core.skeleton import NUM_KEYPOINTS, REAL_KEYPOINTS, KeypointId
from kpeval.exceptions import DegenerateScaleError, NoCommonKeypointsError
from kpeval.harness.oracles import oracle_oks
from kpeval.harness.prng import Xorshift128
from kpeval.metrics.oks import bbox_scale, keypoint_similarity, oks

if TYPE_CHECKING:
    from kpeval.core.skeleton import SigmaTable
    from kpeval.report.circles import ReferencePose
    from tests.conftest import DetectionFactory, PoseFactory


def _two_point_gt(a: tuple[float, float], b: tuple[float, float]) -> GroundTruthPose:
    keypoints = [Keypoint2D.absent()] * NUM_KEYPOINTS
    keypoints[KeypointId.NOSE] = Keypoint2D(*a)
    keypoints[KeypointId.LEFT_ANKLE] = Keypoint2D(*b)
    return GroundTruthPose(keypoints=tuple(keypoints))


def _random_pair(
    rng: Xorshift128, reference: ReferencePose
) -> tuple[CanonicalPose, GroundTruthPose]:
    gt_points: list[Keypoint2D] = []
    det_points: list[Keypoint2D] = []
    for k in REAL_KEYPOINTS:
        x, y = reference.points[k]
        gt_points.append(Keypoint2D.absent() if rng.chance(0.2) else Keypoint2D(x, y))
        jitter_x = 80.0 * (rng.uniform() - 0.5)
        jitter_y = 80.0 * (rng.uniform() - 0.5)
        lost = rng.chance(0.2) and k is not KeypointId.NOSE
        det_points.append(Keypoint2D.absent() if lost else Keypoint2D(x + jitter_x, y + jitter_y))
    return CanonicalPose(keypoints=tuple(det_points)), GroundTruthPose(keypoints=tuple(gt_points))


class TestKeypointSimilarity:
    """Tests for keypoint_similarity."""

    def test_zero_distance(self) -> None:
        """Test that a perfect keypoint has similarity 1."""
        assert keypoint_similarity(0.0, 100.0, 0.05) == 1.0

    def test_one_over_e(self) -> None:
        """Test the similarity at d = s * c * sqrt(2)."""
        s, c = 120.0, 0.158
        assert keypoint_similarity(s * c * math.sqrt(2), s, c) == pytest.approx(math.exp(-1))

    def test_monotone_in_distance(self) -> None:
        """Test that similarity falls as the distance grows."""
        values = [keypoint_similarity(d, 100.0, 0.1) for d in (0, 1, 5, 20, 80)]
        assert values == sorted(values, reverse=True)

    def test_non_positive_scale(self) -> None:
        """Test that a zero scale is degenerate."""
        with pytest.raises(DegenerateScaleError):
            keypoint_similarity(1.0, 0.0, 0.1)

    def test_negative_distance(self) -> None:
        """Test that distances cannot be negative."""
        with pytest.raises(ValueError, match="Distance"):
            keypoint_similarity(-1.0, 10.0, 0.1)


class TestBboxScale:
    """Tests for bbox_scale."""

    @pytest.mark.parametrize(
        ("a", "b"),
        [((0.0, 0.0), (100.0, 100.0)), ((0.0, 0.0), (25.0, 400.0))],
    )
    def test_span(self, a: tuple[float, float], b: tuple[float, float]) -> None:
        """Test that the scale is the square root of the spanned area."""
        assert bbox_scale(_two_point_gt(a, b)) == pytest.approx(100.0)

    def test_single_keypoint(self) -> None:
        """Test that one annotated keypoint has no scale."""
        keypoints = [Keypoint2D.absent()] * NUM_KEYPOINTS
        keypoints[0] = Keypoint2D(5.0, 5.0)
        with pytest.raises(DegenerateScaleError):
            bbox_scale(GroundTruthPose(keypoints=tuple(keypoints)))

    def test_zero_width(self) -> None:
        """Test that collinear vertical keypoints have no scale."""
        with pytest.raises(DegenerateScaleError, match="zero extent"):
            bbox_scale(_two_point_gt((10.0, 0.0), (10.0, 100.0)))


class TestOks:
    """Tests for oks."""

    def test_exact_detection(
        self, make_det: DetectionFactory, make_gt: PoseFactory, sigma: SigmaTable
    ) -> None:
        """Test that an exact detection has OKS 1."""
        result = oks(make_det(), make_gt(), sigma)
        assert result.oks == 1.0
        assert result.k_used == NUM_KEYPOINTS

    def test_only_common_keypoints(
        self, make_det: DetectionFactory, make_gt: PoseFactory, sigma: SigmaTable
    ) -> None:
        """Test that keypoints missing on either side are left out."""
        det = make_det(absent=(KeypointId.NOSE,))
        gt = make_gt(absent=(KeypointId.LEFT_EAR, KeypointId.RIGHT_EAR))
        result = oks(det, gt, sigma)
        assert result.k_used == 14
        assert KeypointId.NOSE not in result.ks

    def test_translation_invariant(
        self, make_det: DetectionFactory, make_gt: PoseFactory, sigma: SigmaTable
    ) -> None:
        """Test that moving both poses together leaves OKS unchanged."""
        base = oks(make_det(dx=7, dy=-3), make_gt(), sigma).oks
        moved = oks(make_det(dx=57, dy=97), make_gt(dx=50, dy=100), sigma).oks
        assert moved == pytest.approx(base, abs=1e-12)

    def test_decreases_with_error(
        self, make_det: DetectionFactory, make_gt: PoseFactory, sigma: SigmaTable
    ) -> None:
        """Test that larger offsets give lower OKS within [0, 1]."""
        values = [oks(make_det(dx=d), make_gt(), sigma).oks for d in (0, 2, 10, 40, 200)]
        assert values == sorted(values, reverse=True)
        assert all(0.0 <= v <= 1.0 for v in values)

    def test_no_common_keypoints(self, make_gt: PoseFactory, sigma: SigmaTable) -> None:
        """Test that disjoint keypoint sets have no OKS."""
        gt = make_gt(absent=(KeypointId.NOSE,))
        keypoints = [Keypoint2D.absent()] * NUM_KEYPOINTS
        keypoints[KeypointId.NOSE] = Keypoint2D(1.0, 1.0)
        with pytest.raises(NoCommonKeypointsError):
            oks(CanonicalPose(keypoints=tuple(keypoints)), gt, sigma)

    @pytest.mark.slow
    def test_matches_oracle(self, reference: ReferencePose, sigma: SigmaTable) -> None:
        """Test a thousand seeded instances against the term-by-term OKS."""
        rng = Xorshift128(20240611)
        for _ in range(1000):
            det, gt = _random_pair(rng, reference)
            try:
                expected = oracle_oks(det, gt, sigma)
            except (NoCommonKeypointsError, DegenerateScaleError) as e:
                with pytest.raises(type(e)):
                    oks(det, gt, sigma)
                continue
            assert oks(det, gt, sigma).oks == pytest.approx(expected, abs=1e-12)
