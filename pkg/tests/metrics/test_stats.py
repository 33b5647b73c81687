"""Tests for detection scores, Spearman correlation and ICC."""

from __future__ import annotations

import dataclasses
import math
from typing import TYPE_CHECKING

import pytest
from scipy import stats

from kpeval.core.schema import ScorePolicy, identity_schema, map_to_canonical
from kpeval.core.skeleton import NUM_KEYPOINTS
from kpeval.exceptions import InsufficientDataError, ZeroVarianceError
from kpeval.harness.oracles import oracle_icc, oracle_spearman
from kpeval.harness.prng import Xorshift128
from kpeval.metrics.stats import IccForm, detection_score, icc, spearman

if TYPE_CHECKING:
    from tests.conftest import DetectionFactory

SIZES = [3, 4, 5, 6, 8, 12, 20, 33, 50]
SEEDS = [1, 7, 19]


def _series(seed: int, n: int) -> tuple[list[float], list[float]]:
    rng = Xorshift128(seed)
    xs = [rng.uniform() for _ in range(n)]
    ys = [x + 0.3 * rng.uniform() for x in xs]
    return xs, ys


def _independent(seed: int, n: int) -> tuple[list[float], list[float]]:
    rng = Xorshift128(seed)
    xs = [rng.uniform() for _ in range(n)]
    ys = [rng.uniform() for _ in range(n)]
    return xs, ys


def _t_approximation(rho: float, n: int) -> float:
    if abs(rho) >= 1.0:
        return 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return float(2.0 * stats.t.sf(abs(t), n - 2))


class TestDetectionScore:
    """Tests for detection_score."""

    def test_policies(self, make_det: DetectionFactory) -> None:
        """Test each score policy on one detection."""
        det = make_det(score=0.8, confidence=0.4)
        assert detection_score(det, ScorePolicy.NATIVE_SCORE) == 0.8
        assert detection_score(det, ScorePolicy.MEDIAN_OF_CONFIDENCES) == pytest.approx(0.4)
        assert detection_score(det, ScorePolicy.DETECTOR_BOX_SCORE) is None
        assert detection_score(det, ScorePolicy.NO_SCORE) is None

    @pytest.mark.parametrize("box_score", [0.9, None])
    @pytest.mark.parametrize("policy", list(ScorePolicy))
    def test_agrees_with_ingest(self, policy: ScorePolicy, box_score: float | None) -> None:
        """Test that rescoring a mapped detection reproduces the score set at ingest."""
        native = [(float(i), float(2 * i), 0.1 * (i % 10)) for i in range(NUM_KEYPOINTS)]
        det = map_to_canonical(native, identity_schema("m", policy), score=0.3, box_score=box_score)
        assert detection_score(det, policy) == det.score

    def test_missing_box_score_is_unscored(self, make_det: DetectionFactory) -> None:
        """Test that a detection without a box score does not fall back to its own score."""
        det = make_det(score=0.8)
        assert det.box_score is None
        assert detection_score(det, ScorePolicy.DETECTOR_BOX_SCORE) is None
        boxed = dataclasses.replace(det, box_score=0.6)
        assert detection_score(boxed, ScorePolicy.DETECTOR_BOX_SCORE) == 0.6


class TestSpearman:
    """Tests for spearman."""

    def test_perfect_agreement(self) -> None:
        """Test a monotone increasing relation."""
        result = spearman([1.0, 2.0, 3.0, 4.0], [10.0, 20.0, 25.0, 90.0])
        assert result.rho == pytest.approx(1.0)
        assert result.n == 4

    def test_perfect_disagreement(self) -> None:
        """Test a monotone decreasing relation."""
        assert spearman([1.0, 2.0, 3.0], [3.0, 2.0, 1.0]).rho == pytest.approx(-1.0)

    @pytest.mark.parametrize("seed", SEEDS)
    @pytest.mark.parametrize("n", SIZES)
    def test_matches_oracle(self, n: int, seed: int) -> None:
        """Test seeded correlated and independent series against ranked Pearson correlation."""
        for xs, ys in (_series(seed, n), _independent(seed, n)):
            result = spearman(xs, ys)
            assert result.rho == pytest.approx(oracle_spearman(xs, ys), abs=1e-12)
            assert result.n == n

    @pytest.mark.parametrize("seed", SEEDS)
    @pytest.mark.parametrize("n", SIZES)
    def test_p_value_is_t_approximation(self, n: int, seed: int) -> None:
        """Test that p is the two-sided Student t tail with n - 2 degrees of freedom."""
        for xs, ys in (_series(seed, n), _independent(seed, n)):
            result = spearman(xs, ys)
            expected = _t_approximation(result.rho, n)
            assert result.p == pytest.approx(expected, rel=1e-9, abs=1e-12)
            assert 0.0 <= result.p <= 1.0

    def test_p_value_known_case(self) -> None:
        """Test the p-value of a five-pair example worked out by hand."""
        # ranks give d = (0, 0, 1, -1, 0), rho = 1 - 6 * 2 / 120 = 0.9
        result = spearman([1.0, 2.0, 3.0, 4.0, 5.0], [1.0, 2.0, 4.0, 3.0, 5.0])
        t = 0.9 * math.sqrt(3 / (1 - 0.81))
        assert result.rho == pytest.approx(0.9)
        assert result.p == pytest.approx(2.0 * stats.t.sf(t, 3))

    def test_ties(self) -> None:
        """Test that ties get average ranks."""
        xs = [1.0, 1.0, 2.0, 3.0, 3.0, 4.0]
        ys = [0.2, 0.1, 0.4, 0.3, 0.6, 0.5]
        assert spearman(xs, ys).rho == pytest.approx(oracle_spearman(xs, ys), abs=1e-12)

    def test_too_few_pairs(self) -> None:
        """Test that two pairs are not enough."""
        with pytest.raises(InsufficientDataError):
            spearman([1.0, 2.0], [1.0, 2.0])

    def test_constant_input(self) -> None:
        """Test that a constant series has no correlation."""
        with pytest.raises(ZeroVarianceError):
            spearman([0.5, 0.5, 0.5], [1.0, 2.0, 3.0])

    def test_length_mismatch(self) -> None:
        """Test that the inputs must pair up."""
        with pytest.raises(ValueError, match="differ"):
            spearman([1.0, 2.0, 3.0], [1.0, 2.0])


class TestIcc:
    """Tests for icc."""

    @pytest.mark.parametrize("form", list(IccForm))
    def test_identical_coders(self, form: IccForm) -> None:
        """Test that identical measurements agree perfectly."""
        values = [1.0, 4.0, 2.0, 8.0, 5.0]
        assert icc(values, values, form) == 1.0

    @pytest.mark.parametrize("form", list(IccForm))
    @pytest.mark.parametrize("seed", SEEDS)
    def test_identical_seeded_coders(self, form: IccForm, seed: int) -> None:
        """Test that identical seeded measurements give exactly one."""
        values, _ = _independent(seed, 12)
        assert icc(values, values, form) == 1.0

    def test_constant_offset(self) -> None:
        """Test that consistency ignores a constant offset but absolute agreement does not."""
        a = [1.0, 4.0, 2.0, 8.0, 5.0]
        b = [v + 5.0 for v in a]
        assert icc(a, b, IccForm.TWO_WAY_MIXED) == pytest.approx(1.0)
        assert icc(a, b, IccForm.TWO_WAY_RANDOM) < 1.0

    @pytest.mark.parametrize("form", list(IccForm))
    @pytest.mark.parametrize("seed", SEEDS)
    @pytest.mark.parametrize("n", [3, 5, 10, 25, 50])
    def test_matches_oracle(self, form: IccForm, seed: int, n: int) -> None:
        """Test seeded targets against the ANOVA written out by hand."""
        for a, b in (_series(seed, n), _independent(seed, n)):
            assert icc(a, b, form) == pytest.approx(oracle_icc(a, b, form), abs=1e-10)

    @pytest.mark.parametrize("form", list(IccForm))
    def test_offset_and_scale_oracle(self, form: IccForm) -> None:
        """Test a shifted and rescaled second coder against the hand ANOVA."""
        a, _ = _independent(3, 15)
        b = [2.0 * v + 1.5 for v in a]
        assert icc(a, b, form) == pytest.approx(oracle_icc(a, b, form), abs=1e-10)

    def test_too_few_targets(self) -> None:
        """Test that two targets are not enough."""
        with pytest.raises(InsufficientDataError):
            icc([1.0, 2.0], [1.0, 2.0])

    def test_no_variance(self) -> None:
        """Test that constant identical coders leave ICC undefined."""
        with pytest.raises(ZeroVarianceError):
            icc([3.0, 3.0, 3.0], [3.0, 3.0, 3.0])
