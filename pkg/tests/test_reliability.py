"""Tests for inter-coder reliability."""

from __future__ import annotations

import json
import logging
import math
from typing import TYPE_CHECKING, Any

import pytest

from kpeval.core.skeleton import REAL_KEYPOINTS, KeypointId
from kpeval.exceptions import OutputWriteError
from kpeval.ingest.formats import FormatKind
from kpeval.ingest.ground_truth import parse_ground_truth
from kpeval.metrics.stats import IccForm
from kpeval.reliability import (
    OVERALL,
    CoderNmhRow,
    IccRow,
    coder_nmh_table,
    emit_coder_nmh_csv,
    emit_icc_csv,
    icc_table,
    min_icc,
    paired_coordinates,
    render_coder_nmh_csv,
    render_icc_csv,
)
from kpeval.report.models import MeanStat

if TYPE_CHECKING:
    from pathlib import Path

    from kpeval.core.poses import SequenceDataset


def _second_coder(
    fixtures_dir: Path, tmp_path: Path, shift: float = 0.0, keep: int | None = None
) -> SequenceDataset:
    """The fixture annotations moved by ``shift`` pixels, optionally truncated."""
    document: dict[str, Any] = json.loads(
        (fixtures_dir / "supine01.json").read_text(encoding="utf-8")
    )
    for frame in document["frames"]:
        for gt in frame.get("ground_truths", []):
            gt["keypoints"] = [
                None if p is None else [p[0] + shift, p[1] + shift] for p in gt["keypoints"]
            ]
    if keep is not None:
        document["frames"] = document["frames"][:keep]
    path = tmp_path / "coder_b.json"
    path.write_text(json.dumps(document), encoding="utf-8")
    return parse_ground_truth(path, FormatKind.CANONICAL_JSON)


@pytest.fixture
def coder_a(fixtures_dir: Path) -> SequenceDataset:
    """The fixture annotations."""
    return parse_ground_truth(fixtures_dir / "supine01.json", FormatKind.CANONICAL_JSON)


def _row(rows: list[IccRow], keypoint: KeypointId, axis: str) -> IccRow:
    return next(r for r in rows if r.keypoint is keypoint and r.axis == axis)


class TestPairedCoordinates:
    """Tests for paired_coordinates."""

    def test_pairs_by_frame(
        self, coder_a: SequenceDataset, fixtures_dir: Path, tmp_path: Path
    ) -> None:
        """Test that both coders' coordinates are paired frame by frame."""
        coder_b = _second_coder(fixtures_dir, tmp_path, shift=1.0)

        pairs = paired_coordinates([coder_a], [coder_b])

        xs_a, xs_b = pairs[(KeypointId.NOSE, "x")]
        assert xs_a == [200.0, 210.0, 220.0]
        assert xs_b == [201.0, 211.0, 221.0]

    def test_only_common_keypoints(
        self, coder_a: SequenceDataset, fixtures_dir: Path, tmp_path: Path
    ) -> None:
        """Test that keypoints absent for either coder are skipped."""
        pairs = paired_coordinates([coder_a], [_second_coder(fixtures_dir, tmp_path)])
        assert len(pairs[(KeypointId.LEFT_EAR, "y")][0]) == 2

    def test_unpaired_frames_warn(
        self,
        coder_a: SequenceDataset,
        fixtures_dir: Path,
        tmp_path: Path,
        caplog: pytest.LogCaptureFixture,
    ) -> None:
        """Test that frames missing from the second coder are reported."""
        coder_b = _second_coder(fixtures_dir, tmp_path, keep=2)

        with caplog.at_level(logging.WARNING, logger="kpeval"):
            pairs = paired_coordinates([coder_a], [coder_b])

        assert len(pairs[(KeypointId.NOSE, "x")][0]) == 2
        unpaired = [r for r in caplog.records if getattr(r, "code", None) == "unpaired_frames"]
        assert unpaired[0].count == 1  # type: ignore[attr-defined]


class TestIccTable:
    """Tests for icc_table and min_icc."""

    @pytest.mark.parametrize("form", list(IccForm))
    def test_identical_coders(
        self, coder_a: SequenceDataset, fixtures_dir: Path, tmp_path: Path, form: IccForm
    ) -> None:
        """Test that identical annotations agree perfectly."""
        rows = icc_table([coder_a], [_second_coder(fixtures_dir, tmp_path)], form)

        assert len(rows) == 34
        assert _row(rows, KeypointId.NOSE, "x").icc == pytest.approx(1.0)
        assert min_icc(rows) == pytest.approx(1.0)

    def test_offset_consistency_vs_agreement(
        self, coder_a: SequenceDataset, fixtures_dir: Path, tmp_path: Path
    ) -> None:
        """Test that a constant offset only lowers the absolute-agreement form."""
        coder_b = _second_coder(fixtures_dir, tmp_path, shift=2.0)

        consistency = icc_table([coder_a], [coder_b], IccForm.TWO_WAY_MIXED)
        agreement = icc_table([coder_a], [coder_b], IccForm.TWO_WAY_RANDOM)

        assert _row(consistency, KeypointId.NOSE, "x").icc == pytest.approx(1.0)
        assert _row(agreement, KeypointId.NOSE, "x").icc < 1.0

    def test_too_few_pairs(
        self, coder_a: SequenceDataset, fixtures_dir: Path, tmp_path: Path
    ) -> None:
        """Test that keypoints with fewer than 3 pairs have no ICC."""
        rows = icc_table([coder_a], [_second_coder(fixtures_dir, tmp_path)])

        ear = _row(rows, KeypointId.LEFT_EAR, "x")
        assert ear.icc is None
        assert ear.n == 2

    def test_min_icc_ignores_undefined(self) -> None:
        """Test that undefined rows do not count."""
        rows = [
            IccRow(KeypointId.NOSE, "x", 0.9, 3),
            IccRow(KeypointId.NOSE, "y", None, 2),
            IccRow(KeypointId.LEFT_EYE, "x", 0.75, 3),
        ]
        assert min_icc(rows) == 0.75
        assert min_icc([rows[1]]) is None


class TestIccCsv:
    """Tests for the ICC table file."""

    def test_render(self) -> None:
        """Test rounding and empty undefined values."""
        rows = [IccRow(KeypointId.NOSE, "x", 0.98765, 3), IccRow(KeypointId.NOSE, "y", None, 2)]

        text = render_icc_csv(rows)

        assert text == "keypoint,axis,icc,n\nnose,x,0.988,3\nnose,y,,2\n"

    def test_emit(self, tmp_path: Path) -> None:
        """Test that the file holds the rendered table."""
        rows = [IccRow(KeypointId.NOSE, "x", 1.0, 3)]
        path = emit_icc_csv(rows, tmp_path / "sub" / "icc.csv")
        assert path.read_text(encoding="utf-8") == render_icc_csv(rows)

    def test_unwritable(self, tmp_path: Path) -> None:
        """Test that write failures raise OutputWriteError."""
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OutputWriteError):
            emit_icc_csv([], blocker / "icc.csv")


class TestCoderNmhTable:
    """Tests for the second coder's Neck-MidHip error."""

    def test_identical_coders(
        self, coder_a: SequenceDataset, fixtures_dir: Path, tmp_path: Path
    ) -> None:
        """Test that identical annotations have zero error."""
        rows = coder_nmh_table([coder_a], [_second_coder(fixtures_dir, tmp_path)])

        assert rows[0].keypoint == OVERALL
        assert rows[0].error.mean == 0.0
        assert rows[0].error.n == 49
        assert [r.keypoint for r in rows[1:]] == [k.canonical_name for k in REAL_KEYPOINTS]

    def test_constant_offset(
        self, coder_a: SequenceDataset, fixtures_dir: Path, tmp_path: Path
    ) -> None:
        """Test a 3 px diagonal offset against the 150 px torso of the first coder."""
        rows = coder_nmh_table([coder_a], [_second_coder(fixtures_dir, tmp_path, shift=3.0)])

        expected = 100.0 * 3.0 * math.sqrt(2.0) / 150.0
        overall = rows[0].error
        assert overall.mean == pytest.approx(expected)
        assert overall.std == pytest.approx(0.0, abs=1e-12)
        by_name = {r.keypoint: r.error for r in rows}
        assert by_name["nose"].n == 3
        assert by_name["left_ear"].n == 2
        assert by_name["left_ear"].mean == pytest.approx(expected)

    def test_no_normalizer(
        self, fixtures_dir: Path, tmp_path: Path, caplog: pytest.LogCaptureFixture
    ) -> None:
        """Test that a first coder without hips gives empty rows and a warning."""
        document: dict[str, Any] = json.loads(
            (fixtures_dir / "supine01.json").read_text(encoding="utf-8")
        )
        for frame in document["frames"]:
            for gt in frame["ground_truths"]:
                gt["keypoints"][11] = None
        path = tmp_path / "no_hips.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        first = parse_ground_truth(path, FormatKind.CANONICAL_JSON)

        with caplog.at_level(logging.WARNING, logger="kpeval"):
            rows = coder_nmh_table([first], [_second_coder(fixtures_dir, tmp_path)])

        assert rows[0].error.n == 0
        assert rows[0].error.mean is None
        assert any(getattr(r, "code", None) == "no_normalizer" for r in caplog.records)

    def test_render(self) -> None:
        """Test rounding and empty undefined values."""
        rows = [
            CoderNmhRow(OVERALL, MeanStat(mean=7.64, std=4.21, n=40)),
            CoderNmhRow("nose", MeanStat(mean=3.0, n=1)),
        ]

        text = render_coder_nmh_csv(rows)

        assert text == "keypoint,nmh_mean,nmh_std,n\nall,7.6,4.2,40\nnose,3.0,,1\n"

    def test_emit(self, tmp_path: Path) -> None:
        """Test that the file holds the rendered table."""
        rows = [CoderNmhRow(OVERALL, MeanStat(mean=1.0, std=0.5, n=2))]
        path = emit_coder_nmh_csv(rows, tmp_path / "nmh.csv")
        assert path.read_text(encoding="utf-8") == render_coder_nmh_csv(rows)
