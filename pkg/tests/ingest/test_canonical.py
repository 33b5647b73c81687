"""Tests for CanonicalJson reading and writing."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from kpeval.core.poses import FrameRecord, SequenceDataset
from kpeval.core.schema import BUILTIN_SCHEMAS
from kpeval.exceptions import OutputWriteError, ParseError, SchemaMismatchError
from kpeval.harness.generator import ErrorModel, detections_dataset, generate
from kpeval.ingest.canonical import (
    dataset_from_document,
    dumps_canonical_json,
    emit_canonical_json,
    load_canonical_json,
)


class TestRoundTrip:
    """Emitting and re-parsing gives the same dataset."""

    @pytest.mark.parametrize("name", ["supine01.json", "supine01_perfect.json"])
    def test_fixture_round_trip(self, fixtures_dir: Path, tmp_path: Path, name: str) -> None:
        """Test the round trip on the shipped fixtures."""
        original = load_canonical_json(fixtures_dir / name)
        emit_canonical_json(original, tmp_path / name)
        assert load_canonical_json(tmp_path / name) == original

    def test_generated_round_trip(self, tmp_path: Path) -> None:
        """Test the round trip on a noisy generated sequence with scores and duplicates."""
        model = ErrorModel(jitter=0.05, duplicate_detection_prob=0.5, drop_keypoint_prob=0.1)
        dataset = detections_dataset(generate(3, 6, model))
        emit_canonical_json(dataset, tmp_path / "gen.json")
        assert load_canonical_json(tmp_path / "gen.json") == dataset

    def test_emit_is_deterministic(self, fixtures_dir: Path) -> None:
        """Test that serialization is stable."""
        dataset = load_canonical_json(fixtures_dir / "supine01.json")
        assert dumps_canonical_json(dataset) == dumps_canonical_json(dataset)

    def test_absent_keypoints_are_null(self, fixtures_dir: Path) -> None:
        """Test that absent keypoints are written as null."""
        dataset = load_canonical_json(fixtures_dir / "supine01.json")
        document = json.loads(dumps_canonical_json(dataset))
        assert document["frames"][2]["ground_truths"][0]["keypoints"][3] is None

    def test_unwritable_target(self, tmp_path: Path) -> None:
        """Test that write failures raise OutputWriteError."""
        blocker = tmp_path / "file"
        blocker.write_text("x")
        dataset = SequenceDataset("s", frames=(FrameRecord("a"),))
        with pytest.raises(OutputWriteError):
            emit_canonical_json(dataset, blocker / "out.json")


class TestDocumentValidation:
    """Tests for dataset_from_document."""

    def test_missing_sequence_id(self) -> None:
        """Test that sequence_id is required."""
        with pytest.raises(ParseError, match="sequence_id"):
            dataset_from_document({"frames": [{"frame_id": "a"}]}, "doc")

    def test_bad_normalization(self) -> None:
        """Test that unknown normalization modes are rejected."""
        with pytest.raises(ParseError, match="normalization"):
            dataset_from_document(
                {"sequence_id": "s", "normalization": "mean", "frames": [{"frame_id": "a"}]},
                "doc",
            )

    def test_wrong_keypoint_count(self) -> None:
        """Test that ground truths need 17 keypoints."""
        document = {
            "sequence_id": "s",
            "frames": [{"frame_id": "a", "ground_truths": [{"keypoints": [[1, 2]]}]}],
        }
        with pytest.raises(ParseError, match="Expected 17 keypoints"):
            dataset_from_document(document, "doc")

    def test_detections_in_native_layout(self) -> None:
        """Test that detection arrays follow the given schema."""
        keypoints = [[float(i), float(i) + 1, 0.5] for i in range(18)]
        document = {
            "sequence_id": "s",
            "frames": [{"frame_id": "a", "detections": [{"score": 0.7, "keypoints": keypoints}]}],
        }

        dataset = dataset_from_document(document, "doc", BUILTIN_SCHEMAS["openpose18"])

        det = dataset.frames[0].detections[0]
        assert det.present_count == 17
        assert det.score == 0.7

    def test_detection_layout_mismatch(self) -> None:
        """Test that an array of the wrong length is a schema mismatch."""
        keypoints = [[1.0, 1.0, 0.5]] * 17
        document = {
            "sequence_id": "s",
            "frames": [{"frame_id": "a", "detections": [{"keypoints": keypoints}]}],
        }
        with pytest.raises(SchemaMismatchError):
            dataset_from_document(document, "doc", BUILTIN_SCHEMAS["openpose18"])

    def test_explicit_ranks_reorder(self) -> None:
        """Test that explicit ranks win over file order and are renumbered."""
        a = [[1.0, 1.0]] + [None] * 16
        b = [[2.0, 2.0]] + [None] * 16
        document = {
            "sequence_id": "s",
            "frames": [{"frame_id": "f", "detections": [
                {"rank": 5, "keypoints": a}, {"rank": 2, "keypoints": b},
            ]}],
        }  # fmt: skip

        detections = dataset_from_document(document, "doc").frames[0].detections

        assert [d.rank for d in detections] == [0, 1]
        assert [d.keypoints[0].x for d in detections] == [2.0, 1.0]
