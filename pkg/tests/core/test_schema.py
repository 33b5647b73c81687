"""Tests for SchemaMap and native-to-canonical mapping."""

from __future__ import annotations

from pathlib import Path

import pytest

from kpeval.core.poses import Keypoint2D
from kpeval.core.schema import (
    BUILTIN_SCHEMAS,
    SchemaMap,
    ScorePolicy,
    identity_schema,
    load_schema,
    map_to_canonical,
    median_confidence,
    native_to_keypoint,
    schema_from_dict,
)
from kpeval.core.skeleton import NUM_KEYPOINTS, REAL_KEYPOINTS, KeypointId
from kpeval.exceptions import (
    EmptyDetectionError,
    InvalidIndexError,
    ParseError,
    SchemaMismatchError,
)


def _native(count: int, conf: float | None = 1.0) -> list[tuple[float, float, float | None]]:
    return [(float(10 * i), float(10 * i + 1), conf) for i in range(count)]


class TestNativeKeypoint:
    """Tests for native_to_keypoint."""

    def test_none_is_absent(self) -> None:
        """Test that a missing entry is absent."""
        assert not native_to_keypoint(None).present

    def test_origin_sentinel(self) -> None:
        """Test that (0, 0) with zero confidence is absent."""
        assert not native_to_keypoint((0.0, 0.0, 0.0)).present

    def test_origin_with_confidence_is_present(self) -> None:
        """Test that the origin is a real point when confidence is positive."""
        kp = native_to_keypoint((0.0, 0.0, 0.7))
        assert kp.present
        assert kp.confidence == 0.7

    def test_zero_confidence_elsewhere_is_present(self) -> None:
        """Test that zero confidence alone does not make a point absent."""
        assert native_to_keypoint((5.0, 6.0, 0.0)).present


class TestMapToCanonical:
    """Tests for map_to_canonical."""

    def test_identity(self) -> None:
        """Test that the 17-point identity map keeps every keypoint."""
        native = _native(NUM_KEYPOINTS)
        pose = map_to_canonical(native, identity_schema(), score=0.8)

        for k in REAL_KEYPOINTS:
            assert (pose[k].x, pose[k].y) == native[k.value][:2]
        assert pose.score == 0.8
        assert pose.native_absent == 0

    def test_fourteen_point_layout(self) -> None:
        """Test that a layout without face points leaves them absent."""
        pose = map_to_canonical(_native(14), BUILTIN_SCHEMAS["deepercut14"])

        for k in (KeypointId.NOSE, KeypointId.LEFT_EAR, KeypointId.RIGHT_EAR):
            assert not pose[k].present
        assert pose[KeypointId.RIGHT_ANKLE].x == 0.0
        assert pose[KeypointId.LEFT_WRIST].x == 110.0

    def test_openpose_neck_dropped(self) -> None:
        """Test that the OpenPose neck point has no canonical counterpart."""
        native = _native(18)
        pose = map_to_canonical(native, BUILTIN_SCHEMAS["openpose18"])

        assert pose.present_count == NUM_KEYPOINTS
        assert pose[KeypointId.RIGHT_SHOULDER].x == 20.0
        assert all(pose[k].x != 10.0 for k in REAL_KEYPOINTS)

    def test_composite_average(self) -> None:
        """Test that composite entries average their sources."""
        schema = SchemaMap(
            "hips",
            2,
            entries=(),
            composite_entries=((KeypointId.LEFT_HIP, (0, 1)),),
        )
        pose = map_to_canonical([(0.0, 0.0, 1.0), (2.0, 2.0, 1.0)], schema)
        hip = pose[KeypointId.LEFT_HIP]
        assert (hip.x, hip.y) == (1.0, 1.0)

    def test_composite_with_absent_source(self) -> None:
        """Test that a composite is absent when one source is absent."""
        schema = SchemaMap(
            "hips",
            3,
            entries=((2, KeypointId.NOSE),),
            composite_entries=((KeypointId.LEFT_HIP, (0, 1)),),
        )
        pose = map_to_canonical([(1.0, 1.0, 1.0), None, (5.0, 5.0, 1.0)], schema)
        assert not pose[KeypointId.LEFT_HIP].present
        assert pose.native_absent == 1

    def test_native_absent_counts_native_layout(self) -> None:
        """Test that absences are counted before mapping drops points."""
        native: list[tuple[float, float, float | None] | None] = list(_native(18))
        native[1] = None
        native[4] = None
        pose = map_to_canonical(native, BUILTIN_SCHEMAS["openpose18"])
        assert pose.native_absent == 2

    def test_length_mismatch(self) -> None:
        """Test that the native list must fit the schema."""
        with pytest.raises(SchemaMismatchError, match="Expected 17"):
            map_to_canonical(_native(18), identity_schema())

    def test_nothing_mapped(self) -> None:
        """Test that a detection with no canonical keypoint is rejected."""
        with pytest.raises(EmptyDetectionError):
            map_to_canonical([None] * NUM_KEYPOINTS, identity_schema())


class TestScorePolicy:
    """Tests for score resolution."""

    def test_median_odd(self) -> None:
        """Test the median of an odd number of confidences."""
        points = [Keypoint2D(1, 1, c) for c in (0.2, 0.6, 1.0)]
        assert median_confidence(points) == pytest.approx(0.6)

    def test_median_even(self) -> None:
        """Test that an even count averages the central pair."""
        points = [Keypoint2D(1, 1, c) for c in (0.2, 0.8)]
        assert median_confidence(points) == pytest.approx(0.5)

    def test_median_policy(self) -> None:
        """Test that MEDIAN_OF_CONFIDENCES ignores the native score."""
        schema = identity_schema("m", ScorePolicy.MEDIAN_OF_CONFIDENCES)
        native = [(1.0, 1.0, 0.2), (2.0, 2.0, 0.6), (3.0, 3.0, 1.0)] + [None] * 14
        assert map_to_canonical(native, schema, score=0.1).score == pytest.approx(0.6)

    def test_box_policy(self) -> None:
        """Test that DETECTOR_BOX_SCORE uses the box score and nothing else."""
        schema = identity_schema("m", ScorePolicy.DETECTOR_BOX_SCORE)
        native = _native(NUM_KEYPOINTS)
        assert map_to_canonical(native, schema, score=0.3, box_score=0.9).score == 0.9
        unboxed = map_to_canonical(native, schema, score=0.3)
        assert unboxed.score is None
        assert unboxed.box_score is None

    def test_no_score_policy(self) -> None:
        """Test that NO_SCORE drops the score."""
        schema = identity_schema("m", ScorePolicy.NO_SCORE)
        assert map_to_canonical(_native(NUM_KEYPOINTS), schema, score=0.3).score is None


class TestSchemaValidation:
    """Tests for SchemaMap invariants."""

    def test_index_out_of_range(self) -> None:
        """Test that entries must point inside the native array."""
        with pytest.raises(InvalidIndexError):
            SchemaMap("bad", 3, entries=((3, KeypointId.NOSE),))

    def test_duplicate_target(self) -> None:
        """Test that a canonical keypoint is mapped once."""
        with pytest.raises(SchemaMismatchError, match="more than once"):
            SchemaMap("bad", 3, entries=((0, KeypointId.NOSE), (1, KeypointId.NOSE)))

    def test_virtual_target(self) -> None:
        """Test that virtual keypoints cannot be mapped."""
        with pytest.raises(SchemaMismatchError, match="Virtual"):
            SchemaMap("bad", 3, entries=((0, KeypointId.NECK),))

    def test_empty_composite(self) -> None:
        """Test that composite entries need sources."""
        with pytest.raises(SchemaMismatchError, match="no sources"):
            SchemaMap("bad", 3, entries=(), composite_entries=((KeypointId.NOSE, ()),))


class TestLoadSchema:
    """Tests for load_schema and schema_from_dict."""

    def test_builtin(self) -> None:
        """Test built-in lookup and renaming."""
        schema = load_schema("openpose18", method_name="OpenPose")
        assert schema.method_name == "OpenPose"
        assert schema.native_count == 18

    def test_yaml_file(self, fixtures_dir: Path) -> None:
        """Test loading a SchemaMap file."""
        schema = load_schema(str(fixtures_dir / "custom14.yaml"))

        assert schema.method_name == "custom14"
        assert schema.native_count == 14
        assert schema.score_policy is ScorePolicy.MEDIAN_OF_CONFIDENCES
        assert KeypointId.NOSE in schema.mapped_keypoints
        assert KeypointId.LEFT_EAR not in schema.mapped_keypoints

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test that unreadable files raise ParseError."""
        with pytest.raises(ParseError, match="Cannot load schema"):
            load_schema(str(tmp_path / "nope.yaml"))

    def test_not_a_mapping(self, tmp_path: Path) -> None:
        """Test that a schema file must hold a mapping."""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ParseError, match="mapping"):
            load_schema(str(path))

    def test_unknown_keypoint_name(self) -> None:
        """Test that unknown names in entries are reported."""
        with pytest.raises(ParseError, match="Unknown keypoint"):
            schema_from_dict({"method": "m", "native_count": 2, "entries": {0: "chin"}})

    def test_missing_field(self) -> None:
        """Test that method and native_count are required."""
        with pytest.raises(ParseError, match="Invalid schema"):
            schema_from_dict({"method": "m"})
