"""Synthetic sequences with known metric values.

A fixture is one infant sequence built from the packaged reference pose,
translated by a whole-pixel offset per frame so the torso length stays
constant, plus one method's detections derived from it by an
``ErrorModel``. Every random decision comes from one ``Xorshift128``
stream, drawn frame by frame in this order:

1. x and y offsets (``below(64)`` each)
2. whether the frame's detection is dropped (only when the probability
   is strictly between 0 and 1)
3. per keypoint: jitter angle, jitter length for random jitter, whether
   the keypoint is dropped
4. whether a duplicate detection is added
5. the detection score for the noisy score model

Expected values are computed from the realized draws, never from the
probabilities.
"""

from __future__ import annotations

import math
from dataclasses import replace
from enum import Enum
from fractions import Fraction
from typing import TYPE_CHECKING, NamedTuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from kpeval.core.poses import (
    CanonicalPose,
    EvaluationScope,
    FrameRecord,
    GroundTruthPose,
    Keypoint2D,
    SequenceDataset,
)
from kpeval.core.skeleton import NUM_KEYPOINTS, REAL_KEYPOINTS, SigmaTable
from kpeval.exceptions import OutputWriteError
from kpeval.harness.oracles import MAX_FRAMES, oracle_ap, oracle_oks
from kpeval.harness.prng import Xorshift128
from kpeval.ingest.canonical import dumps_canonical_json
from kpeval.ingest.formats import DetectionFile
from kpeval.logging_config import get_logger
from kpeval.report.circles import ReferencePose

if TYPE_CHECKING:
    from pathlib import Path

logger = get_logger(__name__)

GENERATOR_METHOD = "synthetic"
OFFSET_RANGE = 64
DUPLICATE_SCORE_FACTOR = 0.5
CONSTANT_SCORE = 0.5
# x shift of a duplicate, as a fraction of the torso length
DUPLICATE_SHIFT = 0.5


class JitterKind(str, Enum):
    """How far each detected keypoint is moved from its ground truth."""

    FIXED = "fixed"
    RANDOM = "random"


class ScoreModel(str, Enum):
    """How the detection score relates to the detection's OKS."""

    PERFECT = "perfect"
    ANTICORRELATED = "anticorrelated"
    CONSTANT = "constant"
    NOISY = "noisy"


class ErrorModel(BaseModel):
    """Errors injected into the synthetic detections."""

    model_config = ConfigDict(frozen=True)

    jitter: float = Field(
        default=0.0,
        ge=0.0,
        description="Radial keypoint offset as a fraction of the torso length "
        "(exact for fixed jitter, upper bound for random jitter)",
    )
    jitter_kind: JitterKind = Field(default=JitterKind.FIXED)
    drop_keypoint_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    drop_detection_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    drop_detection_frames: tuple[int, ...] = Field(
        default=(),
        description="Zero-based frame indices that always get no detection",
    )
    duplicate_detection_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    score_model: ScoreModel = Field(default=ScoreModel.PERFECT)

    @model_validator(mode="after")
    def validate_frames(self) -> ErrorModel:
        """Frame indices must be non-negative."""
        if any(i < 0 for i in self.drop_detection_frames):
            msg = "drop_detection_frames must be >= 0"
            raise ValueError(msg)
        return self

    @classmethod
    def perfect(cls) -> ErrorModel:
        """No error at all."""
        return cls()


class ExpectedValues(BaseModel):
    """Metric values a correct evaluation must reproduce for a fixture.

    Percentages are in percent; OKS is a fraction. Fields that do not
    follow from the realized draws are None.
    """

    seed: int
    frames: int
    detections: int
    method_keypoint_count: int = NUM_KEYPOINTS
    torso_length: float
    oks_mean: float | None = None
    ap: float | None = None
    ar: float | None = None
    nmh_mean: float | None = None
    nmh_per_keypoint: dict[str, float] = Field(default_factory=dict)
    missing_detections: int = 0
    missing_keypoints: int = 0
    missing_percent: float = 0.0
    redundant_percent: float | None = None


class Fixture(NamedTuple):
    """A generated sequence, its detections and their expected metrics."""

    dataset: SequenceDataset
    detections: DetectionFile
    expected: ExpectedValues


def _ground_truth(reference: ReferencePose, dx: int, dy: int) -> GroundTruthPose:
    return GroundTruthPose(
        keypoints=tuple(
            Keypoint2D(reference.points[k][0] + dx, reference.points[k][1] + dy)
            for k in REAL_KEYPOINTS
        )
    )


def _score(model: ScoreModel, quality: float, rng: Xorshift128) -> float:
    match model:
        case ScoreModel.PERFECT:
            return quality
        case ScoreModel.ANTICORRELATED:
            return 1.0 - quality
        case ScoreModel.CONSTANT:
            return CONSTANT_SCORE
        case ScoreModel.NOISY:
            return rng.uniform()


def generate(
    seed: int,
    n_frames: int,
    model: ErrorModel | None = None,
    *,
    sigma: SigmaTable | None = None,
    sequence_id: str | None = None,
) -> Fixture:
    """Generate a synthetic sequence and one method's detections.

    Equal arguments give value-identical fixtures.

    Raises:
        ValueError: If n_frames is below 1
    """
    if n_frames < 1:
        msg = f"n_frames must be >= 1, got {n_frames}"
        raise ValueError(msg)
    model = model or ErrorModel.perfect()
    sigma = sigma or SigmaTable.default()
    sequence_id = sequence_id or f"synthetic-{seed}"
    reference = ReferencePose.default()
    torso = reference.torso_length
    rng = Xorshift128(seed)
    forced_drops = set(model.drop_detection_frames)

    frames: list[FrameRecord] = []
    per_frame: dict[str, tuple[CanonicalPose, ...]] = {}
    oks_values: list[float] = []
    nmh_values: dict[str, list[float]] = {k.canonical_name: [] for k in REAL_KEYPOINTS}
    missing_detections = 0
    missing_keypoints = 0
    provided = 0
    detected_frames = 0

    for i in range(n_frames):
        frame_id = f"{i:05d}"
        gt = _ground_truth(reference, rng.below(OFFSET_RANGE), rng.below(OFFSET_RANGE))
        frames.append(FrameRecord(frame_id=frame_id, ground_truths=(gt,)))
        dropped = i in forced_drops
        if not dropped and rng.chance(model.drop_detection_prob):
            dropped = True
        if dropped:
            per_frame[frame_id] = ()
            missing_detections += 1
            continue

        points: list[Keypoint2D] = []
        distances: dict[str, float] = {}
        for k in REAL_KEYPOINTS:
            angle = 2.0 * math.pi * rng.uniform()
            length = model.jitter * torso
            if model.jitter_kind is JitterKind.RANDOM:
                length *= rng.uniform()
            lost = rng.chance(model.drop_keypoint_prob)
            if lost:
                points.append(Keypoint2D.absent())
                continue
            points.append(
                Keypoint2D(gt[k].x + length * math.cos(angle), gt[k].y + length * math.sin(angle))
            )
            distances[k.canonical_name] = length
        if not distances:
            # keep the nose so the detection is not empty
            nose = REAL_KEYPOINTS[0]
            points[0] = Keypoint2D(gt[nose].x, gt[nose].y)
            distances[nose.canonical_name] = 0.0
        absent = NUM_KEYPOINTS - len(distances)

        unscored = CanonicalPose(keypoints=tuple(points), native_absent=absent)
        quality = oracle_oks(unscored, gt, sigma)
        duplicate = rng.chance(model.duplicate_detection_prob)
        score = _score(model.score_model, quality, rng)
        primary = replace(unscored, score=score)
        detections = [primary]
        if duplicate:
            shift = DUPLICATE_SHIFT * torso
            detections.append(
                CanonicalPose(
                    keypoints=tuple(
                        Keypoint2D(p.x + shift, p.y) if p.present else p for p in points
                    ),
                    score=score * DUPLICATE_SCORE_FACTOR,
                    rank=1,
                    native_absent=absent,
                )
            )
        per_frame[frame_id] = tuple(detections)
        frames[-1] = frames[-1].with_detections(detections)

        oks_values.append(quality)
        for name, length in distances.items():
            nmh_values[name].append(100.0 * length / torso)
        missing_keypoints += absent
        provided += len(detections)
        detected_frames += 1

    with_detections = SequenceDataset(sequence_id=sequence_id, frames=tuple(frames))
    dataset = with_detections.with_frames(f.with_detections(()) for f in frames)
    detection_file = DetectionFile(
        method_name=GENERATOR_METHOD,
        sequence_id=sequence_id,
        frames=per_frame,
        native_count=NUM_KEYPOINTS,
        source=f"seed:{seed}",
    )

    all_nmh = [v for values in nmh_values.values() for v in values]
    ap = ar = None
    if n_frames <= MAX_FRAMES:
        ap, ar = oracle_ap(
            with_detections.frames, sigma, EvaluationScope.INFANT, sequence_id
        )
    expected = ExpectedValues(
        seed=seed,
        frames=n_frames,
        detections=provided,
        torso_length=torso,
        oks_mean=math.fsum(oks_values) / len(oks_values) if oks_values else None,
        ap=ap,
        ar=ar,
        nmh_mean=math.fsum(all_nmh) / len(all_nmh) if all_nmh else None,
        nmh_per_keypoint={
            name: math.fsum(values) / len(values) for name, values in nmh_values.items() if values
        },
        missing_detections=missing_detections,
        missing_keypoints=missing_keypoints,
        missing_percent=float(
            Fraction(
                100 * (missing_detections * NUM_KEYPOINTS + missing_keypoints),
                n_frames * NUM_KEYPOINTS,
            )
        ),
        redundant_percent=(
            float(Fraction(100 * (provided - detected_frames), detected_frames))
            if detected_frames
            else None
        ),
    )
    logger.debug(
        "Generated %d frames (%d detections) from seed %d", n_frames, provided, seed
    )
    return Fixture(dataset, detection_file, expected)


def detections_dataset(fixture: Fixture) -> SequenceDataset:
    """The fixture's detections laid out as a CanonicalJson sequence."""
    frames = fixture.detections.frames
    return fixture.dataset.with_frames(
        FrameRecord(frame_id=f.frame_id, detections=frames.get(f.frame_id, ()))
        for f in fixture.dataset.frames
    )


def write_fixture(fixture: Fixture, out: Path) -> list[Path]:
    """Write ``ground_truth.json``, ``detections.json`` and ``expected.json``.

    Raises:
        OutputWriteError: If a file cannot be written
    """
    files = {
        out / "ground_truth.json": dumps_canonical_json(fixture.dataset),
        out / "detections.json": dumps_canonical_json(detections_dataset(fixture)),
        out / "expected.json": fixture.expected.model_dump_json(indent=2) + "\n",
    }
    try:
        out.mkdir(parents=True, exist_ok=True)
        for path, text in files.items():
            path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as e:
        raise OutputWriteError(f"Cannot write fixture: {e}", str(out)) from e
    logger.info("Wrote fixture for seed %d to %s", fixture.expected.seed, out)
    return list(files)
