"""Pytest configuration and shared fixtures."""

from __future__ import annotations

import os
from collections.abc import Callable
from pathlib import Path

import pytest

from kpeval.core.poses import CanonicalPose, GroundTruthPose, Keypoint2D, Role
from kpeval.core.skeleton import REAL_KEYPOINTS, KeypointId, SigmaTable
from kpeval.logging_config import reset_logging
from kpeval.report.circles import ReferencePose

FIXTURES = Path(__file__).parent / "fixtures"

PoseFactory = Callable[..., GroundTruthPose]
DetectionFactory = Callable[..., CanonicalPose]


@pytest.fixture(autouse=True)
def clean_logging() -> None:
    """Start every test with an unconfigured package logger."""
    reset_logging()


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep KPEVAL_* variables of the developer's shell out of the tests."""
    for key in list(os.environ):
        if key.startswith("KPEVAL_"):
            monkeypatch.delenv(key)


@pytest.fixture
def fixtures_dir() -> Path:
    """Directory of the static test inputs."""
    return FIXTURES


@pytest.fixture
def sigma() -> SigmaTable:
    """The packaged COCO sigmas."""
    return SigmaTable.default()


@pytest.fixture
def reference() -> ReferencePose:
    """The packaged reference pose (torso length 150)."""
    return ReferencePose.default()


@pytest.fixture
def make_gt(reference: ReferencePose) -> PoseFactory:
    """Build a ground truth from the reference pose.

    Keyword arguments: ``dx``/``dy`` translate the pose, ``absent`` lists
    keypoints left unannotated and ``role`` sets the role.
    """

    def factory(
        dx: float = 0.0,
        dy: float = 0.0,
        absent: tuple[KeypointId, ...] = (),
        role: Role = Role.INFANT,
    ) -> GroundTruthPose:
        keypoints = tuple(
            Keypoint2D.absent()
            if k in absent
            else Keypoint2D(reference.points[k][0] + dx, reference.points[k][1] + dy)
            for k in REAL_KEYPOINTS
        )
        return GroundTruthPose(keypoints=keypoints, role=role)

    return factory


@pytest.fixture
def make_det(reference: ReferencePose) -> DetectionFactory:
    """Build a detection from the reference pose.

    Keyword arguments: ``dx``/``dy`` translate the pose, ``absent`` lists
    undetected keypoints, plus ``score``, ``rank`` and ``confidence``.
    """

    def factory(
        dx: float = 0.0,
        dy: float = 0.0,
        absent: tuple[KeypointId, ...] = (),
        score: float | None = None,
        rank: int = 0,
        confidence: float | None = None,
    ) -> CanonicalPose:
        keypoints = tuple(
            Keypoint2D.absent()
            if k in absent
            else Keypoint2D(
                reference.points[k][0] + dx, reference.points[k][1] + dy, confidence
            )
            for k in REAL_KEYPOINTS
        )
        return CanonicalPose(keypoints=keypoints, score=score, rank=rank)

    return factory
