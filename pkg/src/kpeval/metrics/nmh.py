"""Neck-MidHip normalized keypoint errors."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import TYPE_CHECKING

import numpy as np

from kpeval.core.poses import EvaluationScope, derive_virtual_points
from kpeval.exceptions import DegenerateScaleError, NoNormalizerError

if TYPE_CHECKING:
    from collections.abc import Mapping

    from kpeval.core.poses import CanonicalPose, GroundTruthPose, SequenceDataset
    from kpeval.core.skeleton import KeypointId


class NormalizerSource(str, Enum):
    """Where a Neck-MidHip normalizer came from."""

    SEQUENCE_MEDIAN = "sequence_median"
    THIS_IMAGE = "this_image"


@dataclass(frozen=True)
class NmhError:
    """Per-keypoint errors as fractions of the torso length."""

    errors: Mapping[KeypointId, float]
    normalizer: float
    source: NormalizerSource

    def __post_init__(self) -> None:
        object.__setattr__(self, "errors", MappingProxyType(dict(self.errors)))


def nmh_length_image(target: GroundTruthPose) -> float | None:
    """Neck-MidHip distance of a ground truth, or None if not derivable."""
    neck, mid_hip = derive_virtual_points(target)
    if not (neck.present and mid_hip.present):
        return None
    return neck.distance_to(mid_hip)


def nmh_length_sequence(
    dataset: SequenceDataset, scope: EvaluationScope = EvaluationScope.INFANT
) -> float:
    """Median Neck-MidHip length over all in-scope ground truths of a sequence.

    Raises:
        NoNormalizerError: If no ground truth has both virtual points
    """
    lengths = [
        length
        for frame in dataset.frames
        for gt in frame.targets(scope)
        if (length := nmh_length_image(gt)) is not None
    ]
    if not lengths:
        raise NoNormalizerError(locus=dataset.sequence_id)
    return float(np.median(lengths))


def nmh_errors(
    det: CanonicalPose | GroundTruthPose,
    gt: GroundTruthPose,
    normalizer: float,
    source: NormalizerSource = NormalizerSource.SEQUENCE_MEDIAN,
) -> NmhError:
    """Distance of each commonly present keypoint divided by ``normalizer``.

    Raises:
        DegenerateScaleError: If the normalizer is not positive
    """
    if not normalizer > 0:
        raise DegenerateScaleError(f"Neck-MidHip normalizer must be positive, got {normalizer}")
    errors = {k: det[k].distance_to(gt[k]) / normalizer for k in gt.present_ids if det[k].present}
    return NmhError(errors=errors, normalizer=normalizer, source=source)
