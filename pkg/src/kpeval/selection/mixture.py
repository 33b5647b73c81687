"""Mixture-of-experts averaging of several methods' selections."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

from kpeval.core.poses import CanonicalPose, Keypoint2D
from kpeval.core.skeleton import NUM_KEYPOINTS

if TYPE_CHECKING:
    from collections.abc import Sequence

MIXTURE_METHOD = "mixture"


def _mean(values: list[float]) -> float:
    if all(v == values[0] for v in values):
        return values[0]
    return math.fsum(values) / len(values)


def mixture_average(selected: Sequence[CanonicalPose | None]) -> CanonicalPose | None:
    """Unweighted per-keypoint coordinate mean over methods.

    A keypoint is averaged over the methods where it is present and is
    absent only when every method misses it. The result carries no score
    and no confidences.

    Raises:
        ValueError: If fewer than two methods are given
    """
    if len(selected) < 2:
        msg = f"Mixture needs at least 2 methods, got {len(selected)}"
        raise ValueError(msg)
    poses = [p for p in selected if p is not None]
    if not poses:
        return None
    keypoints: list[Keypoint2D] = []
    for k in range(NUM_KEYPOINTS):
        present = [p.keypoints[k] for p in poses if p.keypoints[k].present]
        if not present:
            keypoints.append(Keypoint2D.absent())
            continue
        keypoints.append(
            Keypoint2D(_mean([kp.x for kp in present]), _mean([kp.y for kp in present]))
        )
    result = tuple(keypoints)
    return CanonicalPose(
        keypoints=result,
        native_absent=sum(1 for kp in result if not kp.present),
    )
