"""Keypoint similarity and object keypoint similarity (OKS)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import TYPE_CHECKING

import numpy as np

from kpeval.exceptions import DegenerateScaleError, NoCommonKeypointsError

if TYPE_CHECKING:
    from collections.abc import Mapping

    from kpeval.core.poses import CanonicalPose, GroundTruthPose
    from kpeval.core.skeleton import KeypointId, SigmaTable


@dataclass(frozen=True)
class OksBreakdown:
    """OKS of one detection against one ground truth.

    Attributes:
        ks: Keypoint similarity per commonly present keypoint
        oks: Mean of ``ks``
        k_used: Number of commonly present keypoints
        scale: Object scale s in pixels
    """

    ks: Mapping[KeypointId, float]
    oks: float
    k_used: int
    scale: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "ks", MappingProxyType(dict(self.ks)))


def keypoint_similarity(d: float, s: float, c: float) -> float:
    """Gaussian falloff ``exp(-d^2 / (2 s^2 c^2))``.

    Raises:
        DegenerateScaleError: If s is not positive
        ValueError: If c is not positive or d is negative
    """
    if not s > 0:
        raise DegenerateScaleError(f"Object scale must be positive, got {s}")
    if not c > 0:
        msg = f"Falloff coefficient must be positive, got {c}"
        raise ValueError(msg)
    if d < 0:
        msg = f"Distance must be >= 0, got {d}"
        raise ValueError(msg)
    return math.exp(-(d * d) / (2.0 * s * s * c * c))


def bbox_scale(gt: GroundTruthPose) -> float:
    """Object scale: square root of the area spanned by the present keypoints.

    Raises:
        DegenerateScaleError: If the extent is zero in either axis
    """
    present = [kp for kp in gt.keypoints if kp.present]
    if len(present) < 2:
        raise DegenerateScaleError(
            f"Need at least 2 annotated keypoints for a bounding box, got {len(present)}"
        )
    xs = np.array([kp.x for kp in present])
    ys = np.array([kp.y for kp in present])
    width = float(xs.max() - xs.min())
    height = float(ys.max() - ys.min())
    if width <= 0 or height <= 0:
        raise DegenerateScaleError(f"Bounding box has zero extent ({width} x {height})")
    return math.sqrt(width * height)


def oks(det: CanonicalPose, gt: GroundTruthPose, sigma: SigmaTable) -> OksBreakdown:
    """OKS over the keypoints present in both poses.

    Raises:
        NoCommonKeypointsError: If no keypoint is present in both
        DegenerateScaleError: If the ground truth has no usable scale
    """
    common = [k for k in gt.present_ids if det[k].present]
    if not common:
        raise NoCommonKeypointsError
    s = bbox_scale(gt)
    dx = np.array([det[k].x - gt[k].x for k in common])
    dy = np.array([det[k].y - gt[k].y for k in common])
    kappa = np.array([sigma.kappa(k) for k in common])
    ks = np.exp(-(dx**2 + dy**2) / (2.0 * s**2 * kappa**2))
    return OksBreakdown(
        ks={k: float(v) for k, v in zip(common, ks, strict=True)},
        oks=float(ks.mean()),
        k_used=len(common),
        scale=s,
    )
