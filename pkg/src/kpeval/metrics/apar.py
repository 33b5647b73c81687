"""Average precision and recall over ten OKS thresholds.

Matching comes from ``assign_to_ground_truths``. At each threshold a
matched pair with OKS strictly above it is a true positive; every other
detection is a false positive and every ground truth without a true
positive is a false negative. Precision is the 101-point interpolated
area under the precision-recall curve of the globally score-ranked
detections (unscored last, then sequence, frame and rank).
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import TYPE_CHECKING

import numpy as np

from kpeval.logging_config import get_logger

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from kpeval.selection.matching import FrameAssignment

logger = get_logger(__name__)

OKS_THRESHOLDS: tuple[float, ...] = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))
RECALL_POINTS = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class ApArResult:
    """AP and AR in percent plus (precision, recall) per threshold."""

    ap: float
    ar: float
    per_threshold: Mapping[float, tuple[float, float]]
    positives: int = 0
    detections: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_threshold", MappingProxyType(dict(self.per_threshold)))


def _ranked(assignments: Sequence[FrameAssignment]) -> list[float | None]:
    """OKS of each detection's match (None if unmatched), in global score order."""
    rows: list[tuple[bool, float, str, str, int, float | None]] = []
    for a in assignments:
        for pair in a.pairs:
            det = pair.detection
            rows.append(
                (det.score is None, -(det.score or 0.0), a.sequence_id, a.frame_id,
                 det.rank, pair.oks)
            )  # fmt: skip
        for det in a.unmatched_detections:
            rows.append(
                (det.score is None, -(det.score or 0.0), a.sequence_id, a.frame_id,
                 det.rank, None)
            )  # fmt: skip
    rows.sort(key=lambda r: r[:5])
    return [r[5] for r in rows]


def interpolated_precision(tp: np.ndarray, positives: int) -> tuple[float, float]:
    """101-point interpolated precision and final recall of a ranked TP flag list."""
    if tp.size == 0 or positives == 0:
        return 0.0, 0.0
    tp_sum = np.cumsum(tp, dtype=np.float64)
    fp_sum = np.cumsum(~tp, dtype=np.float64)
    recall = tp_sum / positives
    precision = tp_sum / (tp_sum + fp_sum)
    # precision envelope: best precision at any deeper cut-off
    precision = np.maximum.accumulate(precision[::-1])[::-1]
    indices = np.searchsorted(recall, RECALL_POINTS, side="left")
    sampled = np.zeros(RECALL_POINTS.size)
    valid = indices < precision.size
    sampled[valid] = precision[indices[valid]]
    return float(sampled.mean()), float(recall[-1])


def ap_ar(assignments: Sequence[FrameAssignment]) -> ApArResult:
    """AP and AR of a matched set of frames.

    Args:
        assignments: Per-frame matching of all detections against the
            in-scope ground truths

    Returns:
        ApArResult; both values are 0 when there is no ground truth
    """
    positives = sum(a.positives for a in assignments)
    ranked = _ranked(assignments)
    if positives == 0:
        logger.warning(
            "No ground truth in scope; AP and AR are 0",
            extra={"code": "no_positives", "detections": len(ranked)},
        )
    per_threshold: dict[float, tuple[float, float]] = {}
    for t in OKS_THRESHOLDS:
        tp = np.array([v is not None and v > t for v in ranked], dtype=bool)
        per_threshold[t] = interpolated_precision(tp, positives)
    precisions = [p for p, _ in per_threshold.values()]
    recalls = [r for _, r in per_threshold.values()]
    return ApArResult(
        ap=100.0 * float(np.mean(precisions)),
        ar=100.0 * float(np.mean(recalls)),
        per_threshold=per_threshold,
        positives=positives,
        detections=len(ranked),
    )
