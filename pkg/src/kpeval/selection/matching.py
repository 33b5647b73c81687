"""One-to-one assignment of detections to ground truths by OKS."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from kpeval.core.poses import CanonicalPose, EvaluationScope, GroundTruthPose
from kpeval.exceptions import DegenerateScaleError, NoCommonKeypointsError
from kpeval.logging_config import get_logger
from kpeval.metrics.oks import oks

if TYPE_CHECKING:
    from kpeval.core.poses import FrameRecord
    from kpeval.core.skeleton import SigmaTable

logger = get_logger(__name__)


@dataclass(frozen=True)
class MatchedPair:
    """A detection matched to a ground truth, with their OKS."""

    detection: CanonicalPose
    ground_truth: GroundTruthPose
    oks: float


@dataclass(frozen=True)
class FrameAssignment:
    """Result of matching one frame."""

    sequence_id: str
    frame_id: str
    pairs: tuple[MatchedPair, ...]
    unmatched_detections: tuple[CanonicalPose, ...]
    unmatched_ground_truths: tuple[GroundTruthPose, ...]

    @property
    def detections(self) -> tuple[CanonicalPose, ...]:
        """All detections of the frame, matched or not."""
        return tuple(p.detection for p in self.pairs) + self.unmatched_detections

    @property
    def positives(self) -> int:
        """Number of ground truths in scope."""
        return len(self.pairs) + len(self.unmatched_ground_truths)


def detection_order_key(det: CanonicalPose) -> tuple[bool, float, int]:
    """Score descending, unscored last, then rank."""
    return (det.score is None, -(det.score or 0.0), det.rank)


def assign_to_ground_truths(
    frame: FrameRecord,
    sigma: SigmaTable,
    scope: EvaluationScope = EvaluationScope.INFANT,
    sequence_id: str = "",
) -> FrameAssignment:
    """Greedy injective matching of a frame's detections to its ground truths.

    Detections are visited by score (unscored last, then rank); each takes
    the still unmatched ground truth with the highest OKS against it, the
    earlier ground truth on ties. A pair whose OKS cannot be computed is
    never matched. Adult ground truths are out of scope under
    ``EvaluationScope.INFANT``.
    """
    targets = frame.targets(scope)
    detections = sorted(frame.detections, key=detection_order_key)
    table: dict[tuple[int, int], float] = {}
    for g, gt in enumerate(targets):
        for d, det in enumerate(detections):
            try:
                table[(d, g)] = oks(det, gt, sigma).oks
            except NoCommonKeypointsError:
                continue
            except DegenerateScaleError as e:
                logger.warning(
                    "Ground truth excluded from OKS in frame %s: %s",
                    frame.frame_id,
                    e.message,
                    extra={
                        "code": "degenerate_scale",
                        "sequence": sequence_id,
                        "frame": frame.frame_id,
                    },
                )
                break

    gt_used: set[int] = set()
    pairs: list[MatchedPair] = []
    unmatched: list[CanonicalPose] = []
    for d, det in enumerate(detections):
        best: int | None = None
        for g in range(len(targets)):
            if g in gt_used or (d, g) not in table:
                continue
            if best is None or table[(d, g)] > table[(d, best)]:
                best = g
        if best is None:
            unmatched.append(det)
            continue
        gt_used.add(best)
        pairs.append(MatchedPair(det, targets[best], table[(d, best)]))

    return FrameAssignment(
        sequence_id=sequence_id,
        frame_id=frame.frame_id,
        pairs=tuple(pairs),
        unmatched_detections=tuple(unmatched),
        unmatched_ground_truths=tuple(gt for g, gt in enumerate(targets) if g not in gt_used),
    )
