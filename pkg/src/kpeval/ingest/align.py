"""Merge a method's detections into a ground-truth sequence."""

from __future__ import annotations

from typing import TYPE_CHECKING

from kpeval.exceptions import SequenceMismatchError
from kpeval.logging_config import get_logger

if TYPE_CHECKING:
    from kpeval.core.poses import SequenceDataset
    from kpeval.ingest.formats import DetectionFile

logger = get_logger(__name__)


def align(dataset: SequenceDataset, det: DetectionFile) -> SequenceDataset:
    """Populate each frame's detections from ``det`` by exact frame id.

    Frames absent from ``det`` get no detections (missing detections).
    Detection frames with no ground-truth frame are orphans: they are
    reported in one warning and not merged. Frame order is kept.

    Raises:
        SequenceMismatchError: If ``det`` belongs to another sequence
    """
    if det.sequence_id != dataset.sequence_id:
        raise SequenceMismatchError(
            f"Detections of {det.method_name} are for sequence {det.sequence_id!r}, "
            f"not {dataset.sequence_id!r}",
            det.source or None,
        )
    known = set(dataset.frame_ids)
    orphans = [fid for fid in det.frames if fid not in known]
    if orphans:
        logger.warning(
            "%d detection frames of %s have no ground truth in %s",
            len(orphans),
            det.method_name,
            dataset.sequence_id,
            extra={
                "code": "orphan_frames",
                "method": det.method_name,
                "sequence": dataset.sequence_id,
                "frames": orphans,
            },
        )
    return dataset.with_frames(
        frame.with_detections(det.frames.get(frame.frame_id, ())) for frame in dataset.frames
    )
