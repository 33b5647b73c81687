"""Inter-coder reliability between two coders' annotations.

Two measures are provided: the ICC per keypoint and axis, and the
Neck-MidHip error of the second coder with the first coder's
annotations taken as ground truth, so that human agreement can be read
on the same scale as the pose estimation methods.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import pandas as pd

from kpeval.core.poses import EvaluationScope
from kpeval.core.skeleton import REAL_KEYPOINTS, KeypointId
from kpeval.exceptions import (
    InsufficientDataError,
    NoNormalizerError,
    OutputWriteError,
    ZeroVarianceError,
)
from kpeval.logging_config import get_logger
from kpeval.metrics.nmh import nmh_errors, nmh_length_sequence
from kpeval.metrics.stats import MIN_ICC_TARGETS, IccForm, icc
from kpeval.report.aggregate import mean_stat
from kpeval.report.tables import NMH_DECIMALS

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence
    from pathlib import Path

    from kpeval.core.poses import GroundTruthPose, SequenceDataset
    from kpeval.report.models import MeanStat

logger = get_logger(__name__)

AXES = ("x", "y")
ICC_DECIMALS = 3
OVERALL = "all"


@dataclass(frozen=True)
class IccRow:
    """ICC of one keypoint coordinate; ``icc`` is None when undefined."""

    keypoint: KeypointId
    axis: str
    icc: float | None
    n: int


@dataclass(frozen=True)
class CoderNmhRow:
    """Second coder's Neck-MidHip error in percent, for one keypoint or all."""

    keypoint: str
    error: MeanStat


def _paired_targets(
    coder_a: Sequence[SequenceDataset],
    coder_b: Sequence[SequenceDataset],
    scope: EvaluationScope,
) -> Iterator[tuple[str, GroundTruthPose, GroundTruthPose]]:
    """First in-scope ground truth of each coder, paired by sequence and frame id."""
    other = {(d.sequence_id, f.frame_id): f for d in coder_b for f in d.frames}
    unpaired = 0
    for dataset in coder_a:
        for frame in dataset.frames:
            partner = other.get((dataset.sequence_id, frame.frame_id))
            if partner is None:
                unpaired += 1
                continue
            targets_a = frame.targets(scope)
            targets_b = partner.targets(scope)
            if targets_a and targets_b:
                yield dataset.sequence_id, targets_a[0], targets_b[0]
    if unpaired:
        logger.warning(
            "%d frames of the first coder have no counterpart",
            unpaired,
            extra={"code": "unpaired_frames", "count": unpaired},
        )


def paired_coordinates(
    coder_a: Sequence[SequenceDataset],
    coder_b: Sequence[SequenceDataset],
    scope: EvaluationScope = EvaluationScope.INFANT,
) -> dict[tuple[KeypointId, str], tuple[list[float], list[float]]]:
    """Coordinates both coders placed, paired by sequence and frame id.

    Each frame contributes its first in-scope ground truth of each coder.
    """
    pairs: dict[tuple[KeypointId, str], tuple[list[float], list[float]]] = {
        (k, axis): ([], []) for k in REAL_KEYPOINTS for axis in AXES
    }
    for _, gt_a, gt_b in _paired_targets(coder_a, coder_b, scope):
        for k in REAL_KEYPOINTS:
            if not (gt_a[k].present and gt_b[k].present):
                continue
            xs, xs_other = pairs[(k, "x")]
            xs.append(gt_a[k].x)
            xs_other.append(gt_b[k].x)
            ys, ys_other = pairs[(k, "y")]
            ys.append(gt_a[k].y)
            ys_other.append(gt_b[k].y)
    return pairs


def icc_table(
    coder_a: Sequence[SequenceDataset],
    coder_b: Sequence[SequenceDataset],
    form: IccForm = IccForm.TWO_WAY_MIXED,
    scope: EvaluationScope = EvaluationScope.INFANT,
) -> list[IccRow]:
    """ICC per keypoint and axis; keypoints with fewer than 3 pairs are absent."""
    rows: list[IccRow] = []
    for (k, axis), (a, b) in paired_coordinates(coder_a, coder_b, scope).items():
        value = None
        if len(a) >= MIN_ICC_TARGETS:
            try:
                value = icc(a, b, form)
            except (InsufficientDataError, ZeroVarianceError) as e:
                logger.warning(
                    "ICC undefined for %s.%s: %s",
                    k.canonical_name,
                    axis,
                    e.message,
                    extra={"code": "icc_undefined", "keypoint": k.canonical_name, "axis": axis},
                )
        rows.append(IccRow(keypoint=k, axis=axis, icc=value, n=len(a)))
    return rows


def min_icc(rows: Sequence[IccRow]) -> float | None:
    """Smallest defined ICC."""
    values = [r.icc for r in rows if r.icc is not None]
    return min(values) if values else None


def coder_nmh_table(
    coder_a: Sequence[SequenceDataset],
    coder_b: Sequence[SequenceDataset],
    scope: EvaluationScope = EvaluationScope.INFANT,
) -> list[CoderNmhRow]:
    """Neck-MidHip error of the second coder against the first.

    Errors are normalized by the first coder's median Neck-MidHip length
    of each sequence. The first row pools every keypoint; one row per
    keypoint follows in canonical order.
    """
    normalizers: dict[str, float] = {}
    for dataset in coder_a:
        try:
            normalizers[dataset.sequence_id] = nmh_length_sequence(dataset, scope)
        except NoNormalizerError:
            logger.warning(
                "No Neck-MidHip length in %s; coder errors are absent",
                dataset.sequence_id,
                extra={"code": "no_normalizer", "sequence": dataset.sequence_id},
            )

    per_keypoint: dict[KeypointId, list[float]] = {k: [] for k in REAL_KEYPOINTS}
    for sequence_id, gt_a, gt_b in _paired_targets(coder_a, coder_b, scope):
        normalizer = normalizers.get(sequence_id)
        if normalizer is None:
            continue
        for k, error in nmh_errors(gt_b, gt_a, normalizer).errors.items():
            per_keypoint[k].append(100.0 * error)

    pooled = [e for k in REAL_KEYPOINTS for e in per_keypoint[k]]
    return [
        CoderNmhRow(OVERALL, mean_stat(pooled)),
        *(CoderNmhRow(k.canonical_name, mean_stat(per_keypoint[k])) for k in REAL_KEYPOINTS),
    ]


def _fmt(value: float | None, decimals: int) -> str:
    return "" if value is None else f"{value:.{decimals}f}"


def render_icc_csv(rows: Sequence[IccRow]) -> str:
    """CSV with one line per keypoint and axis; undefined values are empty."""
    frame = pd.DataFrame(
        [
            {
                "keypoint": r.keypoint.canonical_name,
                "axis": r.axis,
                "icc": _fmt(r.icc, ICC_DECIMALS),
                "n": r.n,
            }
            for r in rows
        ],
        columns=["keypoint", "axis", "icc", "n"],
    )
    return str(frame.to_csv(index=False, lineterminator="\n"))


def render_coder_nmh_csv(rows: Sequence[CoderNmhRow]) -> str:
    """CSV of the second coder's Neck-MidHip errors; undefined values are empty."""
    frame = pd.DataFrame(
        [
            {
                "keypoint": r.keypoint,
                "nmh_mean": _fmt(r.error.mean, NMH_DECIMALS),
                "nmh_std": _fmt(r.error.std, NMH_DECIMALS),
                "n": r.error.n,
            }
            for r in rows
        ],
        columns=["keypoint", "nmh_mean", "nmh_std", "n"],
    )
    return str(frame.to_csv(index=False, lineterminator="\n"))


def _write(text: str, path: Path, what: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as e:
        raise OutputWriteError(f"Cannot write {what}: {e}", str(path)) from e
    return path


def emit_icc_csv(rows: Sequence[IccRow], path: Path) -> Path:
    """Write the ICC table.

    Raises:
        OutputWriteError: If the file cannot be written
    """
    return _write(render_icc_csv(rows), path, "ICC table")


def emit_coder_nmh_csv(rows: Sequence[CoderNmhRow], path: Path) -> Path:
    """Write the second coder's Neck-MidHip table.

    Raises:
        OutputWriteError: If the file cannot be written
    """
    return _write(render_coder_nmh_csv(rows), path, "coder Neck-MidHip table")
