"""Reduce per-frame results to one MetricReport per method and group.

Reductions run over frames sorted by (method, dataset, sequence, frame),
so reports do not depend on the order results arrive in.
"""

from __future__ import annotations

from collections import defaultdict
from typing import TYPE_CHECKING

import numpy as np

from kpeval.core.skeleton import REAL_KEYPOINTS
from kpeval.exceptions import InsufficientDataError, ZeroVarianceError
from kpeval.logging_config import get_logger
from kpeval.metrics.apar import ap_ar
from kpeval.metrics.cpe import DEFAULT_CPE_C, cpe
from kpeval.metrics.missing import MissingDataReport
from kpeval.metrics.stats import spearman
from kpeval.report.models import Grouping, MeanStat, MetricReport
from kpeval.selection.redundancy import RedundancyReport

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from kpeval.report.results import FrameResult, TargetResult

logger = get_logger(__name__)


def mean_stat(values: Sequence[float]) -> MeanStat:
    """Mean and sample (n-1) standard deviation; std is None below 2 values."""
    if not values:
        return MeanStat(n=0)
    array = np.asarray(values, dtype=np.float64)
    std = float(np.std(array, ddof=1)) if array.size >= 2 else None
    return MeanStat(mean=float(array.mean()), std=std, n=int(array.size))


def _mean_of_groups(groups: Iterable[Sequence[float]]) -> float | None:
    means = [float(np.mean(g)) for g in groups if len(g) > 0]
    return float(np.mean(means)) if means else None


def _targets(frames: Sequence[FrameResult]) -> list[TargetResult]:
    return [t for f in frames for t in f.targets]


def _by_sequence(frames: Sequence[FrameResult]) -> dict[str, list[FrameResult]]:
    grouped: dict[str, list[FrameResult]] = defaultdict(list)
    for f in frames:
        grouped[f.sequence_id].append(f)
    return dict(sorted(grouped.items()))


def _oks_values(frames: Sequence[FrameResult]) -> list[float]:
    return [t.oks for t in _targets(frames) if t.oks is not None]


def _nmh_percent(frames: Sequence[FrameResult]) -> list[float]:
    return [
        100.0 * t.nmh[k] for t in _targets(frames) for k in REAL_KEYPOINTS if k in t.nmh
    ]


def _correlation(
    frames: Sequence[FrameResult], method: str, group: str
) -> tuple[float | None, float | None, int]:
    pairs = [(t.score, t.oks) for t in _targets(frames) if t.score is not None and t.oks is not None]
    if not pairs:
        return None, None, 0
    scores = [s for s, _ in pairs if s is not None]
    values = [o for _, o in pairs if o is not None]
    try:
        result = spearman(scores, values)
    except (InsufficientDataError, ZeroVarianceError) as e:
        logger.warning(
            "Score-OKS correlation undefined for %s on %s: %s",
            method,
            group,
            e.message,
            extra={"code": "correlation_undefined", "method": method, "group": group},
        )
        return None, None, len(pairs)
    return result.rho, result.p, result.n


def _missing(frames: Sequence[FrameResult]) -> MissingDataReport:
    return MissingDataReport(
        images=len(frames),
        method_keypoint_count=frames[0].method_keypoint_count,
        missing_detections=sum(1 for f in frames if f.selected_absent is None),
        missing_keypoints=sum(f.selected_absent or 0 for f in frames),
    )


def _redundancy(frames: Sequence[FrameResult]) -> RedundancyReport:
    detected = [f for f in frames if f.detection_count > 0]
    return RedundancyReport.from_counts(
        expected=sum(f.expected_persons for f in detected),
        provided=sum(f.detection_count for f in frames),
        frames_with_detections=len(detected),
        multi_person=any(f.expected_persons > 1 for f in frames),
    )


def _report(
    frames: Sequence[FrameResult],
    sequence_id: str | None,
    cpe_c: float,
) -> MetricReport:
    first = frames[0]
    targets = _targets(frames)
    ranked = all(f.assignment is not None for f in frames)
    per_sequence = _by_sequence(frames)

    ks_per_keypoint: dict[str, float] = {}
    nmh_per_keypoint: dict[str, MeanStat] = {}
    for k in REAL_KEYPOINTS:
        ks_values = [t.ks[k] for t in targets if k in t.ks]
        if ks_values:
            ks_per_keypoint[k.canonical_name] = float(np.mean(ks_values))
        nmh_values = [100.0 * t.nmh[k] for t in targets if k in t.nmh]
        if nmh_values:
            nmh_per_keypoint[k.canonical_name] = mean_stat(nmh_values)

    ap = ar = None
    matched = 0
    if ranked:
        assignments = [f.assignment for f in frames if f.assignment is not None]
        result = ap_ar(assignments)
        ap, ar = result.ap, result.ar
        matched = sum(len(a.pairs) for a in assignments)

    nmh = mean_stat(_nmh_percent(frames))
    missing = _missing(frames)
    redundancy = _redundancy(frames)
    cpe_value = None
    if nmh.mean is not None:
        cpe_value = cpe(nmh.mean, missing.percent, cpe_c).cpe

    rho, p, n_pairs = (None, None, 0)
    if ranked:
        rho, p, n_pairs = _correlation(frames, first.method, sequence_id or first.dataset_id)

    agreements = [t.agreement for t in targets if t.agreement is not None]
    return MetricReport(
        method=first.method,
        dataset_id=first.dataset_id,
        sequence_id=sequence_id,
        input_mode=first.input_mode,
        fps=first.fps,
        oks=mean_stat(_oks_values(frames)) if ranked else MeanStat(),
        oks_mean_of_sequences=(
            _mean_of_groups(_oks_values(g) for g in per_sequence.values()) if ranked else None
        ),
        ks_per_keypoint=ks_per_keypoint,
        ap=ap,
        ar=ar,
        nmh=nmh,
        nmh_mean_of_sequences=_mean_of_groups(_nmh_percent(g) for g in per_sequence.values()),
        nmh_per_keypoint=nmh_per_keypoint,
        missing_percent=missing.percent,
        missing_detections=missing.missing_detections,
        missing_keypoints=missing.missing_keypoints,
        method_keypoint_count=missing.method_keypoint_count,
        redundant_percent=redundancy.percent,
        redundancy_multi_person=redundancy.multi_person,
        cpe=cpe_value,
        spearman_rho=rho,
        spearman_p=p,
        spearman_n=n_pairs,
        frames=len(frames),
        detections=sum(f.detection_count for f in frames),
        matched_pairs=matched,
        agreement_first_score=sum(1 for a in agreements if a.first_score),
        agreement_first_oracle=sum(1 for a in agreements if a.first_oracle),
        agreement_score_oracle=sum(1 for a in agreements if a.score_oracle),
        agreement_targets=len(agreements),
    )


def aggregate(
    results: Iterable[FrameResult],
    grouping: Grouping = Grouping.DATASET,
    cpe_c: float = DEFAULT_CPE_C,
    method_order: Sequence[str] = (),
) -> list[MetricReport]:
    """One MetricReport per (method, dataset) or (method, sequence).

    Methods named in ``method_order`` come first, in that order; any other
    method follows sorted by name. Within a method, reports are sorted by
    dataset, then sequence. Groups without frames produce no report.
    """
    ordered = list(results)
    rank = {name: i for i, name in enumerate(dict.fromkeys(method_order))}
    groups: dict[tuple[str, str, str | None], list[FrameResult]] = defaultdict(list)
    for r in ordered:
        sequence = r.sequence_id if grouping is Grouping.SEQUENCE else None
        groups[(r.method, r.dataset_id, sequence)].append(r)

    def key_of(group: tuple[str, str, str | None]) -> tuple[int, str, str, str]:
        method, dataset, sequence = group
        return (rank.get(method, len(rank)), method, dataset, sequence or "")

    reports: list[MetricReport] = []
    for key in sorted(groups, key=key_of):
        frames = sorted(groups[key], key=lambda f: f.sort_key)
        reports.append(_report(frames, key[2], cpe_c))
        logger.debug("Aggregated %s on %s over %d frames", key[0], key[2] or key[1], len(frames))
    return reports


def aggregate_group(
    results: Sequence[FrameResult],
    sequence_id: str | None = None,
    cpe_c: float = DEFAULT_CPE_C,
) -> MetricReport | None:
    """Report of a single group; None with a warning when it has no frames."""
    if not results:
        logger.warning(
            "Empty group %s; no report", sequence_id or "<dataset>", extra={"code": "empty_group"}
        )
        return None
    return _report(sorted(results, key=lambda f: f.sort_key), sequence_id, cpe_c)
