"""Brute-force reference implementations used to cross-check the metrics.

Everything here is written out term by term in plain Python and does
not call into ``kpeval.metrics`` or ``kpeval.selection``. The oracles
only accept small instances.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

from kpeval.core.poses import EvaluationScope, Role
from kpeval.core.skeleton import REAL_KEYPOINTS
from kpeval.exceptions import (
    DegenerateScaleError,
    InstanceTooLargeError,
    NoCommonKeypointsError,
)

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

    from kpeval.core.poses import CanonicalPose, FrameRecord, GroundTruthPose
    from kpeval.core.skeleton import SigmaTable
    from kpeval.metrics.stats import IccForm

MAX_FRAMES = 10
MAX_DETECTIONS_PER_FRAME = 5
MAX_GROUND_TRUTHS_PER_FRAME = 5
MAX_PAIRS = 50

_THRESHOLDS = [0.5 + 0.05 * i for i in range(10)]
_RECALL_STEPS = 101


def oracle_oks(det: CanonicalPose, gt: GroundTruthPose, sigma: SigmaTable) -> float:
    """OKS summed keypoint by keypoint.

    Raises:
        NoCommonKeypointsError: If no keypoint is present in both poses
        DegenerateScaleError: If the annotated keypoints span no area
    """
    common = [k for k in REAL_KEYPOINTS if gt[k].present and det[k].present]
    if not common:
        raise NoCommonKeypointsError
    placed = [gt[k] for k in REAL_KEYPOINTS if gt[k].present]
    min_x = min(p.x for p in placed)
    max_x = max(p.x for p in placed)
    min_y = min(p.y for p in placed)
    max_y = max(p.y for p in placed)
    area = (max_x - min_x) * (max_y - min_y)
    if len(placed) < 2 or area <= 0:
        raise DegenerateScaleError(f"Annotated area is {area}")

    total = 0.0
    for k in common:
        dx = det[k].x - gt[k].x
        dy = det[k].y - gt[k].y
        c = 2.0 * sigma.sigma[k]
        total += math.exp(-(dx * dx + dy * dy) / (2.0 * area * c * c))
    return total / len(common)


def _by_score(detections: Sequence[CanonicalPose]) -> list[CanonicalPose]:
    scored = [d for d in detections if d.score is not None]
    unscored = [d for d in detections if d.score is None]
    scored.sort(key=lambda d: d.rank)
    scored.sort(key=lambda d: d.score or 0.0, reverse=True)
    unscored.sort(key=lambda d: d.rank)
    return scored + unscored


def _matchings(
    n_det: int, n_gt: int, allowed: dict[tuple[int, int], float]
) -> Iterator[list[tuple[int, int]]]:
    """Every injective partial matching over the allowed pairs."""

    def extend(d: int, used: frozenset[int]) -> Iterator[list[tuple[int, int]]]:
        if d == n_det:
            yield []
            return
        for rest in extend(d + 1, used):
            yield rest
        for g in range(n_gt):
            if g not in used and (d, g) in allowed:
                for rest in extend(d + 1, used | {g}):
                    yield [(d, g), *rest]

    yield from extend(0, frozenset())


def oracle_frame_matching(
    frame: FrameRecord,
    sigma: SigmaTable,
    scope: EvaluationScope = EvaluationScope.INFANT,
) -> tuple[list[CanonicalPose], list[float | None], int]:
    """Exhaustively enumerate one frame's matchings and keep the greedy one.

    Taken in score order, each detection holds the best OKS (then the
    earliest ground truth) still available to it, so the greedy matching
    is the lexicographically largest list of per-detection results, with
    unmatched detections ranking below any match.

    Returns:
        Detections in score order, the matched OKS of each (None if
        unmatched) and the number of in-scope ground truths
    """
    targets = [
        gt for gt in frame.ground_truths if scope is EvaluationScope.ALL or gt.role is Role.INFANT
    ]
    detections = _by_score(frame.detections)
    if len(detections) > MAX_DETECTIONS_PER_FRAME or len(targets) > MAX_GROUND_TRUTHS_PER_FRAME:
        raise InstanceTooLargeError(
            f"{len(detections)} detections and {len(targets)} ground truths in one frame",
            frame.frame_id,
        )
    allowed: dict[tuple[int, int], float] = {}
    for d, det in enumerate(detections):
        for g, gt in enumerate(targets):
            try:
                allowed[(d, g)] = oracle_oks(det, gt, sigma)
            except (NoCommonKeypointsError, DegenerateScaleError):
                continue

    best_key: list[tuple[float, int]] | None = None
    best: dict[int, float] = {}
    for matching in _matchings(len(detections), len(targets), allowed):
        chosen = dict(matching)
        key = [
            (allowed[(d, chosen[d])], -chosen[d]) if d in chosen else (-1.0, 0)
            for d in range(len(detections))
        ]
        if best_key is None or key > best_key:
            best_key = key
            best = {d: allowed[(d, g)] for d, g in matching}
    matched: list[float | None] = [best.get(d) for d in range(len(detections))]
    return detections, matched, len(targets)


def oracle_ap(
    frames: Sequence[FrameRecord],
    sigma: SigmaTable,
    scope: EvaluationScope = EvaluationScope.INFANT,
    sequence_id: str = "",
) -> tuple[float, float]:
    """AP and AR in percent by explicit precision-recall integration.

    Raises:
        InstanceTooLargeError: Above 10 frames or 5 detections per frame
    """
    if len(frames) > MAX_FRAMES:
        raise InstanceTooLargeError(f"{len(frames)} frames", sequence_id)
    rows: list[tuple[tuple[int, float, str, str, int], float | None]] = []
    positives = 0
    for frame in frames:
        detections, matched, n_targets = oracle_frame_matching(frame, sigma, scope)
        positives += n_targets
        for det, value in zip(detections, matched, strict=True):
            unscored = 1 if det.score is None else 0
            score = 0.0 if det.score is None else det.score
            rows.append(((unscored, -score, sequence_id, frame.frame_id, det.rank), value))
    rows.sort(key=lambda r: r[0])
    if positives == 0 or not rows:
        return 0.0, 0.0

    recall_points = [0.01 * i for i in range(_RECALL_STEPS)]
    recall_points[-1] = 1.0
    ap_total = 0.0
    ar_total = 0.0
    for t in _THRESHOLDS:
        curve: list[tuple[float, float]] = []
        tp = 0
        for i, (_, value) in enumerate(rows):
            if value is not None and value > t:
                tp += 1
            curve.append((tp / positives, tp / (i + 1)))
        area = 0.0
        for r in recall_points:
            reachable = [p for rec, p in curve if rec >= r]
            area += max(reachable) if reachable else 0.0
        ap_total += area / _RECALL_STEPS
        ar_total += tp / positives
    return 100.0 * ap_total / len(_THRESHOLDS), 100.0 * ar_total / len(_THRESHOLDS)


def _check_size(n: int, m: int) -> None:
    if n != m:
        msg = f"Inputs differ in length: {n} and {m}"
        raise ValueError(msg)
    if n > MAX_PAIRS:
        raise InstanceTooLargeError(f"{n} pairs")


def _average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        # positions i..j tie; ranks are 1-based
        shared = (i + j) / 2.0 + 1.0
        for pos in range(i, j + 1):
            ranks[order[pos]] = shared
        i = j + 1
    return ranks


def oracle_spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of average-tie ranks.

    Raises:
        InstanceTooLargeError: Above 50 pairs
    """
    _check_size(len(xs), len(ys))
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    n = len(rx)
    mean_x = sum(rx) / n
    mean_y = sum(ry) / n
    sxy = sum((a - mean_x) * (b - mean_y) for a, b in zip(rx, ry, strict=True))
    sxx = sum((a - mean_x) ** 2 for a in rx)
    syy = sum((b - mean_y) ** 2 for b in ry)
    return sxy / math.sqrt(sxx * syy)


def oracle_icc(coder_a: Sequence[float], coder_b: Sequence[float], form: IccForm) -> float:
    """Single-measure ICC from two-way ANOVA sums of squares.

    Raises:
        InstanceTooLargeError: Above 50 targets
    """
    _check_size(len(coder_a), len(coder_b))
    table = [[a, b] for a, b in zip(coder_a, coder_b, strict=True)]
    n = len(table)
    k = 2
    grand = sum(a + b for a, b in table) / (n * k)
    row_means = [(a + b) / k for a, b in table]
    col_means = [sum(row[j] for row in table) / n for j in range(k)]

    ss_rows = k * sum((m - grand) ** 2 for m in row_means)
    ss_cols = n * sum((m - grand) ** 2 for m in col_means)
    ss_within = sum((row[j] - row_means[i]) ** 2 for i, row in enumerate(table) for j in range(k))
    ss_error = sum(
        (row[j] - row_means[i] - col_means[j] + grand) ** 2
        for i, row in enumerate(table)
        for j in range(k)
    )
    ms_rows = ss_rows / (n - 1)
    ms_cols = ss_cols / (k - 1)
    ms_within = ss_within / (n * (k - 1))
    ms_error = ss_error / ((n - 1) * (k - 1))

    match form.value:
        case "icc1":
            return (ms_rows - ms_within) / (ms_rows + (k - 1) * ms_within)
        case "icc2":
            return (ms_rows - ms_error) / (
                ms_rows + (k - 1) * ms_error + k * (ms_cols - ms_error) / n
            )
        case _:
            return (ms_rows - ms_error) / (ms_rows + (k - 1) * ms_error)
