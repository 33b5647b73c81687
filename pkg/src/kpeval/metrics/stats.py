"""Detection scores, score-OKS rank correlation and inter-coder ICC."""

from __future__ import annotations

import math
from enum import Enum
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy import stats

from kpeval.core.schema import resolve_score
from kpeval.exceptions import InsufficientDataError, ZeroVarianceError

if TYPE_CHECKING:
    from collections.abc import Sequence

    from kpeval.core.poses import CanonicalPose
    from kpeval.core.schema import ScorePolicy

MIN_CORRELATION_PAIRS = 3
MIN_ICC_TARGETS = 3


def detection_score(det: CanonicalPose, policy: ScorePolicy) -> float | None:
    """Whole-detection score under ``policy``, resolved as at ingest.

    A detection without a box score has no DETECTOR_BOX_SCORE score.
    """
    return resolve_score(policy, det.keypoints, det.score, det.box_score)


class Correlation(NamedTuple):
    """Spearman coefficient and its two-sided p-value."""

    rho: float
    p: float
    n: int


def _check_pairs(xs: Sequence[float], ys: Sequence[float], minimum: int) -> None:
    if len(xs) != len(ys):
        msg = f"Inputs differ in length: {len(xs)} and {len(ys)}"
        raise ValueError(msg)
    if len(xs) < minimum:
        raise InsufficientDataError(f"Need at least {minimum} pairs, got {len(xs)}")


def spearman(xs: Sequence[float], ys: Sequence[float]) -> Correlation:
    """Spearman rank correlation with the t-approximation p-value.

    Raises:
        InsufficientDataError: If fewer than 3 pairs are given
        ZeroVarianceError: If either input is constant
    """
    _check_pairs(xs, ys, MIN_CORRELATION_PAIRS)
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ZeroVarianceError("Correlation is undefined for constant input")
    result = stats.spearmanr(x, y)
    rho = float(np.clip(result.statistic, -1.0, 1.0))
    p = float(np.clip(result.pvalue, 0.0, 1.0))
    return Correlation(rho=rho, p=p, n=len(xs))


class IccForm(str, Enum):
    """Single-measure ICC forms for two coders."""

    ONE_WAY = "icc1"
    TWO_WAY_RANDOM = "icc2"
    TWO_WAY_MIXED = "icc3"


def icc(
    coder_a: Sequence[float],
    coder_b: Sequence[float],
    form: IccForm = IccForm.TWO_WAY_MIXED,
) -> float:
    """Intraclass correlation of two coders' paired measurements.

    The default is the two-way mixed, single-measure, consistency form
    ICC(3,1).

    Raises:
        InsufficientDataError: If fewer than 3 targets are paired
        ZeroVarianceError: If the ANOVA leaves no variance to compare
    """
    _check_pairs(coder_a, coder_b, MIN_ICC_TARGETS)
    m = np.column_stack([np.asarray(coder_a, float), np.asarray(coder_b, float)])
    n, k = m.shape
    row_means = m.mean(axis=1)
    col_means = m.mean(axis=0)
    grand = col_means.mean()

    ms_rows = np.var(row_means, ddof=1) * k
    ms_cols = np.var(col_means, ddof=1) * n
    residual = m - row_means[:, None] - col_means[None, :] + grand
    ms_error = float(np.sum(residual**2)) / ((n - 1) * (k - 1))
    ms_within = float(np.sum(np.var(m, axis=1, ddof=1))) / n

    match form:
        case IccForm.ONE_WAY:
            numerator = ms_rows - ms_within
            denominator = ms_rows + (k - 1) * ms_within
        case IccForm.TWO_WAY_RANDOM:
            numerator = ms_rows - ms_error
            denominator = ms_rows + (k - 1) * ms_error + k * (ms_cols - ms_error) / n
        case IccForm.TWO_WAY_MIXED:
            numerator = ms_rows - ms_error
            denominator = ms_rows + (k - 1) * ms_error
    if denominator == 0 or not math.isfinite(denominator):
        raise ZeroVarianceError("ICC is undefined: no variance between or within targets")
    return float(numerator / denominator)
