"""Pose-estimation metrics."""

from kpeval.metrics.apar import OKS_THRESHOLDS, ApArResult, ap_ar
from kpeval.metrics.cpe import DEFAULT_CPE_C, CpeResult, cpe
from kpeval.metrics.missing import MissingDataReport, missing_data
from kpeval.metrics.nmh import (
    NmhError,
    NormalizerSource,
    nmh_errors,
    nmh_length_image,
    nmh_length_sequence,
)
from kpeval.metrics.oks import OksBreakdown, bbox_scale, keypoint_similarity, oks
from kpeval.metrics.stats import Correlation, IccForm, detection_score, icc, spearman

__all__ = [
    "DEFAULT_CPE_C",
    "OKS_THRESHOLDS",
    "ApArResult",
    "Correlation",
    "CpeResult",
    "IccForm",
    "MissingDataReport",
    "NmhError",
    "NormalizerSource",
    "OksBreakdown",
    "ap_ar",
    "bbox_scale",
    "cpe",
    "detection_score",
    "icc",
    "keypoint_similarity",
    "missing_data",
    "nmh_errors",
    "nmh_length_image",
    "nmh_length_sequence",
    "oks",
    "spearman",
]
