"""Report models written to and read from JSON."""

from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, Field, field_validator

REPORT_VERSION = "1"
STD_CONVENTION = "sample"


class Grouping(str, Enum):
    """Level at which frame results are pooled."""

    DATASET = "dataset"
    SEQUENCE = "sequence"


class MeanStat(BaseModel):
    """Mean and sample standard deviation with the number of measurements."""

    mean: float | None = None
    std: float | None = None
    n: int = Field(default=0, ge=0)

    model_config = {"frozen": True}


class MetricReport(BaseModel):
    """Every metric of one method on one dataset or sequence.

    OKS, AP, AR and score correlation stay None for methods that do not
    produce detections of their own (mixture averages). Neck-MidHip
    values are percentages of the torso length.
    """

    method: str
    dataset_id: str
    sequence_id: str | None = None
    input_mode: str = "images"
    fps: float | None = None

    oks: MeanStat = Field(default_factory=MeanStat)
    oks_mean_of_sequences: float | None = None
    ks_per_keypoint: dict[str, float] = Field(default_factory=dict)
    ap: float | None = None
    ar: float | None = None

    nmh: MeanStat = Field(default_factory=MeanStat)
    nmh_mean_of_sequences: float | None = None
    nmh_per_keypoint: dict[str, MeanStat] = Field(default_factory=dict)

    missing_percent: float = 0.0
    missing_detections: int = 0
    missing_keypoints: int = 0
    method_keypoint_count: int = 17

    redundant_percent: float | None = None
    redundancy_multi_person: bool = False

    cpe: float | None = None

    spearman_rho: float | None = None
    spearman_p: float | None = None
    spearman_n: int = 0

    frames: int = 0
    detections: int = 0
    matched_pairs: int = 0

    agreement_first_score: int = 0
    agreement_first_oracle: int = 0
    agreement_score_oracle: int = 0
    agreement_targets: int = 0

    model_config = {"frozen": True}

    @property
    def group(self) -> str:
        """Row label: the sequence id, or the dataset id for pooled reports."""
        return self.sequence_id or self.dataset_id


class ReportBundle(BaseModel):
    """A run's reports plus the settings needed to reproduce them."""

    report_version: str = REPORT_VERSION
    toolkit_version: str
    sigma_digest: str
    cpe_c: float
    std_convention: str = STD_CONVENTION
    selection: str
    scope: str = "infant"
    grouping: Grouping = Grouping.DATASET
    reports: list[MetricReport] = Field(default_factory=list)

    @field_validator("selection", "scope", mode="before")
    @classmethod
    def normalize_lower(cls, v: object) -> object:
        """Normalize enum-like labels to lowercase."""
        if isinstance(v, str):
            return v.lower()
        return v
