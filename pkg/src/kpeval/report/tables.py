"""CSV and JSON emission of report bundles."""

from __future__ import annotations

from enum import Enum
from typing import TYPE_CHECKING, Any

import pandas as pd

from kpeval.core.skeleton import REAL_KEYPOINTS
from kpeval.exceptions import OutputWriteError
from kpeval.logging_config import get_logger
from kpeval.report.models import MeanStat, MetricReport

if TYPE_CHECKING:
    from pathlib import Path

    from kpeval.report.models import ReportBundle

logger = get_logger(__name__)

# Decimals per rendered quantity
OKS_DECIMALS = 2
AP_AR_DECIMALS = 1
NMH_DECIMALS = 1
CPE_DECIMALS = 2
PERCENT_DECIMALS = 1
RHO_DECIMALS = 2
P_DECIMALS = 4


class TableFormat(str, Enum):
    """Output formats of emit_tables."""

    CSV = "csv"
    JSON = "json"


def _fmt(value: float | None, decimals: int) -> str:
    if value is None:
        return ""
    return f"{value:.{decimals}f}"


def report_row(report: MetricReport) -> dict[str, Any]:
    """Flatten a report into rendered CSV cells, in column order."""
    row: dict[str, Any] = {
        "method": report.method,
        "dataset_id": report.dataset_id,
        "sequence_id": report.sequence_id or "",
        "input_mode": report.input_mode,
        "fps": "" if report.fps is None else f"{report.fps:g}",
        "frames": report.frames,
        "detections": report.detections,
        "matched_pairs": report.matched_pairs,
        "oks_mean": _fmt(report.oks.mean, OKS_DECIMALS),
        "oks_std": _fmt(report.oks.std, OKS_DECIMALS),
        "oks_n": report.oks.n,
        "oks_mean_of_sequences": _fmt(report.oks_mean_of_sequences, OKS_DECIMALS),
        "ap": _fmt(report.ap, AP_AR_DECIMALS),
        "ar": _fmt(report.ar, AP_AR_DECIMALS),
        "nmh_mean": _fmt(report.nmh.mean, NMH_DECIMALS),
        "nmh_std": _fmt(report.nmh.std, NMH_DECIMALS),
        "nmh_n": report.nmh.n,
        "nmh_mean_of_sequences": _fmt(report.nmh_mean_of_sequences, NMH_DECIMALS),
        "missing_percent": _fmt(report.missing_percent, PERCENT_DECIMALS),
        "redundant_percent": _fmt(report.redundant_percent, PERCENT_DECIMALS),
        "redundancy_multi_person": str(report.redundancy_multi_person).lower(),
        "cpe": _fmt(report.cpe, CPE_DECIMALS),
        "spearman_rho": _fmt(report.spearman_rho, RHO_DECIMALS),
        "spearman_p": _fmt(report.spearman_p, P_DECIMALS),
        "spearman_n": report.spearman_n,
        "agreement_first_score": report.agreement_first_score,
        "agreement_first_oracle": report.agreement_first_oracle,
        "agreement_score_oracle": report.agreement_score_oracle,
        "agreement_targets": report.agreement_targets,
    }
    for k in REAL_KEYPOINTS:
        stat = report.nmh_per_keypoint.get(k.canonical_name)
        row[f"nmh_{k.canonical_name}"] = _fmt(stat.mean if stat else None, NMH_DECIMALS)
    for k in REAL_KEYPOINTS:
        stat = report.nmh_per_keypoint.get(k.canonical_name)
        row[f"nmh_std_{k.canonical_name}"] = _fmt(stat.std if stat else None, NMH_DECIMALS)
    return row


def report_row_columns() -> list[str]:
    """CSV column order."""
    return list(report_row(MetricReport(method="", dataset_id="")).keys())


def render_csv(reports: list[MetricReport]) -> str:
    """Render reports as CSV text with a header row."""
    frame = pd.DataFrame([report_row(r) for r in reports])
    if frame.empty:
        frame = pd.DataFrame(columns=report_row_columns())
    return str(frame.to_csv(index=False, lineterminator="\n"))


def _round(value: float | None, decimals: int) -> float | None:
    return None if value is None else round(value, decimals)


def _round_stat(stat: MeanStat, decimals: int) -> MeanStat:
    return MeanStat(mean=_round(stat.mean, decimals), std=_round(stat.std, decimals), n=stat.n)


def rounded_report(report: MetricReport) -> MetricReport:
    """Copy of ``report`` with every metric rounded as in the CSV table."""
    return report.model_copy(
        update={
            "oks": _round_stat(report.oks, OKS_DECIMALS),
            "oks_mean_of_sequences": _round(report.oks_mean_of_sequences, OKS_DECIMALS),
            "ks_per_keypoint": {
                k: round(v, OKS_DECIMALS) for k, v in report.ks_per_keypoint.items()
            },
            "ap": _round(report.ap, AP_AR_DECIMALS),
            "ar": _round(report.ar, AP_AR_DECIMALS),
            "nmh": _round_stat(report.nmh, NMH_DECIMALS),
            "nmh_mean_of_sequences": _round(report.nmh_mean_of_sequences, NMH_DECIMALS),
            "nmh_per_keypoint": {
                k: _round_stat(v, NMH_DECIMALS) for k, v in report.nmh_per_keypoint.items()
            },
            "missing_percent": round(report.missing_percent, PERCENT_DECIMALS),
            "redundant_percent": _round(report.redundant_percent, PERCENT_DECIMALS),
            "cpe": _round(report.cpe, CPE_DECIMALS),
            "spearman_rho": _round(report.spearman_rho, RHO_DECIMALS),
            "spearman_p": _round(report.spearman_p, P_DECIMALS),
        }
    )


def render_json(bundle: ReportBundle) -> str:
    """Render a bundle as indented JSON, metrics rounded as in the CSV table."""
    rounded = bundle.model_copy(update={"reports": [rounded_report(r) for r in bundle.reports]})
    return rounded.model_dump_json(indent=2) + "\n"


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as e:
        raise OutputWriteError(f"Cannot write report: {e}", str(path)) from e


def emit_tables(bundle: ReportBundle, fmt: TableFormat, path: Path) -> Path:
    """Write a bundle's reports as CSV or JSON.

    Raises:
        OutputWriteError: If the file cannot be written
    """
    text = render_csv(bundle.reports) if fmt is TableFormat.CSV else render_json(bundle)
    _write(path, text)
    logger.info("Wrote %d reports to %s", len(bundle.reports), path)
    return path
