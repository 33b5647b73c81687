"""Method-by-dataset comparison of several report files."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import pandas as pd
from pydantic import ValidationError

from kpeval.exceptions import ParseError, SchemaMismatchError
from kpeval.logging_config import get_logger
from kpeval.report import tables
from kpeval.report.models import REPORT_VERSION, ReportBundle

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from kpeval.report.models import MetricReport

logger = get_logger(__name__)

ABSENT = "-"
BEST_MARK = "*"


class CompareMetric(str, Enum):
    """Metrics that can be compared, with their rendering and direction."""

    OKS = "oks"
    AP = "ap"
    AR = "ar"
    NMH = "nmh"
    MISSING = "missing"
    REDUNDANCY = "redundancy"
    CPE = "cpe"
    RHO = "rho"

    def extract(self, report: MetricReport) -> float | None:
        """The compared quantity of a report."""
        match self:
            case CompareMetric.OKS:
                return report.oks.mean
            case CompareMetric.AP:
                return report.ap
            case CompareMetric.AR:
                return report.ar
            case CompareMetric.NMH:
                return report.nmh.mean
            case CompareMetric.MISSING:
                return report.missing_percent
            case CompareMetric.REDUNDANCY:
                return report.redundant_percent
            case CompareMetric.CPE:
                return report.cpe
            case CompareMetric.RHO:
                return report.spearman_rho

    def goodness(self, value: float) -> float:
        """Larger is better after this transform."""
        match self:
            case CompareMetric.NMH | CompareMetric.MISSING:
                return -value
            case CompareMetric.REDUNDANCY:
                return -abs(value)
            case _:
                return value

    @property
    def decimals(self) -> int:
        """Rendering precision."""
        match self:
            case CompareMetric.OKS | CompareMetric.CPE | CompareMetric.RHO:
                return tables.OKS_DECIMALS
            case _:
                return tables.AP_AR_DECIMALS


@dataclass(frozen=True)
class ComparisonTable:
    """Rows are (dataset or sequence, input mode); columns are methods."""

    metric: CompareMetric
    rows: tuple[tuple[str, str], ...]
    methods: tuple[str, ...]
    cells: dict[tuple[tuple[str, str], str], float]
    best: dict[tuple[str, str], frozenset[str]]

    def render_csv(self) -> str:
        """CSV with the best value of each row marked by a trailing ``*``."""
        records = []
        for row in self.rows:
            record: dict[str, str] = {"dataset": row[0], "input_mode": row[1]}
            for method in self.methods:
                value = self.cells.get((row, method))
                if value is None:
                    record[method] = ABSENT
                    continue
                text = f"{value:.{self.metric.decimals}f}"
                record[method] = text + BEST_MARK if method in self.best[row] else text
            records.append(record)
        frame = pd.DataFrame(records, columns=["dataset", "input_mode", *self.methods])
        return str(frame.to_csv(index=False, lineterminator="\n"))


def load_bundle(path: Path) -> ReportBundle:
    """Read a ``report.json`` file.

    Raises:
        ParseError: If the file is unreadable or not a report bundle
        SchemaMismatchError: If it was written by another report version
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"Cannot read report: {e}", str(path)) from e
    try:
        bundle = ReportBundle.model_validate_json(text)
    except ValidationError as e:
        raise ParseError(
            f"Not a report bundle: {e.error_count()} validation errors", str(path)
        ) from e
    if bundle.report_version != REPORT_VERSION:
        raise SchemaMismatchError(
            f"Report version {bundle.report_version} is not supported (expected {REPORT_VERSION})",
            str(path),
        )
    return bundle


def compare(bundles: Sequence[ReportBundle], metric: CompareMetric) -> ComparisonTable:
    """Merge bundles into a method-by-dataset matrix and flag each row's best value.

    Ties are all flagged. Later bundles override earlier cells for the
    same method and row.

    Raises:
        SchemaMismatchError: If the bundles have different report versions
    """
    versions = {b.report_version for b in bundles}
    if len(versions) > 1:
        raise SchemaMismatchError(f"Mixed report versions: {', '.join(sorted(versions))}")
    rows: dict[tuple[str, str], None] = {}
    methods: dict[str, None] = {}
    cells: dict[tuple[tuple[str, str], str], float] = {}
    for bundle in bundles:
        for report in bundle.reports:
            row = (report.group, report.input_mode)
            rows.setdefault(row)
            methods.setdefault(report.method)
            value = metric.extract(report)
            if value is None:
                continue
            if (row, report.method) in cells:
                logger.warning(
                    "Duplicate %s result for %s; keeping the later one",
                    report.method,
                    row[0],
                    extra={"code": "duplicate_cell", "method": report.method, "row": row[0]},
                )
            cells[(row, report.method)] = value

    best: dict[tuple[str, str], frozenset[str]] = {}
    for row in rows:
        scored = {m: metric.goodness(v) for (r, m), v in cells.items() if r == row}
        top = max(scored.values(), default=None)
        best[row] = frozenset(m for m, g in scored.items() if g == top)
    return ComparisonTable(
        metric=metric,
        rows=tuple(rows),
        methods=tuple(methods),
        cells=cells,
        best=best,
    )
