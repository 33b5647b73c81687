"""Aggregation, tables, comparison and figures."""

from kpeval.report.aggregate import aggregate, mean_stat
from kpeval.report.circles import (
    CirclePlotSpec,
    ReferencePose,
    build_circle_spec,
    emit_circle_plot,
)
from kpeval.report.compare import CompareMetric, ComparisonTable, compare, load_bundle
from kpeval.report.models import (
    REPORT_VERSION,
    Grouping,
    MeanStat,
    MetricReport,
    ReportBundle,
)
from kpeval.report.results import Agreement, FrameResult, TargetResult
from kpeval.report.scatter import ScatterPlotSpec, build_scatter_spec, emit_scatter_plot
from kpeval.report.tables import TableFormat, emit_tables

__all__ = [
    "REPORT_VERSION",
    "Agreement",
    "CirclePlotSpec",
    "CompareMetric",
    "ComparisonTable",
    "FrameResult",
    "Grouping",
    "MeanStat",
    "MetricReport",
    "ReferencePose",
    "ReportBundle",
    "ScatterPlotSpec",
    "TableFormat",
    "TargetResult",
    "aggregate",
    "build_circle_spec",
    "build_scatter_spec",
    "compare",
    "emit_circle_plot",
    "emit_scatter_plot",
    "emit_tables",
    "load_bundle",
    "mean_stat",
]
