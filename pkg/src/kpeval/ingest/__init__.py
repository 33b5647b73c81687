"""Parsers for ground-truth annotations and method outputs."""

from kpeval.ingest.align import align
from kpeval.ingest.canonical import emit_canonical_json, load_canonical_json
from kpeval.ingest.detections import parse_detections
from kpeval.ingest.formats import DetectionFile, FormatKind
from kpeval.ingest.ground_truth import parse_ground_truth

__all__ = [
    "DetectionFile",
    "FormatKind",
    "align",
    "emit_canonical_json",
    "load_canonical_json",
    "parse_detections",
    "parse_ground_truth",
]
