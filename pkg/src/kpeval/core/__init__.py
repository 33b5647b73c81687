"""Canonical skeleton, domain types and schema mapping."""

from kpeval.core.poses import (
    CanonicalPose,
    EvaluationScope,
    FrameRecord,
    GroundTruthPose,
    Keypoint2D,
    NormalizationMode,
    Role,
    SequenceDataset,
    VirtualPoints,
    derive_virtual_points,
)
from kpeval.core.schema import (
    BUILTIN_SCHEMAS,
    SchemaMap,
    ScorePolicy,
    identity_schema,
    load_schema,
    map_to_canonical,
)
from kpeval.core.skeleton import NUM_KEYPOINTS, REAL_KEYPOINTS, KeypointId, SigmaTable

__all__ = [
    "BUILTIN_SCHEMAS",
    "NUM_KEYPOINTS",
    "REAL_KEYPOINTS",
    "CanonicalPose",
    "EvaluationScope",
    "FrameRecord",
    "GroundTruthPose",
    "Keypoint2D",
    "KeypointId",
    "NormalizationMode",
    "Role",
    "SchemaMap",
    "ScorePolicy",
    "SequenceDataset",
    "SigmaTable",
    "VirtualPoints",
    "derive_virtual_points",
    "identity_schema",
    "load_schema",
    "map_to_canonical",
]
