"""kpeval: evaluation toolkit for 2D pose estimation on infant recordings.

Scores pose-estimation methods against coder annotations with OKS,
AP/AR, Neck-MidHip normalized errors, missing and redundant detections
and the combined CPE score.
"""

__version__ = "0.1.0"

from kpeval.config import ConfigError, RunConfig, load_config
from kpeval.exceptions import KpevalError

__all__ = [
    "ConfigError",
    "KpevalError",
    "RunConfig",
    "__version__",
    "load_config",
]
