"""Run configuration for kpeval.

A run is described by a YAML or JSON file, environment variables with the
``KPEVAL_`` prefix and command-line flags, merged with proper precedence.
"""

from __future__ import annotations

import contextlib
import json
import os
from enum import Enum
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv
from pydantic import AliasChoices, BaseModel, Field, field_validator, model_validator

from kpeval.core.poses import EvaluationScope, NormalizationMode
from kpeval.core.schema import BUILTIN_SCHEMAS
from kpeval.ingest.formats import FormatKind
from kpeval.logging_config import get_logger
from kpeval.metrics.cpe import DEFAULT_CPE_C
from kpeval.selection.strategies import SelectionStrategy

logger = get_logger(__name__)

ENV_PREFIX = "KPEVAL_"


class ConfigError(Exception):
    """Raised when configuration validation fails."""


class LogLevel(str, Enum):
    """Supported log levels."""

    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class EmitKind(str, Enum):
    """Optional outputs of an evaluation run."""

    TABLES = "tables"
    CIRCLES = "circles"
    SCATTER = "scatter"
    PER_SEQUENCE = "per-sequence"


def _lower(v: Any) -> Any:
    if isinstance(v, str):
        return v.strip().lower()
    return v


def _format_kind(v: Any) -> Any:
    if isinstance(v, str):
        try:
            return FormatKind.parse(v)
        except ValueError as e:
            raise ValueError(str(e)) from None
    return v


class MethodSpec(BaseModel):
    """One pose-estimation method to evaluate."""

    name: str = Field(min_length=1, description="Method name used in reports")
    paths: list[Path] = Field(min_length=1, description="One detection file per sequence")
    format: FormatKind = Field(default=FormatKind.CANONICAL_JSON, description="Detection format")
    keypoint_schema: str = Field(
        default="coco17",
        validation_alias=AliasChoices("keypoint_schema", "schema"),
        description="Built-in schema name or SchemaMap file",
    )
    input_mode: str | None = Field(default=None, description="Overrides the run's input mode")
    fps: float | None = Field(default=None, gt=0, description="Reported processing speed")

    model_config = {"extra": "forbid", "populate_by_name": True}

    @field_validator("format", mode="before")
    @classmethod
    def normalize_format(cls, v: Any) -> Any:
        """Accept format aliases."""
        return _format_kind(v)

    @field_validator("paths", mode="before")
    @classmethod
    def normalize_paths(cls, v: Any) -> Any:
        """A single path may be given without a list."""
        if isinstance(v, str | Path):
            return [v]
        return v

    @classmethod
    def parse(cls, text: str) -> MethodSpec:
        """Parse ``name=path[:format[:schema]]``.

        Raises:
            ValueError: If the text has no ``name=`` part
        """
        name, sep, rest = text.partition("=")
        if not sep or not name.strip() or not rest:
            msg = f"Expected name=path:format:schema, got {text!r}"
            raise ValueError(msg)
        parts = rest.rsplit(":", 2)
        data: dict[str, Any] = {"name": name.strip(), "paths": [parts[0]]}
        if len(parts) > 1:
            data["format"] = parts[1]
        if len(parts) > 2:
            data["keypoint_schema"] = parts[2]
        return cls.model_validate(data)


class RunConfig(BaseModel):
    """Configuration of one evaluation run.

    Configuration can be loaded from:
    - Environment variables with KPEVAL_ prefix
    - Optional .env file in the working directory
    - Optional YAML or JSON configuration file passed via CLI
    """

    ground_truth: list[Path] = Field(min_length=1, description="Ground-truth files")
    gt_format: FormatKind = Field(
        default=FormatKind.CANONICAL_JSON, description="Ground-truth format"
    )
    methods: list[MethodSpec] = Field(min_length=1, description="Methods to evaluate")
    select: SelectionStrategy = Field(
        default=SelectionStrategy.HIGHEST_SCORE, description="Detection selection strategy"
    )
    scope: EvaluationScope = Field(
        default=EvaluationScope.INFANT, description="Which ground truths are evaluated"
    )
    norm: NormalizationMode | None = Field(
        default=None, description="Overrides each sequence's normalization mode"
    )
    sigma: Path | None = Field(default=None, description="Sigma override file")
    cpe_c: float = Field(default=DEFAULT_CPE_C, gt=0, description="CPE rescaling coefficient")
    out: Path = Field(default=Path("kpeval-out"), description="Output directory")
    emit: set[EmitKind] = Field(default_factory=lambda: {EmitKind.TABLES})
    jobs: int = Field(default=1, ge=1, description="Parallel evaluation workers")
    dataset_id: str = Field(default="dataset", min_length=1, description="Dataset label")
    input_mode: str = Field(default="images", description="Input type label (images, videos)")
    mixture: list[str] = Field(
        default_factory=list, description="Methods averaged into a mixture of experts"
    )
    log_level: LogLevel = Field(default=LogLevel.INFO, description="Logging level")

    model_config = {"extra": "forbid", "validate_assignment": True}

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v: Any) -> Any:
        """Normalize log level to uppercase."""
        if isinstance(v, str):
            return v.upper()
        return v

    @field_validator("select", "scope", mode="before")
    @classmethod
    def normalize_enum(cls, v: Any) -> Any:
        """Normalize enum names to lowercase."""
        return _lower(v)

    @field_validator("norm", mode="before")
    @classmethod
    def normalize_norm(cls, v: Any) -> Any:
        """Accept ``per-image`` as well as ``per_image``."""
        v = _lower(v)
        if isinstance(v, str):
            return v.replace("-", "_")
        return v

    @field_validator("gt_format", mode="before")
    @classmethod
    def normalize_gt_format(cls, v: Any) -> Any:
        """Accept format aliases."""
        return _format_kind(v)

    @field_validator("ground_truth", mode="before")
    @classmethod
    def normalize_ground_truth(cls, v: Any) -> Any:
        """A single path may be given without a list."""
        if isinstance(v, str | Path):
            return [v]
        return v

    @field_validator("emit", mode="before")
    @classmethod
    def normalize_emit(cls, v: Any) -> Any:
        """Accept a comma-separated string."""
        if isinstance(v, str):
            return {part.strip().lower() for part in v.split(",") if part.strip()}
        return v

    @model_validator(mode="after")
    def validate_methods(self) -> RunConfig:
        """Method names must be unique and mixtures must name known methods."""
        names = [m.name for m in self.methods]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            msg = f"Duplicate method names: {', '.join(duplicates)}"
            raise ValueError(msg)
        if self.mixture:
            unknown = [n for n in self.mixture if n not in names]
            if unknown:
                msg = f"Mixture refers to unknown methods: {', '.join(unknown)}"
                raise ValueError(msg)
            if len(set(self.mixture)) < 2:
                msg = "A mixture needs at least 2 distinct methods"
                raise ValueError(msg)
        return self

    @model_validator(mode="after")
    def validate_paths(self) -> RunConfig:
        """Every referenced input path must exist."""
        referenced = [*self.ground_truth]
        for method in self.methods:
            referenced.extend(method.paths)
            if method.keypoint_schema not in BUILTIN_SCHEMAS:
                referenced.append(Path(method.keypoint_schema))
        if self.sigma is not None:
            referenced.append(self.sigma)
        missing = [str(p) for p in referenced if not p.exists()]
        if missing:
            msg = f"Input paths do not exist: {', '.join(missing)}"
            raise ValueError(msg)
        return self


def _get_env_value(key: str, prefix: str = ENV_PREFIX) -> str | None:
    """Get environment variable value with prefix."""
    return os.environ.get(f"{prefix}{key.upper()}")


def _load_env_config() -> dict[str, Any]:
    """Load configuration from environment variables."""
    env_mapping = {
        "log_level": "LOG",
        "jobs": "JOBS",
        "out": "OUT",
        "cpe_c": "CPE_C",
        "select": "SELECT",
        "scope": "SCOPE",
        "norm": "NORM",
        "dataset_id": "DATASET_ID",
    }

    config: dict[str, Any] = {}
    for field_name, env_suffix in env_mapping.items():
        value: Any = _get_env_value(env_suffix)
        if value is None or value == "":
            continue
        if field_name == "jobs":
            with contextlib.suppress(ValueError):
                value = int(value)
        elif field_name == "cpe_c":
            with contextlib.suppress(ValueError):
                value = float(value)
        config[field_name] = value
    return config


def _resolve(value: Any, base: Path) -> Any:
    if value is None:
        return None
    path = Path(value)
    return path if path.is_absolute() else base / path


def _resolve_file_paths(data: dict[str, Any], base: Path) -> dict[str, Any]:
    """Make relative paths in a config file relative to the file's directory."""
    resolved = dict(data)
    gt = resolved.get("ground_truth")
    if isinstance(gt, list):
        resolved["ground_truth"] = [_resolve(p, base) for p in gt]
    elif gt is not None:
        resolved["ground_truth"] = [_resolve(gt, base)]
    for key in ("sigma", "out"):
        if resolved.get(key) is not None:
            resolved[key] = _resolve(resolved[key], base)
    methods = resolved.get("methods")
    if isinstance(methods, list):
        fixed = []
        for method in methods:
            if not isinstance(method, dict):
                fixed.append(method)
                continue
            method = dict(method)
            paths = method.get("paths")
            if isinstance(paths, list):
                method["paths"] = [_resolve(p, base) for p in paths]
            elif paths is not None:
                method["paths"] = [_resolve(paths, base)]
            schema = method.get("schema", method.get("keypoint_schema"))
            if isinstance(schema, str) and schema not in BUILTIN_SCHEMAS:
                method.pop("keypoint_schema", None)
                method["schema"] = str(_resolve(schema, base))
            fixed.append(method)
        resolved["methods"] = fixed
    return resolved


def _load_file_config(path: str | Path) -> dict[str, Any]:
    """Load configuration from a file (JSON or YAML)."""
    path = Path(path)
    if not path.exists():
        msg = f"Configuration file not found: {path}"
        raise ConfigError(msg)

    suffix = path.suffix.lower()
    content = path.read_text(encoding="utf-8")

    try:
        if suffix == ".json":
            data = json.loads(content)
        elif suffix in (".yaml", ".yml"):
            data = yaml.safe_load(content)
        else:
            msg = f"Unsupported configuration file format: {suffix}"
            raise ConfigError(msg)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        msg = f"Cannot parse configuration file {path}: {e}"
        raise ConfigError(msg) from e
    if not isinstance(data, dict):
        msg = f"Configuration file {path} must contain a mapping"
        raise ConfigError(msg)
    return _resolve_file_paths(data, path.parent)


def method_specs_from_args(values: list[str]) -> list[dict[str, Any]]:
    """Group repeated ``--det`` values by method name.

    Raises:
        ConfigError: If a value is malformed or one name is given two
            different formats or schemas
    """
    grouped: dict[str, dict[str, Any]] = {}
    for text in values:
        try:
            spec = MethodSpec.parse(text)
        except ValueError as e:
            msg = f"Invalid --det value {text!r}: {e}"
            raise ConfigError(msg) from e
        current = grouped.get(spec.name)
        if current is None:
            grouped[spec.name] = spec.model_dump()
            continue
        if (current["format"], current["keypoint_schema"]) != (spec.format, spec.keypoint_schema):
            msg = f"Method {spec.name} is given with different formats or schemas"
            raise ConfigError(msg)
        current["paths"].extend(spec.paths)
    return list(grouped.values())


def load_config(
    path: str | Path | None = None,
    cli_args: dict[str, Any] | None = None,
) -> RunConfig:
    """Load and validate a run configuration.

    Precedence (highest to lowest):
    1. CLI arguments
    2. Environment variables
    3. Configuration file
    4. Model defaults

    Args:
        path: Optional path to configuration file
        cli_args: Optional CLI argument overrides

    Returns:
        Validated RunConfig instance

    Raises:
        ConfigError: If configuration is invalid
    """
    load_dotenv()

    config_dict: dict[str, Any] = {}
    if path:
        logger.debug("Loading configuration from file: %s", path)
        config_dict.update(_load_file_config(path))

    for key, value in _load_env_config().items():
        config_dict[key] = value
        logger.debug("Config %s from environment: %s", key, value)

    if cli_args:
        for key, value in cli_args.items():
            if value is not None:
                config_dict[key] = value
                logger.debug("Config %s from CLI: %s", key, value)

    try:
        return RunConfig(**config_dict)
    except Exception as e:
        msg = f"Configuration validation failed: {e}"
        raise ConfigError(msg) from e
