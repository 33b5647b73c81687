"""Exceptions raised by kpeval.

Every error carries an optional locus (file, record or row) so that
parse and configuration failures can be traced back to their input.
"""

from __future__ import annotations

from typing import Any


class KpevalError(Exception):
    """Base exception for kpeval errors.

    Attributes:
        message: Human-readable error message
        locus: Where the problem was found (file path, record, row), if known
        details: Additional structured context
    """

    def __init__(
        self,
        message: str,
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.locus = locus
        self.details = details or {}

    def __str__(self) -> str:
        if self.locus:
            return f"[{self.locus}] {self.message}"
        return self.message


class SchemaMismatchError(KpevalError):
    """Raised when keypoint data does not fit the declared schema."""

    def __init__(
        self,
        message: str = "Keypoint data does not match the schema.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class InvalidIndexError(KpevalError):
    """Raised when a schema entry points outside the native keypoint array."""

    def __init__(
        self,
        message: str = "Schema entry points outside the native keypoint array.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class ParseError(KpevalError):
    """Raised when an input file is malformed."""

    def __init__(
        self,
        message: str = "Malformed input.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class DuplicateFrameIdError(KpevalError):
    """Raised when a frame id occurs twice within one sequence."""

    def __init__(
        self,
        message: str = "Duplicate frame id.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class EmptyDatasetError(KpevalError):
    """Raised when a ground-truth file contains no frames."""

    def __init__(
        self,
        message: str = "Dataset contains no frames.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class SequenceMismatchError(KpevalError):
    """Raised when detections are aligned against the wrong sequence."""

    def __init__(
        self,
        message: str = "Detection file belongs to a different sequence.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class EmptyDetectionError(KpevalError):
    """Raised when a mapped detection has no canonical keypoint present."""

    def __init__(
        self,
        message: str = "Detection has no canonical keypoint present.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class DegenerateScaleError(KpevalError):
    """Raised when an object scale or normalizer is zero."""

    def __init__(
        self,
        message: str = "Degenerate scale.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class NoCommonKeypointsError(KpevalError):
    """Raised when a detection and a ground truth share no present keypoint."""

    def __init__(
        self,
        message: str = "Detection and ground truth share no present keypoint.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class NoNormalizerError(KpevalError):
    """Raised when no Neck-MidHip length can be derived for a sequence."""

    def __init__(
        self,
        message: str = "No frame allows deriving a Neck-MidHip length.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class InsufficientDataError(KpevalError):
    """Raised when a statistic gets fewer samples than it needs."""

    def __init__(
        self,
        message: str = "Not enough data points.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class ZeroVarianceError(KpevalError):
    """Raised when a statistic is undefined because an input is constant."""

    def __init__(
        self,
        message: str = "Input has zero variance.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class InstanceTooLargeError(KpevalError):
    """Raised when a brute-force oracle is given an instance above its limits."""

    def __init__(
        self,
        message: str = "Instance too large for the oracle.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)


class OutputWriteError(KpevalError):
    """Raised when a report or figure cannot be written."""

    def __init__(
        self,
        message: str = "Could not write output.",
        locus: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, locus, details)
