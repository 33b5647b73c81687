"""Tests for the exception hierarchy."""

from __future__ import annotations

import pytest

from kpeval.exceptions import (
    DegenerateScaleError,
    DuplicateFrameIdError,
    EmptyDatasetError,
    EmptyDetectionError,
    InstanceTooLargeError,
    InsufficientDataError,
    InvalidIndexError,
    KpevalError,
    NoCommonKeypointsError,
    NoNormalizerError,
    OutputWriteError,
    ParseError,
    SchemaMismatchError,
    SequenceMismatchError,
    ZeroVarianceError,
)

ALL_ERRORS = [
    SchemaMismatchError,
    InvalidIndexError,
    ParseError,
    DuplicateFrameIdError,
    EmptyDatasetError,
    SequenceMismatchError,
    EmptyDetectionError,
    DegenerateScaleError,
    NoCommonKeypointsError,
    NoNormalizerError,
    InsufficientDataError,
    ZeroVarianceError,
    InstanceTooLargeError,
    OutputWriteError,
]


class TestKpevalError:
    """Tests for KpevalError."""

    def test_message_only(self) -> None:
        """Test rendering without a locus."""
        error = KpevalError("bad input")
        assert str(error) == "bad input"
        assert error.details == {}

    def test_with_locus(self) -> None:
        """Test that the locus prefixes the message."""
        error = KpevalError("Expected a number", "gt.csv:4", {"column": "nose_x"})
        assert str(error) == "[gt.csv:4] Expected a number"
        assert error.details == {"column": "nose_x"}

    @pytest.mark.parametrize("error_class", ALL_ERRORS)
    def test_subclasses(self, error_class: type[KpevalError]) -> None:
        """Test that every error is a KpevalError with a default message."""
        error = error_class()
        assert isinstance(error, KpevalError)
        assert error.message
        assert error.locus is None

    def test_catchable_as_base(self) -> None:
        """Test catching a specific error through the base class."""
        with pytest.raises(KpevalError, match="frames.json"):
            raise ParseError("Unexpected token", "frames.json:1:5")
