"""Tests for logging configuration module."""

from __future__ import annotations

import json
import logging
import sys
from typing import TYPE_CHECKING

import pytest

from kpeval.logging_config import (
    LOG_ENV_VAR,
    LOGGER_NAME,
    JsonLogFormatter,
    get_logger,
    reset_logging,
    resolve_level,
    setup_logging,
)

if TYPE_CHECKING:
    from pathlib import Path


class TestLoggingSetup:
    """Tests for logging setup."""

    def test_setup_logging_creates_handler(self) -> None:
        """Test that setup_logging creates a console handler."""
        setup_logging("DEBUG")

        logger = logging.getLogger(LOGGER_NAME)
        assert len(logger.handlers) == 1
        assert logger.level == logging.DEBUG
        assert logger.propagate is False

    def test_setup_logging_idempotent(self) -> None:
        """Test that setup_logging is idempotent."""
        setup_logging("DEBUG")
        setup_logging("DEBUG")
        setup_logging("DEBUG")

        assert len(logging.getLogger(LOGGER_NAME).handlers) == 1

    def test_setup_logging_updates_level(self) -> None:
        """Test that setup_logging updates level on subsequent calls."""
        setup_logging("DEBUG")
        logger = logging.getLogger(LOGGER_NAME)
        assert logger.level == logging.DEBUG

        setup_logging("WARNING")
        assert logger.level == logging.WARNING

    def test_level_from_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test that KPEVAL_LOG provides the default level."""
        monkeypatch.setenv(LOG_ENV_VAR, "error")
        setup_logging()
        assert logging.getLogger(LOGGER_NAME).level == logging.ERROR

    def test_reset(self) -> None:
        """Test that reset_logging removes handlers and restores propagation."""
        setup_logging("INFO")
        reset_logging()
        logger = logging.getLogger(LOGGER_NAME)
        assert logger.handlers == []
        assert logger.propagate is True


class TestJsonLogFile:
    """Tests for the JSON-lines log file."""

    def test_events_with_extras(self, tmp_path: Path) -> None:
        """Test that each event is one JSON object carrying its extra fields."""
        log_file = tmp_path / "logs" / "run.jsonl"
        setup_logging("INFO", log_file)

        get_logger("ingest").warning(
            "3 orphan frames", extra={"code": "orphan_frames", "frames": ["a", "b", "c"]}
        )
        get_logger("ingest").debug("not written")
        reset_logging()

        lines = log_file.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1
        event = json.loads(lines[0])
        assert event["level"] == "WARNING"
        assert event["logger"] == f"{LOGGER_NAME}.ingest"
        assert event["event"] == "3 orphan frames"
        assert event["code"] == "orphan_frames"
        assert event["frames"] == ["a", "b", "c"]

    def test_file_handler_added_once(self, tmp_path: Path) -> None:
        """Test that repeated setup with the same file keeps one file handler."""
        log_file = tmp_path / "run.jsonl"
        setup_logging("INFO", log_file)
        setup_logging("INFO", log_file)
        handlers = logging.getLogger(LOGGER_NAME).handlers
        assert sum(isinstance(h, logging.FileHandler) for h in handlers) == 1

    def test_formatter_includes_exception(self) -> None:
        """Test that exception info is rendered."""
        try:
            raise RuntimeError("boom")
        except RuntimeError:
            record = logging.getLogger("x").makeRecord(
                "x", logging.ERROR, __file__, 1, "failed", (), sys.exc_info()
            )
        payload = json.loads(JsonLogFormatter().format(record))
        assert "RuntimeError: boom" in payload["exc_info"]


class TestResolveLevel:
    """Tests for resolve_level."""

    @pytest.mark.parametrize(
        ("name", "expected"),
        [("debug", logging.DEBUG), ("WARNING", logging.WARNING), ("bogus", logging.INFO)],
    )
    def test_names(self, name: str, expected: int) -> None:
        """Test level names, case-insensitively, with INFO as fallback."""
        assert resolve_level(name) == expected

    def test_default(self) -> None:
        """Test the INFO default."""
        assert resolve_level() == logging.INFO


class TestGetLogger:
    """Tests for get_logger function."""

    def test_get_logger_returns_child_logger(self) -> None:
        """Test that get_logger returns a child logger."""
        logger = get_logger("test_module")
        assert logger.name == f"{LOGGER_NAME}.test_module"

    def test_get_logger_with_package_name(self) -> None:
        """Test that get_logger handles full package name."""
        logger = get_logger(f"{LOGGER_NAME}.submodule")
        assert logger.name == f"{LOGGER_NAME}.submodule"

    def test_get_logger_consistent(self) -> None:
        """Test that get_logger returns same logger for same name."""
        assert get_logger("test_module") is get_logger("test_module")
