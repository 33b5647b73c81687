"""Tests for kpeval."""
