"""report module tests."""
