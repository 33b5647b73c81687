"""selection module tests."""
