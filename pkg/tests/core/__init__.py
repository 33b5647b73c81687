"""core module tests."""
