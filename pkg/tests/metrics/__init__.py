"""metrics module tests."""
