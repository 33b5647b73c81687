"""harness module tests."""
