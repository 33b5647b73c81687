"""ingest module tests."""
