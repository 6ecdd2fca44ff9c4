"""Test fixtures for topofabric tests."""
