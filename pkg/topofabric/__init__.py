"""Constrained graph-cochain reasoning and delay-robust control synthesis."""

__version__ = "0.1.0"
