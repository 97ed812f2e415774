"""Exact rank solver for 2x2-block generic partitioned matrices."""

__version__ = "0.1.0"
