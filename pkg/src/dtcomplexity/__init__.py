"""Exact decision-tree complexity toolkit for infinite binary information systems."""

__version__ = "0.1.0"
