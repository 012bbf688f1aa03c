"""Exact computer algebra for primitive multiple schemes on chart atlases."""

__version__ = "0.1.0"
