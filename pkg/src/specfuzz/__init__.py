"""Specification inference by grammar-based fuzzing of candidate assertions."""

__version__ = "0.1.0"
