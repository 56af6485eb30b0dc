"""Synthetic heterogeneous cryo-EM datasets and reconstruction metrics."""

__version__ = "0.1.0"
