"""Compactly supported synchrosqueezed wave packet transforms with noise-robust options."""

__version__ = "0.1.0"
