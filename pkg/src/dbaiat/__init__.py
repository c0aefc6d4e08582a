"""Dual-branch attention-in-attention transformer for speech enhancement."""

__version__ = "0.1.0"
