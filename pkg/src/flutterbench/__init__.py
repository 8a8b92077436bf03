"""Nonlinear cantilever flutter and vibration-suppression workbench."""

__version__ = "0.1.0"
