"""Deterministic engine and simulation harness for gaze-hand alignment
mode switching in one-handed 3D translation and scaling."""

__version__ = "0.1.0"
