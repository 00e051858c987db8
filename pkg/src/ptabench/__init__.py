"""Pointer-analysis workbench for a small C subset.

Runs flow-insensitive, flow-sensitive and context-sensitive points-to
analyses over the same lowered program and compares their precision at every
dereference site.
"""

__version__ = "0.1.0"
