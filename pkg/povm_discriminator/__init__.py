"""Variational POVM circuits for discriminating non-orthogonal quantum states."""

__version__ = "0.1.0"
