"""Saturation-based theorem prover for extensional higher-order logic."""

__version__ = "0.1.0"
