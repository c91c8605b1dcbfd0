"""Pseudorandom codes from sparse parity checks, with rate transforms,
security-game harnesses and small-scale analysis tools."""

__version__ = "0.1.0"
