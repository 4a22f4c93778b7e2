"""Simulator for two-stage beam alignment in mmWave distributed antenna systems."""

__version__ = "0.1.0"
