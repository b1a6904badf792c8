"""Quantum speed limits for time-local (possibly non-Markovian) qubit dynamics."""

__version__ = "0.1.0"
