"""Chained Bell inequalities: sum-of-squares certificates, self-testing of
the maximally entangled qubit pair, robustness bounds and certified
randomness."""

__version__ = "0.1.0"
