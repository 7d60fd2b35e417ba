"""Counting engine for 6-torsion in quadratic class groups and Galois D6 fields."""

__version__ = "0.1.0"
