"""Numerical laboratory for pseudoconvex boundaries, polydisc packings and box-counting dimension."""

__version__ = "0.1.0"
