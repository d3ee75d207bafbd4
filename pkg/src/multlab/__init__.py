"""Exact computer algebra for multiplicity estimates of series solutions
of differential and Mahler systems."""

__version__ = "0.1.0"
