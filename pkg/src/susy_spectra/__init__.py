"""High-precision eigenvalues for half-line polynomial potentials."""
__version__ = "0.1.0"
