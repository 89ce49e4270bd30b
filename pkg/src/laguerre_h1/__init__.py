"""Riesz transforms, heat kernels and H^1 atoms for Laguerre function expansions."""
__version__ = "0.1.0"
