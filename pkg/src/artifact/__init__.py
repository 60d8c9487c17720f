"""Numerical workbench for exact results on frustrated spins, Wehrl entropy,
Hubbard symmetries, Lax factorization, elliptic face models and the
semiclassical Seiberg-Witten map."""

__version__ = "0.1.0"
