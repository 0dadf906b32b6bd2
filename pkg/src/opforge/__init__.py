"""Exact computer algebra for colored dg operads, their algebras and modules."""

from opforge.exactlin import QQ, ZZ, GF, Ring, Matrix

__version__ = "0.1.0"

__all__ = ["QQ", "ZZ", "GF", "Ring", "Matrix", "__version__"]
