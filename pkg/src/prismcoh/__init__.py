"""Exact verification toolkit for a four-term sequence of (Z/p)^2 group-ring
modules with multiplication-by-p homotopies, and the mod-3/mod-9 cochain
calculus built on top of it."""

__version__ = "0.1.0"
