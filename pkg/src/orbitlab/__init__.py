"""Numerical laboratory for matrix group orbits: Cartan projections,
growth exponents, boundary shadows, total positivity and flag limit sets."""

__version__ = "0.1.0"
