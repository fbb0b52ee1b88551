"""Desk-scale exact machinery for GL_n over F_q((t)): filtration lattices,
degenerate cosets and their refinement relations, counting-density orbital
measures, and the triangular solver for expansion coefficients."""

__version__ = "0.1.0"
