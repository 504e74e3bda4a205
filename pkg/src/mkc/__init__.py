"""Numerical laboratory for a Kitaev chain and the four-band models built by
tensoring two of them, either along the same chain direction (a 1D model with
next-nearest-neighbour terms) or along two orthogonal directions (a 2D model).

Subpackages split by concern: momentum-space models, real-space lattices,
bulk invariants, boundary-mode analytics, disorder robustness, and a small
config-driven CLI.
"""

__version__ = "0.1.0"
