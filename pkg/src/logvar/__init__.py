"""Finite-difference solvers for the logarithmic Schrodinger equation with potentials."""
from .grid import Field, Grid
from .potential import PotentialSpec, bind

__all__ = ["Field", "Grid", "PotentialSpec", "bind"]
__version__ = "0.1.0"
