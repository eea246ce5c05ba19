"""Kitaev honeycomb model on closed surfaces of genus two and higher."""

from .lattice import LatticeDims, Lattice, LatticeError, build_lattice, homology_basis
from .pauli import Op

__version__ = "0.1.0"

__all__ = ["LatticeDims", "Lattice", "LatticeError", "build_lattice", "homology_basis", "Op", "__version__"]
