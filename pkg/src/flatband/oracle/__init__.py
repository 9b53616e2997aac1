"""Exact-diagonalization and Gram-determinant oracles on small lattices."""

from .analysis import GroundSpaceReport, ground_space_analysis, kernel_dimension
from .fock import DOWN, UP, Sector, SparseState, WaveVector, build_sector, orbital_index
from .gram import gram_determinant_A, gram_matrix
from .hamiltonian import build_hamiltonian, hopping_from_dd, hopping_matrix
from .operators import Operator, expectation
from .states import construct_psi, polarized_state
from .symmetry import symmetry_transform

__all__ = [
    "DOWN", "UP", "GroundSpaceReport", "Operator", "Sector", "SparseState", "WaveVector",
    "build_hamiltonian", "build_sector", "construct_psi", "expectation", "gram_determinant_A",
    "gram_matrix", "ground_space_analysis", "hopping_from_dd", "hopping_matrix",
    "kernel_dimension", "orbital_index", "polarized_state", "symmetry_transform",
]
