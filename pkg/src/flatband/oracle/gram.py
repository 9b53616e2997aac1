"""Overlap (Gram) matrices of the one-particle operators alpha_x^dagger.

The squared norm of a product of fermionic creation operators with orbital
vectors v_x equals det[<v_x, v_y>].  The vectors are written out explicitly in
the c^dagger basis so nothing here depends on the recursion formulas.
"""

from __future__ import annotations

import numpy as np

from ..model import ModelParams
from .fock import DOWN, UP
from .hamiltonian import p_of


def alpha_vectors(x: int, y: int, params: ModelParams) -> np.ndarray:
    """Columns are alpha_w^dagger for w = x..y over orbitals (site x-1/2..y+1/2) x (up, down)."""
    n_sites = 2 * (y - x) + 3
    V = np.zeros((2 * n_sites, y - x + 1), complex)

    def row(half_offset: int, spin: int) -> int:
        return 2 * half_offset + spin

    for k, w in enumerate(range(x, y + 1)):
        h = 2 * (w - x) + 1  # half-unit offset of site w from x - 1/2
        eta = {UP: 1.0, DOWN: params.zeta * params.q_pow(w)}
        for spin in (UP, DOWN):
            if eta[spin] == 0:
                continue
            p = p_of(spin)
            V[row(h - 1, spin), k] += -eta[spin] * params.q_pow(p / 4)
            V[row(h, spin), k] += eta[spin] * params.lam
            V[row(h + 1, spin), k] += -eta[spin] * params.q_pow(-p / 4)
    return V


def gram_matrix(x: int, y: int, params: ModelParams) -> np.ndarray:
    V = alpha_vectors(x, y, params)
    return V.conj().T @ V


def gram_determinant_A(x: int, y: int, params: ModelParams) -> float:
    """log A(x, y; zeta) from the Gram determinant; raises on a non-positive determinant."""
    if y < x:
        return 0.0
    G = gram_matrix(x, y, params)
    sign, logdet = np.linalg.slogdet(G)
    if not (abs(sign.imag) < 1e-8 and sign.real > 0):
        raise ArithmeticError(f"Gram determinant not positive (sign {sign})")
    return float(logdet)
