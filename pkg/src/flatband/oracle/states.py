"""Explicit ground-state vectors built by applying creation operators to the vacuum."""

from __future__ import annotations

import numpy as np

from ..model import ModelParams, Site
from .fock import DOWN, UP, SparseState
from .hamiltonian import a_dag_coefficients


def alpha_dag_terms(x: int, params: ModelParams, L: int) -> list[tuple[int, complex]]:
    """alpha_x^dagger = a_{x,up}^dagger + zeta q^x a_{x,down}^dagger in the c^dagger basis."""
    w = params.zeta * params.q_pow(x)
    terms = list(a_dag_coefficients(Site(2 * x), UP, params, L))
    if w != 0:
        terms += [(o, w * c) for o, c in a_dag_coefficients(Site(2 * x), DOWN, params, L)]
    return terms


def construct_psi(params: ModelParams, L: int, sites=None) -> SparseState:
    """prod_{x} alpha_x^dagger Phi_vac over the integer sites (all of them by default).

    The product is ordered by increasing x from left to right.
    """
    l = (L - 1) // 2
    xs = list(range(-l, l + 1)) if sites is None else sorted(sites)
    state = SparseState.vacuum(L)
    for x in reversed(xs):
        state = state.apply_linear(alpha_dag_terms(x, params, L), "create")
    return state


def polarized_state(params: ModelParams, L: int, spin: int) -> SparseState:
    """prod_x a_{x,spin}^dagger Phi_vac (all up or all down)."""
    l = (L - 1) // 2
    state = SparseState.vacuum(L)
    for x in reversed(range(-l, l + 1)):
        state = state.apply_linear(a_dag_coefficients(Site(2 * x), spin, params, L), "create")
    return state


def random_state(L: int, N: int, rng: np.random.Generator, twoM: int | None = None) -> SparseState:
    from .fock import build_sector
    sec = build_sector(L, N, twoM)
    amps = rng.normal(size=sec.dim) + 1j * rng.normal(size=sec.dim)
    return SparseState(L, sec.codes.copy(), amps)
