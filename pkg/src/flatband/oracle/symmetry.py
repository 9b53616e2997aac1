"""U(1) rotation, spin-flip reflection and translation acting on operators and states."""

from __future__ import annotations

import numpy as np

from .fock import SparseState, n_orbitals, popcount
from .operators import Operator


def _site_spin(k: int, L: int) -> tuple[int, int]:
    return k // 2 - L, k % 2


def _orbital(h: int, spin: int, L: int) -> int:
    return 2 * (h + L) + spin


def u1(op: Operator, phi: float) -> Operator:
    """c^dagger_{x,s} -> e^{i phi p(s)/2} c^dagger_{x,s}, c_{x,s} -> e^{-i phi p(s)/2} c_{x,s}."""
    def phase(is_dag, k):
        p = 1 if k % 2 == 0 else -1
        return np.exp((1j if is_dag else -1j) * phi * p / 2)
    return op.map_orbitals(lambda k: k, phase)


def reflect(op: Operator) -> Operator:
    """(x, s) -> (-x, flipped s)."""
    L = op.L
    n = n_orbitals(L)
    return op.map_orbitals(lambda k: n - 1 - k)


def translate(op: Operator, u: int) -> Operator:
    L = op.L

    def fn(k):
        h, s = _site_spin(k, L)
        h2 = h + 2 * u
        if abs(h2) > L:
            raise IndexError("translation moves the operator past the boundary")
        return _orbital(h2, s, L)
    return op.map_orbitals(fn)


def symmetry_transform(kind: str, target, *, phi: float = 0.0, u: int = 0):
    """Apply ``u1``, ``z2`` or ``translate`` to an Operator or a SparseState."""
    if isinstance(target, SparseState):
        if kind == "z2":
            return reflect_state(target)
        if kind == "u1":
            return u1_state(target, phi)
        if kind == "translate":
            return translate_state(target, u)
    else:
        if kind == "z2":
            return reflect(target)
        if kind == "u1":
            return u1(target, phi)
        if kind == "translate":
            return translate(target, u)
    raise ValueError(f"unknown symmetry {kind!r}")


def reflect_state(state: SparseState) -> SparseState:
    """Unitary implementation of the reflection on Fock states.

    The orbital map k -> n-1-k reverses the canonical ordering, so re-sorting
    N creation operators costs the fixed sign (-1)^{N(N-1)/2}.
    """
    n = n_orbitals(state.L)
    codes = state.codes
    new = np.zeros_like(codes)
    for k in range(n):
        bit = (codes >> np.int64(k)) & 1
        new |= bit << np.int64(n - 1 - k)
    N = popcount(codes)
    sign = np.where((N * (N - 1) // 2) % 2 == 0, 1.0, -1.0)
    return SparseState.from_terms(state.L, new, state.amps * sign)


def u1_state(state: SparseState, phi: float) -> SparseState:
    """exp(i phi S3_tot) applied to a state."""
    up = popcount(state.codes & np.int64(int("01" * (n_orbitals(state.L) // 2), 2)))
    N = popcount(state.codes)
    twoM = 2 * up - N
    return SparseState(state.L, state.codes, state.amps * np.exp(1j * phi * twoM / 2))


def translate_state(state: SparseState, u: int) -> SparseState:
    L = state.L
    shift = 4 * u  # two orbitals per half site, two half sites per unit
    n = n_orbitals(L)
    full = np.int64((1 << n) - 1)
    if shift >= 0:
        moved = (state.codes << np.int64(shift))
    else:
        moved = (state.codes >> np.int64(-shift))
    back = (moved >> np.int64(shift)) if shift >= 0 else (moved << np.int64(-shift))
    if np.any((moved & ~full) != 0) or np.any(back != state.codes):
        raise IndexError("translation moves the state past the boundary")
    return SparseState(L, moved, state.amps.copy())
