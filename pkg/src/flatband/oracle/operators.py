"""Fermionic operator strings and the standard local observables built from them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..model import Site
from .fock import DOWN, UP, Sector, SparseState, _parity_below, orbital_index

PAULI = {
    1: np.array([[0, 1], [1, 0]], complex),
    2: np.array([[0, -1j], [1j, 0]], complex),
    3: np.array([[1, 0], [0, -1]], complex),
}

# (is_creation, orbital)
Factor = tuple[bool, int]


@dataclass
class Operator:
    """Sum of coefficient * ordered product of ladder operators.

    Factors are written left to right as in the operator product, so the last
    factor acts first on a ket.
    """

    L: int
    terms: list[tuple[complex, tuple[Factor, ...]]] = field(default_factory=list)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.L, self.terms + other.terms)

    def __sub__(self, other: "Operator") -> "Operator":
        return self + other.scale(-1)

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.L, [(a * b, fa + fb) for a, fa in self.terms for b, fb in other.terms])

    def scale(self, c) -> "Operator":
        return Operator(self.L, [(c * a, f) for a, f in self.terms])

    def dagger(self) -> "Operator":
        return Operator(self.L, [(np.conj(a), tuple((not d, o) for d, o in reversed(f)))
                                 for a, f in self.terms])

    def map_orbitals(self, fn, phase=None) -> "Operator":
        """Replace every orbital k by fn(k); ``phase(is_creation, k)`` multiplies each factor."""
        out = []
        for a, f in self.terms:
            c = a
            if phase is not None:
                for d, o in f:
                    c = c * phase(d, o)
            out.append((c, tuple((d, fn(o)) for d, o in f)))
        return Operator(self.L, out)

    def apply(self, state: SparseState) -> SparseState:
        codes, amps = [], []
        for a, f in self.terms:
            c, v, _ = _apply_factors(state.codes, state.amps * a, f)
            codes.append(c)
            amps.append(v)
        if not codes:
            return SparseState(self.L, np.zeros(0, np.int64), np.zeros(0, complex))
        return SparseState.from_terms(self.L, np.concatenate(codes), np.concatenate(amps))

    def matrix(self, sector: Sector, target: Sector | None = None) -> sp.csr_matrix:
        target = sector if target is None else target
        rows, cols, vals = [], [], []
        base = np.arange(sector.dim)
        for a, f in self.terms:
            c, v, idx = _apply_factors(sector.codes, np.full(sector.dim, a, complex), f)
            pos = target.positions(c)
            if np.any(pos < 0):
                raise ValueError("operator maps outside the target sector")
            rows.append(pos)
            cols.append(base[idx])
            vals.append(v)
        if not rows:
            return sp.csr_matrix((target.dim, sector.dim), dtype=complex)
        return sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(target.dim, sector.dim)).tocsr()


def _apply_factors(codes, amps, factors):
    idx = np.arange(len(codes))
    for is_dag, i in reversed(factors):
        bit = np.int64(1) << np.int64(i)
        occ = (codes & bit) != 0
        keep = ~occ if is_dag else occ
        codes, amps, idx = codes[keep], amps[keep], idx[keep]
        sign = 1 - 2 * _parity_below(codes, i)
        codes = codes ^ bit
        amps = amps * sign
    return codes, amps, idx


def cdag(site, spin, L) -> Operator:
    return Operator(L, [(1.0, ((True, orbital_index(site, spin, L)),))])


def c(site, spin, L) -> Operator:
    return Operator(L, [(1.0, ((False, orbital_index(site, spin, L)),))])


def hop(x, sigma, y, tau, L) -> Operator:
    """c^dagger_{x,sigma} c_{y,tau}."""
    return cdag(x, sigma, L) @ c(y, tau, L)


def density(x, L, spin: int | None = None) -> Operator:
    spins = (UP, DOWN) if spin is None else (spin,)
    out = Operator(L)
    for s in spins:
        out = out + hop(x, s, x, s, L)
    return out


def spin_op(x, j: int, L) -> Operator:
    P = PAULI[j]
    out = Operator(L)
    for s in (UP, DOWN):
        for t in (UP, DOWN):
            if P[s, t] != 0:
                out = out + hop(x, s, x, t, L).scale(P[s, t] / 2)
    return out


def total_spin(j: int, L) -> Operator:
    out = Operator(L)
    for h in range(-L, L + 1):
        out = out + spin_op(Site(h), j, L)
    return out


def total_number(L) -> Operator:
    out = Operator(L)
    for h in range(-L, L + 1):
        out = out + density(Site(h), L)
    return out


def expectation(op: Operator, psi: SparseState) -> complex:
    """<psi|O|psi> / <psi|psi>."""
    n2 = psi.norm2()
    if n2 <= 0:
        raise ValueError("zero state")
    return psi.inner(op.apply(psi)) / n2
