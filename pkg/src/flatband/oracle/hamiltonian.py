"""Hopping matrix, localized operators and the sparse Hamiltonian."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ..model import ModelParams, Site, build_lattice
from .fock import DOWN, UP, Sector, SparseState, build_sector, one_body_pattern, orbital_index


def p_of(spin: int) -> int:
    return 1 if spin == UP else -1


def site_index(site, L: int) -> int:
    return Site.from_coord(site).half_units + L


def d_coefficients(x, spin: int, params: ModelParams, L: int) -> list[tuple[int, complex]]:
    """d_{x,spin} = sum_k coeff_k c_{site_k, spin} as (orbital, coeff) pairs."""
    s = Site.from_coord(x)
    lam = params.lam
    if s.is_integer:
        return [(orbital_index(s, spin, L), 1.0 / lam)]
    p = p_of(spin)
    out = [(orbital_index(s, spin, L), complex(lam))]
    for dx, expo in ((-0.5, -p / 4), (0.5, p / 4)):
        nb = s.shift(dx)
        if abs(nb.half_units) <= L:
            out.append((orbital_index(nb, spin, L), params.q_pow(expo)))
    return out


def a_dag_coefficients(x, spin: int, params: ModelParams, L: int) -> list[tuple[int, complex]]:
    """a^dagger_{x,spin} = sum_k coeff_k c^dagger_{site_k, spin}."""
    s = Site.from_coord(x)
    lam = params.lam
    if not s.is_integer:
        return [(orbital_index(s, spin, L), 1.0 / lam)]
    p = p_of(spin)
    out = [(orbital_index(s, spin, L), complex(lam))]
    for dx, expo in ((-0.5, p / 4), (0.5, -p / 4)):
        nb = s.shift(dx)
        out.append((orbital_index(nb, spin, L), -params.q_pow(expo)))
    return out


def hopping_from_dd(params: ModelParams, L: int, spin: int) -> np.ndarray:
    """t^(spin) assembled as t * sum_{x in half sites} d_x^dagger d_x."""
    n = 2 * L + 1
    T = np.zeros((n, n), complex)
    for h in range(-L, L + 1, 2):
        v = np.zeros(n, complex)
        for orb, c in d_coefficients(Site(h), spin, params, L):
            v[orb // 2] = c
        T += params.t * np.outer(v.conj(), v)
    return T


def hopping_matrix(params: ModelParams, L: int, spin: int) -> np.ndarray:
    """Site-indexed hopping matrix t_{x,y}: H_hop = sum t_{x,y} c_x^dagger c_y.

    Entries are written case by case.  The integer-to-integer link carries
    t_{y+1,y} = (q*/q)^{p/4}, the value produced by the d^dagger d form.
    """
    n = 2 * L + 1
    lam, t = params.lam, params.t
    p = p_of(spin)
    qa = params.q_abs
    T = np.zeros((n, n), complex)
    link = np.exp(-1j * p * params.theta / 2)
    for h in range(-L, L + 1):
        i = h + L
        if h % 2 == 0:
            T[i, i] = qa ** 0.5 + qa ** -0.5
            T[i + 1, i] = lam * params.q_pow(-p / 4)
            T[i, i + 1] = np.conj(T[i + 1, i])
            T[i - 1, i] = lam * params.q_pow(p / 4)
            T[i, i - 1] = np.conj(T[i - 1, i])
            if h + 2 <= L - 1:
                T[i + 2, i] = link
                T[i, i + 2] = np.conj(link)
        else:
            T[i, i] = lam ** 2
    return t * T


def _patterns(sector: Sector) -> dict:
    return _patterns_cached(sector.L, sector.N, sector.twoM)


@lru_cache(maxsize=32)
def _patterns_cached(L: int, N: int, twoM) -> dict:
    """Structural one-body patterns and the double-occupancy diagonal for a sector."""
    sector = build_sector(L, N, twoM)
    pats = {}
    for spin in (UP, DOWN):
        for hx in range(-L, L + 1):
            for hy in range(-L, L + 1):
                d = abs(hx - hy)
                if d == 0 or d == 1 or (d == 2 and hx % 2 == 0):
                    i = orbital_index(Site(hx), spin, L)
                    j = orbital_index(Site(hy), spin, L)
                    pats[(i, j)] = one_body_pattern(sector, i, j)
    dbl = np.zeros(sector.dim)
    for h in range(-L, L + 1):
        bu = np.int64(1) << np.int64(orbital_index(Site(h), UP, L))
        bd = np.int64(1) << np.int64(orbital_index(Site(h), DOWN, L))
        dbl += ((sector.codes & bu) != 0) & ((sector.codes & bd) != 0)
    return {"one_body": pats, "double": dbl}


def build_hamiltonian(params: ModelParams, sector: Sector, *, hopping: str = "dd") -> sp.csr_matrix:
    """H = H_hop + U sum n_up n_down on a sector, as a sparse matrix."""
    L = sector.L
    pats = _patterns(sector)
    mats = {}
    for spin in (UP, DOWN):
        mats[spin] = hopping_from_dd(params, L, spin) if hopping == "dd" else hopping_matrix(params, L, spin)
    rows, cols, vals = [], [], []
    for (i, j), (r, c, s) in pats["one_body"].items():
        coeff = mats[i % 2][i // 2, j // 2]
        if coeff == 0 or len(r) == 0:
            continue
        rows.append(r)
        cols.append(c)
        vals.append(coeff * s)
    diag = np.arange(sector.dim)
    rows.append(diag)
    cols.append(diag)
    vals.append(params.U * pats["double"].astype(complex))
    H = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(sector.dim, sector.dim))
    return H.tocsr()


def apply_hamiltonian_dd(params: ModelParams, state: SparseState) -> SparseState:
    """H acting on a sparse state via t sum d^dagger d + U sum n_up n_down (sector-free)."""
    L = state.L
    out = SparseState(L, np.zeros(0, np.int64), np.zeros(0, complex))
    for h in range(-L, L + 1, 2):
        for spin in (UP, DOWN):
            dc = d_coefficients(Site(h), spin, params, L)
            ds = state.apply_linear(dc, "annihilate")
            dd = ds.apply_linear([(o, np.conj(c)) for o, c in dc], "create")
            out = out + dd.scale(params.t)
    for h in range(-L, L + 1):
        nn = state.number(orbital_index(Site(h), UP, L)).number(orbital_index(Site(h), DOWN, L))
        out = out + nn.scale(params.U)
    return out


def lattice_sites(L: int):
    return build_lattice(L).sites
