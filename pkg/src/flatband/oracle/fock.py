"""Fermionic Fock space on the decorated chain.

Spin orbitals are ordered lexicographically by (site, spin) with up before
down; orbital k of a basis state is bit k of an int64 occupation code.  Signs
of ladder operators come from the parity of occupied orbitals below the target.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..model import Site

UP, DOWN = 0, 1
MAX_SECTOR_DIM = 5_000_000


class SectorTooLarge(RuntimeError):
    pass


def n_orbitals(L: int) -> int:
    return 2 * (2 * L + 1)


def orbital_index(site, spin: int, L: int) -> int:
    s = Site.from_coord(site)
    if abs(s.half_units) > L:
        raise IndexError(f"site {s.x} outside lattice of length {L}")
    if spin not in (UP, DOWN):
        raise ValueError("spin must be UP (0) or DOWN (1)")
    return 2 * (s.half_units + L) + spin


@dataclass(frozen=True, order=True)
class SpinOrbital:
    site: Site
    spin: int

    def index(self, L: int) -> int:
        return orbital_index(self.site, self.spin, L)


def popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a.astype(np.uint64)).astype(np.int64)


def _parity_below(codes: np.ndarray, i: int) -> np.ndarray:
    mask = np.int64((1 << i) - 1)
    return popcount(codes & mask) & 1


@dataclass(frozen=True)
class Sector:
    """Fixed electron number N and (optionally) fixed 2*M = N_up - N_down."""

    L: int
    N: int
    twoM: int | None
    codes: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.codes)

    @property
    def M(self) -> float | None:
        return None if self.twoM is None else self.twoM / 2

    def positions(self, codes: np.ndarray) -> np.ndarray:
        """Basis positions of ``codes``; -1 where a code is not in the sector."""
        pos = np.searchsorted(self.codes, codes)
        pos = np.minimum(pos, max(self.dim - 1, 0))
        ok = self.codes[pos] == codes if self.dim else np.zeros(len(codes), bool)
        return np.where(ok, pos, -1)


def _spin_codes(L: int, n: int, spin: int) -> np.ndarray:
    sites = 2 * L + 1
    out = [sum(1 << (2 * s + spin) for s in combo) for combo in itertools.combinations(range(sites), n)]
    return np.array(out, dtype=np.int64)


@lru_cache(maxsize=64)
def build_sector(L: int, N: int, twoM: int | None = None) -> Sector:
    sites = 2 * L + 1
    if twoM is None:
        splits = [(nu, N - nu) for nu in range(0, N + 1)]
    else:
        if (N + twoM) % 2:
            raise ValueError("N and 2M must have equal parity")
        splits = [((N + twoM) // 2, (N - twoM) // 2)]
    splits = [(a, b) for a, b in splits if 0 <= a <= sites and 0 <= b <= sites]
    from math import comb
    dim = sum(comb(sites, a) * comb(sites, b) for a, b in splits)
    if dim > MAX_SECTOR_DIM:
        raise SectorTooLarge(f"sector dimension {dim} exceeds {MAX_SECTOR_DIM}")
    chunks = []
    for nu, nd in splits:
        up = _spin_codes(L, nu, UP)
        dn = _spin_codes(L, nd, DOWN)
        chunks.append((up[:, None] | dn[None, :]).ravel())
    codes = np.sort(np.concatenate(chunks)) if chunks else np.zeros(0, np.int64)
    codes.setflags(write=False)
    return Sector(L=L, N=N, twoM=twoM, codes=codes)


def magnetization_sectors(L: int, N: int) -> list[int]:
    """All admissible values of 2M at electron number N."""
    sites = 2 * L + 1
    out = []
    for nu in range(0, N + 1):
        nd = N - nu
        if nu <= sites and nd <= sites:
            out.append(nu - nd)
    return sorted(out)


class SparseState:
    """Fock-space vector stored as sorted unique occupation codes and amplitudes."""

    __slots__ = ("L", "codes", "amps")

    def __init__(self, L: int, codes: np.ndarray, amps: np.ndarray):
        self.L = L
        self.codes = codes
        self.amps = amps

    @classmethod
    def vacuum(cls, L: int) -> "SparseState":
        return cls(L, np.zeros(1, np.int64), np.ones(1, complex))

    @classmethod
    def from_terms(cls, L: int, codes: np.ndarray, amps: np.ndarray) -> "SparseState":
        if len(codes) == 0:
            return cls(L, np.zeros(0, np.int64), np.zeros(0, complex))
        uniq, inv = np.unique(codes, return_inverse=True)
        acc = np.zeros(len(uniq), complex)
        np.add.at(acc, inv, amps)
        return cls(L, uniq, acc)

    def create(self, i: int) -> "SparseState":
        bit = np.int64(1) << np.int64(i)
        keep = (self.codes & bit) == 0
        c = self.codes[keep]
        sign = 1 - 2 * _parity_below(c, i)
        return SparseState(self.L, c | bit, self.amps[keep] * sign)

    def annihilate(self, i: int) -> "SparseState":
        bit = np.int64(1) << np.int64(i)
        keep = (self.codes & bit) != 0
        c = self.codes[keep]
        sign = 1 - 2 * _parity_below(c, i)
        return SparseState(self.L, c ^ bit, self.amps[keep] * sign)

    def number(self, i: int) -> "SparseState":
        bit = np.int64(1) << np.int64(i)
        keep = (self.codes & bit) != 0
        return SparseState(self.L, self.codes[keep], self.amps[keep])

    def apply_linear(self, terms, kind: str) -> "SparseState":
        """sum_k coeff_k * op(i_k) |self> with op = create or annihilate."""
        codes, amps = [], []
        for i, coeff in terms:
            if coeff == 0:
                continue
            s = self.create(i) if kind == "create" else self.annihilate(i)
            codes.append(s.codes)
            amps.append(s.amps * coeff)
        if not codes:
            return SparseState(self.L, np.zeros(0, np.int64), np.zeros(0, complex))
        return SparseState.from_terms(self.L, np.concatenate(codes), np.concatenate(amps))

    def __add__(self, other: "SparseState") -> "SparseState":
        return SparseState.from_terms(self.L, np.concatenate([self.codes, other.codes]),
                                      np.concatenate([self.amps, other.amps]))

    def scale(self, c) -> "SparseState":
        return SparseState(self.L, self.codes, self.amps * c)

    def inner(self, other: "SparseState") -> complex:
        """<self|other>."""
        common, ia, ib = np.intersect1d(self.codes, other.codes, assume_unique=True,
                                        return_indices=True)
        return complex(np.vdot(self.amps[ia], other.amps[ib]))

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def to_vector(self, sector: Sector) -> "WaveVector":
        pos = sector.positions(self.codes)
        nz = np.abs(self.amps) > 0
        if np.any((pos < 0) & nz):
            raise ValueError("state has weight outside the requested sector")
        vec = np.zeros(sector.dim, complex)
        vec[pos[pos >= 0]] = self.amps[pos >= 0]
        return WaveVector(sector, vec)


@dataclass
class WaveVector:
    sector: Sector
    amps: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "WaveVector":
        n = self.norm()
        if n == 0:
            raise ValueError("zero vector")
        return WaveVector(self.sector, self.amps / n)

    def to_sparse(self) -> SparseState:
        nz = self.amps != 0
        return SparseState(self.sector.L, self.sector.codes[nz].copy(), self.amps[nz].copy())


def one_body_pattern(sector: Sector, i: int, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(rows, cols, signs) of c_i^dagger c_j restricted to a sector."""
    codes = sector.codes
    bi = np.int64(1) << np.int64(i)
    bj = np.int64(1) << np.int64(j)
    if i == j:
        cols = np.nonzero(codes & bi)[0]
        return cols, cols, np.ones(len(cols))
    has_j = (codes & bj) != 0
    not_i = (codes & bi) == 0
    cols = np.nonzero(has_j & not_i)[0]
    c = codes[cols]
    s1 = _parity_below(c, j)
    c2 = c ^ bj
    s2 = _parity_below(c2, i)
    rows = sector.positions(c2 | bi)
    if np.any(rows < 0):
        raise RuntimeError("one-body operator left the sector")
    return rows, cols, (1 - 2 * ((s1 + s2) & 1)).astype(float)
