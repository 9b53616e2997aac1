"""Ground-space analysis: kernel dimensions per magnetization sector."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..model import ModelParams
from .fock import build_sector, magnetization_sectors
from .hamiltonian import build_hamiltonian

DENSE_LIMIT = 3000
ZERO_THRESHOLD = 1e-10


def spectral_scale(H: sp.spmatrix) -> float:
    """Gershgorin upper bound on the largest eigenvalue."""
    return float(np.max(np.asarray(abs(H).sum(axis=1)).ravel()))


def lowest_eigenvalues(H: sp.spmatrix, k: int) -> np.ndarray:
    """k smallest eigenvalues: dense for small sectors, restarted Lanczos otherwise."""
    n = H.shape[0]
    if n <= DENSE_LIMIT:
        return np.linalg.eigvalsh(H.toarray())[:k]
    v0 = np.ones(n, complex) / np.sqrt(n)
    ev = spla.eigsh(H, k=k, which="SA", return_eigenvectors=False, tol=1e-12,
                    ncv=max(60, 4 * k), v0=v0)
    return np.sort(ev.real)


def kernel_dimension(H: sp.spmatrix, threshold: float = ZERO_THRESHOLD,
                     k: int = 6) -> tuple[int, float, float]:
    """(number of eigenvalues below threshold * scale, first nonzero eigenvalue, lowest eigenvalue)."""
    n = H.shape[0]
    scale = spectral_scale(H)
    while True:
        kk = min(k, n - 1) if n > DENSE_LIMIT else n
        ev = lowest_eigenvalues(H, kk)
        zero = int(np.sum(ev < threshold * scale))
        if zero < len(ev) or kk >= n - 1:
            gap = float(ev[zero]) if zero < len(ev) else float("nan")
            return zero, gap, float(ev[0])
        k *= 2


@dataclass
class GroundSpaceReport:
    L: int
    N: int
    kernel_dims: dict
    gaps: dict
    min_eigenvalues: dict

    @property
    def total(self) -> int:
        return int(sum(self.kernel_dims.values()))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["total"] = self.total
        return d


def ground_space_analysis(params: ModelParams, L: int, N: int | None = None) -> GroundSpaceReport:
    N = L if N is None else N
    dims, gaps, mins = {}, {}, {}
    for twoM in magnetization_sectors(L, N):
        sec = build_sector(L, N, twoM)
        H = build_hamiltonian(params, sec)
        kd, gap, lowest = kernel_dimension(H)
        key = f"{twoM}/2"
        dims[key] = kd
        gaps[key] = gap
        mins[key] = lowest
    return GroundSpaceReport(L=L, N=N, kernel_dims=dims, gaps=gaps, min_eigenvalues=mins)
