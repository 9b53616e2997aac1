"""Lattice, model parameters and the scalar constants derived from them.

Sites are stored as doubled integers (``half_units == 2 * x``) so that the
half-odd-integer sublattice is represented exactly.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

EPS_MARGIN = 1e-9


class ParameterError(ValueError):
    """Invalid or degenerate model parameters."""


@dataclass(frozen=True, order=True)
class Site:
    half_units: int

    @classmethod
    def from_coord(cls, x) -> "Site":
        if isinstance(x, Site):
            return x
        h = 2 * float(x)
        if h != round(h):
            raise ValueError(f"{x!r} is not a lattice coordinate")
        return cls(int(round(h)))

    @property
    def x(self) -> float:
        return self.half_units / 2

    @property
    def is_integer(self) -> bool:
        return self.half_units % 2 == 0

    def __index__(self) -> int:
        if not self.is_integer:
            raise TypeError(f"site {self.x} is not an integer site")
        return self.half_units // 2

    def shift(self, dx) -> "Site":
        return Site(self.half_units + int(round(2 * dx)))

    def __repr__(self) -> str:
        return f"Site({self.x:g})"


def as_int_site(x) -> int:
    """Integer coordinate of an integer site given as ``Site`` or number."""
    if isinstance(x, Site):
        return x.__index__()
    if isinstance(x, (int, np.integer)):
        return int(x)
    if float(x) != int(x):
        raise ValueError(f"{x!r} is not an integer site")
    return int(x)


@dataclass(frozen=True)
class Lattice:
    L: int
    l: int
    sites: tuple[Site, ...]

    @property
    def integer_sites(self) -> tuple[Site, ...]:
        return tuple(s for s in self.sites if s.is_integer)

    @property
    def half_sites(self) -> tuple[Site, ...]:
        return tuple(s for s in self.sites if not s.is_integer)

    def __contains__(self, site) -> bool:
        s = Site.from_coord(site)
        return abs(s.half_units) <= self.L

    def __len__(self) -> int:
        return len(self.sites)


def build_lattice(L: int) -> Lattice:
    """Decorated chain with integer sites -l..l and half-odd sites -l-1/2..l+1/2."""
    if not isinstance(L, (int, np.integer)) or L < 3 or L % 2 == 0:
        raise ParameterError(f"L must be an odd integer >= 3, got {L!r}")
    L = int(L)
    sites = tuple(Site(h) for h in range(-L, L + 1))
    return Lattice(L=L, l=(L - 1) // 2, sites=sites)


@dataclass(frozen=True)
class ModelParams:
    lam: float = 1.25
    q_abs: float = 1.2
    theta: float = 0.0
    zeta_abs: float = 1.0
    zeta_phase: float = 0.0
    t: float = 1.0
    U: float = 1.0

    def __post_init__(self):
        if not self.t > 0:
            raise ParameterError("t must be positive")
        if not self.U > 0:
            raise ParameterError("U must be positive")
        if not self.lam >= 0:
            raise ParameterError("lambda must be non-negative")
        if not self.q_abs > 0:
            raise ParameterError("|q| must be positive")
        if not self.zeta_abs >= 0:
            raise ParameterError("|zeta| must be non-negative")

    @property
    def q(self) -> complex:
        return self.q_abs * np.exp(1j * self.theta)

    @property
    def zeta(self) -> complex:
        return self.zeta_abs * np.exp(1j * self.zeta_phase)

    def q_pow(self, a) -> complex:
        """q**a on the branch |q|**a * exp(i a theta)."""
        return self.q_abs ** a * np.exp(1j * a * self.theta)

    def wall_weight(self, x) -> float:
        """|zeta q^x|^2 for a (possibly half-odd) coordinate x."""
        if self.zeta_abs == 0:
            return 0.0
        return float(np.exp(2 * (math.log(self.zeta_abs) + float(x) * math.log(self.q_abs))))

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class DerivedConstants:
    epsilon: float
    r: float
    p: float
    z: float | None
    q_abs: float
    lam: float
    # |q| folded to >= 1; B is invariant under |q| -> 1/|q|
    q_eff: float = field(repr=False, default=1.0)

    @property
    def sqrt_disc(self) -> float:
        """sqrt(eps^2 - 4) = r - 1/r."""
        return self.r - 1.0 / self.r

    @property
    def unit_q(self) -> bool:
        return self.q_abs == 1.0

    @property
    def f0(self) -> float:
        return f_coeff(0.0, self.q_abs)

    @property
    def plateau_integer(self) -> float:
        return self.lam ** 2 / self.sqrt_disc

    @property
    def plateau_half(self) -> float:
        return 1.0 - self.plateau_integer


def _epsilon(lam: float, q_abs: float) -> float:
    return lam ** 2 + math.sqrt(q_abs) + 1.0 / math.sqrt(q_abs)


def derive_constants(params: ModelParams) -> DerivedConstants:
    eps = _epsilon(params.lam, params.q_abs)
    if eps <= 2.0 + EPS_MARGIN:
        raise ParameterError(f"epsilon = {eps!r} is not > 2; the recursion degenerates (r = 1)")
    r = (eps + math.sqrt(eps * eps - 4.0)) / 2.0
    q = params.q_abs
    if q > 1:
        p = min(r, q)
    elif q < 1:
        p = min(r, 1.0 / q)
    else:
        p = r
    if q == 1.0:
        z = None
    elif params.zeta_abs == 0:
        z = math.inf if q > 1 else -math.inf
    else:
        z = -math.log(params.zeta_abs) / math.log(q)
    return DerivedConstants(epsilon=eps, r=r, p=p, z=z, q_abs=q, lam=params.lam,
                            q_eff=max(q, 1.0 / q))


def f_coeff(u, q_abs: float):
    """Source coefficient of the rescaled recursion.

    Written as c^2 / (4 cosh((u-1/2) a) cosh((u+1/2) a)) with a = log|q|, which is
    even in u, invariant under |q| -> 1/|q|, zero for |q| = 1 and underflows
    gracefully to 0 for |u| -> inf.
    """
    a = math.log(q_abs)
    c2 = (math.sqrt(q_abs) - 1.0 / math.sqrt(q_abs)) ** 2
    u = np.asarray(u, dtype=float)
    with np.errstate(over="ignore"):
        out = c2 / (4.0 * np.cosh((u - 0.5) * a) * np.cosh((u + 0.5) * a))
    return float(out) if out.ndim == 0 else out


def f_envelope(u, q_abs: float):
    """(|q|^{1/2} - |q|^{-1/2})^2 |q|^{-2|u|}, an upper bound of ``f_coeff``."""
    q = max(q_abs, 1.0 / q_abs)
    c2 = (math.sqrt(q) - 1.0 / math.sqrt(q)) ** 2
    u = np.asarray(u, dtype=float)
    out = c2 * q ** (-2.0 * np.abs(u))
    return float(out) if out.ndim == 0 else out


_CONFIG_KEYS = {
    "L": int, "t": float, "U": float, "lambda": float, "q_abs": float,
    "theta": float, "zeta_abs": float, "zeta_phase": float,
}


def read_config(path) -> dict:
    """Parse a flat ``key = value`` parameter file into typed values."""
    text = Path(path).read_text()
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    cp.read_string("[params]\n" + text)
    out = {}
    for key, raw in cp["params"].items():
        if key not in _CONFIG_KEYS:
            raise ParameterError(f"unknown config key {key!r}")
        try:
            out[key] = _CONFIG_KEYS[key](raw)
        except ValueError as exc:
            raise ParameterError(f"bad value for {key}: {raw!r}") from exc
    return out


def params_from_mapping(values: dict) -> ModelParams:
    kw = {}
    for key, attr in (("lambda", "lam"), ("q_abs", "q_abs"), ("theta", "theta"),
                      ("zeta_abs", "zeta_abs"), ("zeta_phase", "zeta_phase"),
                      ("t", "t"), ("U", "U")):
        if key in values and values[key] is not None:
            kw[attr] = float(values[key])
    return ModelParams(**kw)
