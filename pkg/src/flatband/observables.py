"""Ground-state expectation values from ratios of the normalization function.

A ``GroundState`` evaluates one-point and two-point functions either on a
finite chain (integer sites -l..l) or directly in the infinite-volume limit,
where every B with an infinite endpoint is replaced by its certified limit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from .model import (DerivedConstants, ModelParams, ParameterError, Site, build_lattice,
                    derive_constants, f_coeff)
from .normfunc import DEFAULT_TOL, b_backward, b_forward, b_limit, g_minus, g_plus
from .oracle.fock import DOWN, UP

SPINS = {"up": UP, "down": DOWN, UP: UP, DOWN: DOWN}


class UnsupportedAnalyticForm(ValueError):
    """No closed form is implemented for this site combination; use the ED oracle."""


class GroundState:
    """Domain-wall ground state Psi(zeta) on a chain of length L, or its infinite-volume limit.

    ``L=None`` selects limit mode.  Sites may be given as numbers or ``Site``.
    """

    def __init__(self, params: ModelParams, L: int | None = None, tol: float = DEFAULT_TOL):
        self.params = params
        self.c: DerivedConstants = derive_constants(params)
        self.tol = tol
        self.L = L
        if L is not None:
            self.lattice = build_lattice(L)
            self.l = self.lattice.l
            self._left = b_forward(-self.l, self.l, self.c.z, self.c)
            self._right = b_backward(-self.l, self.l, self.c.z, self.c)
            self._full = self._left(self.l)
        else:
            self.lattice = None
            self.l = math.inf
            self._full = None
        self._mid_cache: dict[int, object] = {}

    @property
    def limit_mode(self) -> bool:
        return self.L is None

    # -- B accessors ---------------------------------------------------------

    def b_left(self, y: int) -> float:
        """B(-l, y)."""
        if not self.limit_mode:
            return self._left(y)
        return _cached_limit(self.c, y, "left", self.tol)

    def b_right(self, x: int) -> float:
        """B(x, l)."""
        if not self.limit_mode:
            return self._right(x)
        return _cached_limit(self.c, x, "right", self.tol)

    def b_full(self) -> float:
        if not self.limit_mode:
            return self._full
        z = self.c.z
        w = 0 if z is None or math.isinf(z) else int(round(z))
        return _cached_limit(self.c, w, "both", self.tol)

    def b_mid(self, x: int, y: int) -> float:
        """B(x, y) on a finite window."""
        if y < x - 2:
            raise ValueError("need y >= x - 2")
        tab = self._mid_cache.get(x)
        if tab is None or tab.free_ends()[-1] < y:
            tab = b_forward(x, max(y, x + 8), self.c.z, self.c)
            self._mid_cache[x] = tab
        return tab(y)

    # -- helpers ---------------------------------------------------------------

    def _check_site(self, x) -> Site:
        s = Site.from_coord(x)
        if self.lattice is not None and s not in self.lattice:
            raise ParameterError(f"site {s.x:g} outside the lattice")
        return s

    def weight(self, x) -> float:
        """|zeta q^x|^2."""
        return self.params.wall_weight(Site.from_coord(x).x)

    def eta(self, x, spin) -> complex:
        spin = SPINS[spin]
        if spin == UP:
            return 1.0
        return complex(self.params.zeta * self.params.q_pow(Site.from_coord(x).x))

    def _log1p_weight(self, xs) -> np.ndarray:
        p = self.params
        xs = np.asarray(xs, dtype=float)
        if p.zeta_abs == 0:
            return np.zeros(xs.shape)
        return np.logaddexp(0.0, 2 * (math.log(p.zeta_abs) + xs * math.log(p.q_abs)))

    # -- one-point functions -------------------------------------------------

    def density(self, x) -> float:
        s = self._check_site(x)
        r, lam = self.c.r, self.params.lam
        if s.is_integer:
            x = int(s)
            return lam * lam / r * self.b_left(x - 1) * self.b_right(x + 1) / self.b_full()
        a = int(math.floor(s.x))
        sx, sa, sa1 = self.weight(s.x), self.weight(a), self.weight(a + 1)
        qa = self.params.q_abs
        t1 = qa ** -0.5 / (r * (1 + sa)) * self.b_left(a - 1) * self.b_right(a + 1)
        t2 = qa ** 0.5 / (r * (1 + sa1)) * self.b_left(a) * self.b_right(a + 2)
        t3 = 2 * (1 + sx) / (r * r * (1 + sa) * (1 + sa1)) * self.b_left(a - 1) * self.b_right(a + 2)
        return (1 + sx) * (t1 + t2 - t3) / self.b_full()

    def spin(self, x, j: int) -> float:
        s = self._check_site(x)
        n = self.density(s)
        w = complex(self.params.zeta * self.params.q_pow(s.x))
        d = 1 + abs(w) ** 2
        if j == 1:
            return n * w.real / d
        if j == 2:
            return n * w.imag / d
        if j == 3:
            return n / 2 * (1 - abs(w) ** 2) / d
        raise ValueError("spin component must be 1, 2 or 3")

    # -- two-point functions -------------------------------------------------

    def _int_pair(self, x, y) -> tuple[int, int]:
        sx, sy = self._check_site(x), self._check_site(y)
        if not (sx.is_integer and sy.is_integer):
            raise UnsupportedAnalyticForm(
                "two-point functions at half-odd-integer sites have no closed form here; "
                "use the ED oracle (flatband.oracle) on a small lattice")
        return int(sx), int(sy)

    def density_two_point(self, x, y) -> float:
        x, y = self._int_pair(x, y)
        if x == y:
            raise ValueError("coincident sites; use density() and the on-site occupation instead")
        x, y = min(x, y), max(x, y)
        r, lam = self.c.r, self.params.lam
        return (lam ** 4 / r ** 2 * self.b_left(x - 1) * self.b_mid(x + 1, y - 1)
                * self.b_right(y + 1) / self.b_full())

    def spin_two_point(self, x, y, j: int, k: int) -> float:
        x, y = self._int_pair(x, y)
        if x == y:
            raise ValueError("coincident sites are not covered by the product formula")
        nn = self.density_two_point(x, y)
        return self.spin(x, j) * self.spin(y, k) * nn / (self.density(x) * self.density(y))

    def electron_two_point(self, x, y, sigma, tau) -> complex:
        """<c^dagger_{x,sigma} c_{y,tau}> for integer sites."""
        x, y = self._int_pair(x, y)
        if x > y:
            return complex(np.conj(self.electron_two_point(y, x, tau, sigma)))
        r, lam = self.c.r, self.params.lam
        m = y - x
        log_mag = (float(np.sum(self._log1p_weight(np.arange(x + 1, y + 1) - 0.5)))
                   - float(np.sum(self._log1p_weight(np.arange(x, y + 1))))
                   - (m + 1) * math.log(r))
        ratio = self.b_left(x - 1) * self.b_right(y + 1) / self.b_full()
        phase = (-np.exp(-0.5j * self.params.theta)) ** m
        return complex(np.conj(self.eta(x, sigma)) * self.eta(y, tau) * lam ** 2
                       * math.exp(log_mag) * ratio * phase)

    # -- profiles ----------------------------------------------------------------

    def sites(self, window: tuple[float, float] | None = None) -> list[Site]:
        if window is None:
            if self.lattice is None:
                raise ValueError("limit mode needs an explicit window")
            return list(self.lattice.sites)
        lo, hi = (Site.from_coord(window[0]).half_units, Site.from_coord(window[1]).half_units)
        return [Site(h) for h in range(lo, hi + 1)]

    def one_point_profile(self, window=None) -> "ObservableProfile":
        rows = {}
        for s in self.sites(window):
            n = self.density(s)
            rows[s] = {"n": n, "S1": self.spin(s, 1), "S2": self.spin(s, 2), "S3": self.spin(s, 3)}
        return ObservableProfile(kind="one_point", entries=rows, params=self.params, source="analytic")


@lru_cache(maxsize=4096)
def _cached_limit(c: DerivedConstants, x: int, direction: str, tol: float) -> float:
    return b_limit(x, c.z, direction, c, tol).value


# ---------------------------------------------------------------------------
# profile containers and fits


@dataclass
class ObservableProfile:
    kind: str
    entries: dict
    params: ModelParams
    source: str = "analytic"

    def to_rows(self) -> list[dict]:
        out = []
        for key, val in self.entries.items():
            row = {}
            if isinstance(key, tuple):
                row["site2x"], row["site2y"] = key[0].half_units, key[1].half_units
            else:
                row["site2x"] = key.half_units
            if isinstance(val, dict):
                row.update(val)
            else:
                row["re"], row["im"] = complex(val).real, complex(val).imag
            row["source"] = self.source
            out.append(row)
        return out


@dataclass
class DecayFit:
    rate: float
    intercept: float
    residual: float
    window: tuple[int, int]
    n_points: int = 0

    @property
    def length(self) -> float:
        return 1.0 / self.rate if self.rate > 0 else math.inf

    def to_json(self) -> str:
        return json.dumps({"rate": self.rate, "intercept": self.intercept, "residual": self.residual,
                           "window": list(self.window), "length": self.length,
                           "n_points": self.n_points})


NOISE_FLOOR = 1e-13


def fit_decay(distances: Iterable[float], values: Iterable[float],
              floor: float = NOISE_FLOOR) -> DecayFit:
    """Least-squares fit of log|value| = intercept - rate * distance.

    Points with |value| <= ``floor`` are rounding noise from the subtraction
    that forms a truncated correlation and are left out.
    """
    d = np.asarray(list(distances), dtype=float)
    v = np.abs(np.asarray(list(values), dtype=complex))
    ok = v > floor
    d, v = d[ok], v[ok]
    if len(d) < 6:
        raise ValueError("need at least 6 nonzero points for a decay fit")
    A = np.vstack([np.ones_like(d), -d]).T
    coef, res, *_ = np.linalg.lstsq(A, np.log(v), rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - np.log(v)) ** 2)))
    return DecayFit(rate=float(coef[1]), intercept=float(coef[0]), residual=resid,
                    window=(int(d.min()), int(d.max())), n_points=len(d))


def truncated_correlation(gs: GroundState, x0: int, separations: Iterable[int],
                          kind: str = "density", exclude_wall: int = 5) -> tuple[ObservableProfile, DecayFit]:
    """<A_x0 A_y> - <A_x0><A_y> for y = x0 + d, with an exponential fit in d.

    ``kind`` is "density" or "spin33".  Pairs with y within ``exclude_wall`` sites
    of the wall centre are dropped before the fit.
    """
    z = gs.c.z
    entries, ds, vals = {}, [], []
    for d in separations:
        if d == 0:
            continue
        y = x0 + d
        if kind == "density":
            v = gs.density_two_point(x0, y) - gs.density(x0) * gs.density(y)
        elif kind == "spin33":
            v = gs.spin_two_point(x0, y, 3, 3) - gs.spin(x0, 3) * gs.spin(y, 3)
        else:
            raise ValueError(f"unknown correlation kind {kind!r}")
        entries[(Site(2 * x0), Site(2 * y))] = v
        if z is not None and not math.isinf(z) and abs(y - z) < exclude_wall:
            continue
        ds.append(abs(d))
        vals.append(v)
    prof = ObservableProfile(kind=f"truncated_{kind}", entries=entries, params=gs.params)
    return prof, fit_decay(ds, vals)


def electron_decay(gs: GroundState, x0: int, separations: Iterable[int],
                   sigma="up", tau="up") -> DecayFit:
    ds = [d for d in separations if d > 0]
    vals = [gs.electron_two_point(x0, x0 + d, sigma, tau) for d in ds]
    return fit_decay(ds, vals)


# ---------------------------------------------------------------------------
# bounds on the density


def _ends(gs: GroundState) -> tuple[float, float]:
    return (-math.inf, math.inf) if gs.limit_mode else (-gs.l, gs.l)


def _f_at(c: DerivedConstants, u: float) -> float:
    if c.z is None or c.unit_q or math.isinf(c.z):
        return 0.0
    return float(f_coeff(u, c.q_eff))


def g1(gs: GroundState, w: int) -> float:
    """G1(w, l, z): B(-l,w-1)B(w+1,l)/B(-l,l) >= r/sqrt(eps^2-4) / (1 + G1)."""
    c = gs.c
    z = 0.0 if c.z is None else c.z
    lo, hi = _ends(gs)
    gp = g_plus(lo, w - 2, z, c)
    gm = g_minus(w + 2, hi, z, c)
    fm, fp = _f_at(c, w - 0.5 - z), _f_at(c, w + 0.5 - z)
    return (fm * (1 - gp) + fp * (1 - gm) + gp + gm) / (c.r ** 2 - 1)


def _wall_factors(gs: GroundState, x: float) -> tuple[float, float]:
    """F- = |q|^{-1/2}(1+s_x)/(1+s_{x-1/2}) and F+ = |q|^{1/2}(1+s_x)/(1+s_{x+1/2}), s_w = |zeta q^w|^2."""
    q = gs.params.q_abs
    sx = gs.weight(x)
    return (q ** -0.5 * (1 + sx) / (1 + gs.weight(x - 0.5)),
            q ** 0.5 * (1 + sx) / (1 + gs.weight(x + 0.5)))


def density_bounds(gs: GroundState, x) -> tuple[float, float]:
    """Certified (lower, upper) bounds on <n_x>.

    Integer sites: plateau/(1 + G1) and the plateau lambda^2/sqrt(eps^2-4).
    Half-odd sites: (1 - lambda^2/sqrt(eps^2-4)) (1 -+ G2-/+) through the
    representation with the wall factors F- and F+.
    """
    s = Site.from_coord(x)
    c = gs.c
    root = c.sqrt_disc
    if s.is_integer:
        return c.plateau_integer / (1 + g1(gs, int(s))), c.plateau_integer
    r = c.r
    z = 0.0 if c.z is None else c.z
    lo, hi = _ends(gs)
    fm, fp = _wall_factors(gs, s.x)
    a = int(math.floor(s.x))  # s.x = a + 1/2
    gm = g_minus(a + 2, hi, z, c)
    gp = g_plus(lo, a - 1, z, c)
    upper = (fm * (1 - fp / r * (1 - gm)) + fp * (1 - fm / r * (1 - gp))) / root

    def inv1pg(w):
        return 0.0 if not lo <= w <= hi else 1.0 / (1 + g1(gs, w))
    lower = (fm * (1 - fp / r) * inv1pg(a) + fp * (1 - fm / r) * inv1pg(a + 1)) / root
    return lower, upper


def g2_coefficients(gs: GroundState, x) -> tuple[float, float]:
    """(G2-, G2+) at a half-odd site: bounds relative to the plateau 1 - lambda^2/sqrt(eps^2-4)."""
    lower, upper = density_bounds(gs, x)
    ref = gs.c.plateau_half
    return 1 - lower / ref, upper / ref - 1


# ---------------------------------------------------------------------------
# symmetry breaking


@dataclass
class SymmetryReport:
    site: float
    phi: float
    u: int
    s1: float
    s1_rotated: float
    s3: float
    s3_reflected: float
    s3_translated: float
    s3_shifted_reference: float
    all_up: dict = field(default_factory=dict)

    def differences(self) -> dict:
        return {"u1": self.s1_rotated - self.s1, "z2": self.s3_reflected - self.s3,
                "translation": self.s3_translated - self.s3}


def symmetry_breaking_report(params: ModelParams, x: int, phi: float = math.pi, u: int = 5,
                             tol: float = DEFAULT_TOL) -> SymmetryReport:
    """Compare symmetry-transformed local expectations with the original ones in limit mode."""
    gs = GroundState(params, None, tol)
    s1, s2, s3 = gs.spin(x, 1), gs.spin(x, 2), gs.spin(x, 3)
    rotated = math.cos(phi) * s1 - math.sin(phi) * s2
    # reflection maps S3_x to -S3_{-x}
    reflected = -gs.spin(-x, 3)
    translated = gs.spin(x + u, 3)
    # T_u covariance: shifting the wall by u reproduces the translated value
    shifted_params = params.with_(zeta_abs=params.zeta_abs * params.q_abs ** (-u)) \
        if params.zeta_abs > 0 and params.q_abs != 1 else params
    shifted = GroundState(shifted_params, None, tol).spin(x + u, 3) if shifted_params is not params else translated
    up = GroundState(params.with_(zeta_abs=0.0), None, tol)
    all_up = {"S1": up.spin(x, 1), "S2": up.spin(x, 2), "S3": up.spin(x, 3), "n": up.density(x)}
    return SymmetryReport(site=x, phi=phi, u=u, s1=s1, s1_rotated=rotated, s3=s3,
                          s3_reflected=reflected, s3_translated=translated,
                          s3_shifted_reference=shifted, all_up=all_up)
