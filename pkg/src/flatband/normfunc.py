"""Normalization function of the domain-wall ground state.

The squared norm A(x, y) of a partial product of the one-particle operators
alpha^dagger grows like a product of site factors; it is always carried as a
log prefactor times the bounded rescaled function B(x, y, z).  Everything in
this module works with B and integer sites.

B obeys a three-term recursion in either endpoint,

    B(x, y) = (1 + r^2)/r^2 B(x, y-1) - (1 - f(y - z - 1/2))/r^2 B(x, y-2),

with the formal values B(x, x-1) = 1 and B(x, x-2) = 0.  The comparison
functions C and D (used for the convergence argument) and the ratio bounds
G+ / G- live here as well.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .model import DerivedConstants, ModelParams, as_int_site, f_coeff, f_envelope

DEFAULT_TOL = 1e-14


class PreconditionError(ValueError):
    """A documented precondition of a normalization routine was violated."""


class ConvergenceError(RuntimeError):
    pass


def _f(u, c: DerivedConstants):
    if c.z is None or c.unit_q:
        return 0.0 if np.ndim(u) == 0 else np.zeros(np.shape(u))
    return f_coeff(u, c.q_eff)


def _f_vanishes(c: DerivedConstants, z) -> bool:
    return c.unit_q or z is None or math.isinf(z)


# ---------------------------------------------------------------------------
# prefactors and the |q| = 1 closed form


@dataclass(frozen=True)
class LogNormValue:
    log_prefactor: float
    b_value: float

    @property
    def log_value(self) -> float:
        return self.log_prefactor + math.log(self.b_value)

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


def log_site_factor(w, params: ModelParams, r: float):
    """log[r (1 + |zeta q^w|^2)], vectorized over w."""
    w = np.asarray(w, dtype=float)
    if params.zeta_abs == 0:
        out = np.full(w.shape, math.log(r))
    else:
        log_s = 2.0 * (math.log(params.zeta_abs) + w * math.log(params.q_abs))
        out = math.log(r) + np.logaddexp(0.0, log_s)
    return float(out) if out.ndim == 0 else out


def log_prefactor(x: int, y: int, params: ModelParams, r: float) -> float:
    if y < x:
        return 0.0
    return float(np.sum(log_site_factor(np.arange(x, y + 1), params, r)))


def boundary_A(x, params: ModelParams, constants: DerivedConstants) -> tuple[float, float, float]:
    """Closed forms of A(x, x), A(x, x+1) and A(x-1, x)."""
    x = as_int_site(x)
    eps = constants.epsilon
    s = params.wall_weight
    a_xx = eps * (1 + s(x))
    a_right = eps ** 2 * (1 + s(x)) * (1 + s(x + 1)) - (1 + s(x + 0.5)) ** 2
    a_left = eps ** 2 * (1 + s(x - 1)) * (1 + s(x)) - (1 + s(x - 0.5)) ** 2
    return a_xx, a_right, a_left


def closed_b_unit(n, r: float):
    """B on a window of n sites when the source term vanishes (|q| = 1 or zeta = 0)."""
    n = np.asarray(n, dtype=float)
    out = (1.0 - r ** (-2.0 * (n + 1))) / (1.0 - r ** -2.0)
    return float(out) if out.ndim == 0 else out


def a_closed_qunit(x, y, params: ModelParams, constants: DerivedConstants) -> LogNormValue:
    """A(x, y) for |q| = 1: [r(1+|zeta|^2)]^{n} (1 - r^{-2(n+1)})/(1 - r^{-2}), n = y-x+1."""
    if not constants.unit_q:
        raise PreconditionError("closed form requires |q| = 1")
    x, y = as_int_site(x), as_int_site(y)
    n = y - x + 1
    if n < -1:
        raise PreconditionError("need y - x >= -2")
    r = constants.r
    logp = n * (math.log(r) + math.log1p(params.zeta_abs ** 2)) if n > 0 else 0.0
    return LogNormValue(logp, closed_b_unit(n, r))


def forward_A(x, y, params: ModelParams, constants: DerivedConstants) -> float:
    """A(x, y) straight from the unscaled recursion; overflows for long windows."""
    x, y = as_int_site(x), as_int_site(y)
    s = params.wall_weight
    eps = constants.epsilon
    a2, a1 = 0.0, 1.0
    for w in range(x, y + 1):
        a2, a1 = a1, eps * (1 + s(w)) * a1 - (1 + s(w - 0.5)) ** 2 * a2
    return a1 if y >= x - 1 else 0.0


# ---------------------------------------------------------------------------
# B tables


@dataclass(frozen=True)
class IntervalTable:
    """B over a window with one endpoint held fixed.

    For ``side == "left"`` the left end ``anchor`` is fixed and
    ``values[k] = B(anchor, anchor - 2 + k)``; for ``side == "right"`` the right
    end is fixed and ``values[k] = B(anchor + 2 - k, anchor)``.
    """

    anchor: int
    z: float | None
    constants: DerivedConstants
    values: np.ndarray
    side: str = "left"

    @property
    def x0(self) -> int:
        return self.anchor

    def free_ends(self) -> np.ndarray:
        k = np.arange(len(self.values))
        return self.anchor - 2 + k if self.side == "left" else self.anchor + 2 - k

    def __call__(self, end: int) -> float:
        k = end - self.anchor + 2 if self.side == "left" else self.anchor + 2 - end
        if not 0 <= k < len(self.values):
            raise IndexError(f"endpoint {end} outside table")
        return float(self.values[k])

    def window(self, end: int) -> tuple[int, int]:
        return (self.anchor, end) if self.side == "left" else (end, self.anchor)

    def log_prefactors(self, params: ModelParams) -> np.ndarray:
        return np.array([log_prefactor(*self.window(int(e)), params, self.constants.r)
                         for e in self.free_ends()])

    def to_csv(self, path, params: ModelParams | None = None) -> None:
        logp = self.log_prefactors(params) if params is not None else None
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y" if self.side == "left" else "x", "B", "log_prefactor"])
            for k, end in enumerate(self.free_ends()):
                lp = "" if logp is None else f"{logp[k]:.17g}"
                w.writerow([int(end), f"{self.values[k]:.17g}", lp])


def _coeff_right(y, z, c: DerivedConstants):
    # coefficient of B(x, y-2) when extending the right end to y
    return (1.0 - _f(y - z - 0.5, c)) / c.r ** 2


def b_forward(x0, y_max, z, constants: DerivedConstants, *, perturb: float = 0.0) -> IntervalTable:
    """Table of B(x0, y, z) for y = x0-2 .. y_max.

    ``perturb`` scales the leading recursion coefficient by (1 + perturb); it
    exists only for fault-injection checks.
    """
    x0, y_max = as_int_site(x0), as_int_site(y_max)
    if y_max < x0 - 2:
        raise PreconditionError("y_max must be >= x0 - 2")
    r = constants.r
    n = y_max - x0 + 3
    vals = np.empty(n)
    vals[0] = 0.0
    if n > 1:
        vals[1] = 1.0
    if n > 2:
        lead = (1.0 + r * r) / (r * r) * (1.0 + perturb)
        ys = np.arange(x0, y_max + 1)
        tail = _coeff_right(ys, z, constants) if not _f_vanishes(constants, z) \
            else np.full(len(ys), 1.0 / r ** 2)
        for k in range(2, n):
            vals[k] = lead * vals[k - 1] - tail[k - 2] * vals[k - 2]
    return IntervalTable(anchor=x0, z=z, constants=constants, values=vals, side="left")


def b_differences(x0, y_max, z, constants: DerivedConstants) -> np.ndarray:
    """B(x0, y) - B(x0, y-1) for y = x0 .. y_max, without cancellation.

    Uses Delta(y) = [Delta(y-1) + f(y - z - 1/2) B(x0, y-2)] / r^2, whose terms
    are all non-negative.
    """
    x0, y_max = as_int_site(x0), as_int_site(y_max)
    tab = b_forward(x0, y_max, z, constants)
    r2 = constants.r ** 2
    n = y_max - x0 + 1
    out = np.empty(max(n, 0))
    prev = 1.0  # B(x0, x0-1) - B(x0, x0-2)
    for k in range(n):
        y = x0 + k
        src = 0.0 if _f_vanishes(constants, z) else _f(y - z - 0.5, constants) * tab(y - 2)
        prev = (prev + src) / r2
        out[k] = prev
    return out


def b_backward(x_min, y0, z, constants: DerivedConstants) -> IntervalTable:
    """Table of B(x, y0, z) for x = y0+2 down to x_min, recursing on the left end."""
    x_min, y0 = as_int_site(x_min), as_int_site(y0)
    if x_min > y0 + 2:
        raise PreconditionError("x_min must be <= y0 + 2")
    r = constants.r
    n = y0 - x_min + 3
    vals = np.empty(n)
    vals[0] = 0.0
    if n > 1:
        vals[1] = 1.0
    if n > 2:
        lead = (1.0 + r * r) / (r * r)
        xs = y0 - np.arange(0, n - 2)
        tail = (1.0 - _f(xs - z + 0.5, constants)) / r ** 2 if not _f_vanishes(constants, z) \
            else np.full(len(xs), 1.0 / r ** 2)
        for k in range(2, n):
            vals[k] = lead * vals[k - 1] - tail[k - 2] * vals[k - 2]
    return IntervalTable(anchor=y0, z=z, constants=constants, values=vals, side="right")


def b_value(x, y, z, constants: DerivedConstants) -> float:
    x, y = as_int_site(x), as_int_site(y)
    if y < x - 2:
        raise PreconditionError("B(x, y) needs y - x >= -2")
    return b_forward(x, y, z, constants)(y)


def b_split(x, w, y, z, constants: DerivedConstants) -> float:
    """B(x, y) assembled from the two sides of an interior site w."""
    x, w, y = as_int_site(x), as_int_site(w), as_int_site(y)
    if not x <= w <= y:
        raise PreconditionError("need x <= w <= y")
    r2 = constants.r ** 2
    left = b_forward(x, w - 1, z, constants)
    right = b_backward(w + 1, y, z, constants)
    return _split_combine(left(w - 2), left(w - 1), right(w + 1), right(w + 2), w, z, constants)


def _split_combine(l2, l1, r1, r2_, w, z, c: DerivedConstants) -> float:
    rr = c.r ** 2
    fm = 0.0 if _f_vanishes(c, z) else _f(w - 0.5 - z, c)
    fp = 0.0 if _f_vanishes(c, z) else _f(w + 0.5 - z, c)
    return (-(1 - fm) / rr * l2 * r1
            + (1 + rr) / rr * l1 * r1
            - (1 - fp) / rr * l1 * r2_)


def normalization(x, y, params: ModelParams, constants: DerivedConstants) -> LogNormValue:
    """A(x, y; zeta) as log prefactor times B."""
    x, y = as_int_site(x), as_int_site(y)
    if constants.unit_q:
        return a_closed_qunit(x, y, params, constants)
    return LogNormValue(log_prefactor(x, y, params, constants.r), b_value(x, y, constants.z, constants))


# ---------------------------------------------------------------------------
# comparison functions C and D


def gamma_of(g: float, constants: DerivedConstants) -> float:
    e = constants.epsilon
    return (math.sqrt(e * e - 4 + 4 * g) - math.sqrt(e * e - 4)) / (2 * constants.r)


def d_roots(g: float, constants: DerivedConstants) -> tuple[float, float]:
    if not 0 <= g < 1:
        raise PreconditionError("g must lie in [0, 1)")
    gam = gamma_of(g, constants)
    return 1.0 + gam, constants.r ** -2 - gam


def d_closed(n: int, g: float, constants: DerivedConstants) -> float:
    """D on a window with n = y - x + 2."""
    if n < 0:
        raise PreconditionError("n must be non-negative")
    rp, rm = d_roots(g, constants)
    return (rp ** n - rm ** n) / (rp - rm)


def d_recursive(n_max: int, g: float, constants: DerivedConstants) -> np.ndarray:
    """D for n = 0 .. n_max by direct recursion."""
    if not 0 <= g < 1:
        raise PreconditionError("g must lie in [0, 1)")
    r2 = constants.r ** 2
    out = np.zeros(n_max + 1)
    if n_max >= 1:
        out[1] = 1.0
    for n in range(2, n_max + 1):
        out[n] = (1 + r2) / r2 * out[n - 1] - (1 - g) / r2 * out[n - 2]
    return out


def c_recursive(x0, y_max, z, g: float, constants: DerivedConstants) -> IntervalTable:
    """Table of C(x0, y, z) for y = x0-2 .. y_max (same layout as ``b_forward``)."""
    x0, y_max = as_int_site(x0), as_int_site(y_max)
    if y_max > x0:
        fmax = float(np.max(_f(np.arange(x0, y_max) + 0.5 - z, constants)))
        if g < fmax:
            raise PreconditionError(f"g = {g} is below the window maximum of f ({fmax})")
    d = d_recursive(y_max - x0 + 2, g, constants)
    r2 = constants.r ** 2
    n = y_max - x0 + 3
    vals = np.zeros(n)
    if n > 1:
        vals[1] = 1.0
    for k in range(2, n):
        y = x0 - 2 + k
        vals[k] = ((1 + r2) / r2 * vals[k - 1] - vals[k - 2] / r2
                   + _f(y - 0.5 - z, constants) / r2 * d[k - 2])
    return IntervalTable(anchor=x0, z=z, constants=constants, values=vals, side="left")


# ---------------------------------------------------------------------------
# convergence envelope and limits


@dataclass(frozen=True)
class ConvergenceEnvelope:
    beta: float
    K1: float
    K2: float
    K3: float
    g: float
    r: float

    def bound(self, m):
        """Bound on B(x, x+m) - B(x, x+m-1) for m >= 0."""
        m = np.asarray(m, dtype=float)
        return self.K2 * self.r ** (-2 * m) + self.K3 * self.beta ** m

    def tail(self, m):
        """Bound on B(x, inf) - B(x, x+m)."""
        r2i = self.r ** -2
        return (self.K2 * r2i ** (m + 1) / (1 - r2i)
                + self.K3 * self.beta ** (m + 1) / (1 - self.beta))


def beta_upper(q_abs: float) -> float:
    """Parameter-free bound 2 / (|q|^{3/2}(|q|^{1/2} + |q|^{-1/2})) on beta."""
    q = max(q_abs, 1.0 / q_abs)
    return 2.0 / (q ** 1.5 * (math.sqrt(q) + 1 / math.sqrt(q)))


def convergence_envelope(x, z, constants: DerivedConstants, g: float | None = None) -> ConvergenceEnvelope:
    if constants.unit_q:
        raise PreconditionError("envelope is defined for |q| != 1")
    x = as_int_site(x)
    q = constants.q_eff
    r = constants.r
    g = constants.f0 if g is None else g
    rp, rm = d_roots(g, constants)
    beta = rp / q ** 2
    c2 = (math.sqrt(q) - 1 / math.sqrt(q)) ** 2
    k1 = q ** (2 * z + 1) / (r ** 2 * rp ** x) * c2 / (rp - rm)
    k2 = (1 + q ** (2 * (z - x) + 3) / (q ** 2 - r ** 2 * rp) * c2 / (rp - rm)) / r ** 2
    k3 = rp * q ** (2 * (z - x) + 1) / (r ** 2 * rp - q ** 2) * c2 / (rp - rm)
    return ConvergenceEnvelope(beta=beta, K1=k1, K2=k2, K3=k3, g=g, r=r)


@dataclass(frozen=True)
class LimitResult:
    value: float
    error: float
    steps: int
    last_difference: float = field(default=0.0)


def _iteration_cap(tol: float, env: ConvergenceEnvelope | None, r: float, dist: float) -> int:
    rate = r ** -2 if env is None else max(r ** -2, env.beta)
    base = 10 * math.ceil(math.log(tol) / math.log(rate))
    return base + 4 * int(math.ceil(max(dist, 0.0))) + 8


def _right_limit(x: int, z, tol: float, c: DerivedConstants) -> LimitResult:
    r = c.r
    if _f_vanishes(c, z) or z == -math.inf:
        return LimitResult(r * r / (r * r - 1), 0.0, 0)
    env = convergence_envelope(x, z, c)
    r2 = r * r
    lead = (1 + r2) / r2
    b2, b1 = 0.0, 1.0
    cap = _iteration_cap(tol, env, r, z - x)
    for m in range(0, cap):
        y = x + m
        b2, b1 = b1, lead * b1 - _coeff_right(y, z, c) * b2
        diff = b1 - b2
        err = env.tail(m)
        if diff < tol and err < tol:
            return LimitResult(b1, float(err), m + 1, diff)
    raise ConvergenceError(f"B({x}, inf, {z}) did not converge in {cap} steps")


def b_limit(x, z, direction: str, constants: DerivedConstants, tol: float = DEFAULT_TOL) -> LimitResult:
    """One- or two-sided limit of B with a certified truncation error.

    ``direction``: "right" gives B(x, inf), "left" gives B(-inf, x) and "both"
    gives B(-inf, inf) split at site x.
    """
    x = as_int_site(x)
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    if direction == "right":
        return _right_limit(x, z, tol, constants)
    if direction == "left":
        mz = None if z is None else -z
        return _right_limit(-x, mz, tol, constants)
    if direction == "both":
        l2 = b_limit(x - 2, z, "left", constants, tol)
        l1 = b_limit(x - 1, z, "left", constants, tol)
        r1 = b_limit(x + 1, z, "right", constants, tol)
        r2 = b_limit(x + 2, z, "right", constants, tol)
        val = _split_combine(l2.value, l1.value, r1.value, r2.value, x, z, constants)
        rr = constants.r ** 2
        # first-order propagation with absolute coefficients, plus cross terms
        err = ((1 / rr) * (l2.error * r1.value + l2.value * r1.error + l2.error * r1.error)
               + (1 + rr) / rr * (l1.error * r1.value + l1.value * r1.error + l1.error * r1.error)
               + (1 / rr) * (l1.error * r2.value + l1.value * r2.error + l1.error * r2.error))
        return LimitResult(val, err, l2.steps + l1.steps + r1.steps + r2.steps)
    raise PreconditionError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------------------
# ratio bounds


def _g_tilde_plus(x, y, z, c: DerivedConstants) -> float:
    q, r = c.q_eff, c.r
    n = y - x + 1
    base = r ** (-2.0 * n) / (1 + r * r)
    if _f_vanishes(c, z):
        return base
    c2 = (math.sqrt(q) - 1 / math.sqrt(q)) ** 2
    if abs(q * q - r * r) < 1e-9 * r * r:
        return base + g_tilde_direct(x, y, z, c, "+", envelope=True, include_base=False)
    if x >= z - 0.5:
        t = q ** (-2.0 * (x - z - 0.5)) * (r ** (-2.0 * n) - q ** (-2.0 * n)) / (q * q - r * r)
    elif y <= z - 0.5:
        t = q ** (-2.0 * (z - y - 1.5)) * (1 - q ** (-2.0 * n) * r ** (-2.0 * n)) / (q * q * r * r - 1)
    else:
        zp = math.floor(z + 0.5)
        t = (-r ** (-2.0 * n) * q ** (-2.0 * (z - x - 0.5)) / (r * r * q * q - 1)
             + q ** (-2.0 * (y - z + 0.5)) / (r * r - q * q)
             + q * r ** (-2.0 * (y - zp + 1)) * (q ** (2.0 * (zp - z)) / (r * r * q * q - 1)
                                                  + q ** (2.0 * (z - zp)) / (q * q - r * r)))
    return base + c2 * t


def _g_tilde_minus(x, y, z, c: DerivedConstants) -> float:
    q, r = c.q_eff, c.r
    n = y - x + 1
    base = r ** (-2.0 * n) / (1 + r * r)
    if _f_vanishes(c, z):
        return base
    c2 = (math.sqrt(q) - 1 / math.sqrt(q)) ** 2
    if abs(q * q - r * r) < 1e-9 * r * r:
        return base + g_tilde_direct(x, y, z, c, "-", envelope=True, include_base=False)
    if x >= z + 0.5:
        t = q ** (-2.0 * (x - z - 1.5)) * (1 - q ** (-2.0 * n) * r ** (-2.0 * n)) / (q * q * r * r - 1)
    elif y <= z + 0.5:
        t = q ** (-2.0 * (z - y - 0.5)) * (r ** (-2.0 * n) - q ** (-2.0 * n)) / (q * q - r * r)
    else:
        # split site: the last j with x - 1/2 + j - z <= 0, i.e. the integer in (z - 1/2, z + 1/2]
        zp = math.ceil(z - 0.5) if z - 0.5 != math.floor(z - 0.5) else z + 0.5
        t = (-r ** (-2.0 * n) * q ** (-2.0 * (y - z - 0.5)) / (r * r * q * q - 1)
             + q ** (-2.0 * (z - x + 0.5)) / (r * r - q * q)
             + q * r ** (-2.0 * (zp - x + 1)) * (q ** (2.0 * (z - zp)) / (r * r * q * q - 1)
                                                  + q ** (2.0 * (zp - z)) / (q * q - r * r)))
    return base + c2 * t


def g_tilde_direct(x, y, z, c: DerivedConstants, side: str, *, envelope: bool = True,
                   include_base: bool = True) -> float:
    """The defining sums behind G~+ / G~-, evaluated term by term.

    With ``envelope`` the f values are replaced by their exponential majorant,
    which is what the closed forms sum exactly.
    """
    r = c.r
    span = y - x
    if math.isinf(span):
        span = int(800 / math.log(r)) + 1
    j = np.arange(0, int(span) + 1)
    if math.isinf(y) and side == "+":
        raise PreconditionError("G+ direct sum needs a finite right end")
    if math.isinf(x) and side == "-":
        raise PreconditionError("G- direct sum needs a finite left end")
    u = (y + 0.5 - j - z) if side == "+" else (x - 0.5 + j - z)
    fv = f_envelope(u, c.q_eff) if envelope else _f(u, c)
    total = float(np.sum(np.asarray(fv) / r ** (2.0 * (j + 1))))
    if include_base:
        total += r ** (-2.0 * (y - x + 1)) / (1 + r * r)
    return total


def g_plus(x, y, z, c: DerivedConstants) -> float:
    """G+(x, y, z) with B(x, y)/B(x, y+1) >= 1 - G+."""
    cap = 1.0 / (c.r ** 2 + 1)
    if y <= x - 2:
        return 1.0  # B(x, y) = 0
    if not y > x:
        return cap
    return min(cap, _g_tilde_plus(x, y, z, c))


def g_minus(x, y, z, c: DerivedConstants) -> float:
    """G-(x, y, z) with B(x, y)/B(x-1, y) >= 1 - G-."""
    cap = 1.0 / (c.r ** 2 + 1)
    if y <= x - 2:
        return 1.0
    if not y > x:
        return cap
    return min(cap, _g_tilde_minus(x, y, z, c))


@dataclass(frozen=True)
class RatioBounds:
    right_lower: float
    left_lower: float
    upper: float = 1.0

    @property
    def g_plus(self) -> float:
        return 1.0 - self.right_lower

    @property
    def g_minus(self) -> float:
        return 1.0 - self.left_lower


def ratio_bounds(x, y, z, constants: DerivedConstants) -> RatioBounds:
    """Bounds on B(x,y)/B(x,y+1) and B(x,y)/B(x-1,y)."""
    x, y = as_int_site(x), as_int_site(y)
    if not x < y:
        raise PreconditionError("ratio bounds need x < y")
    return RatioBounds(1.0 - g_plus(x, y, z, constants), 1.0 - g_minus(x, y, z, constants))


# ---------------------------------------------------------------------------
# truncated normalization combination


def truncated_norm_combination(y, u, z, constants: DerivedConstants, tol: float = DEFAULT_TOL) -> float:
    """|B(y+1, u-1) B(-inf, inf) - B(-inf, u-1) B(y+1, inf)|."""
    y, u = as_int_site(y), as_int_site(u)
    mid = b_value(y + 1, u - 1, z, constants)
    full = b_limit(u, z, "both", constants, tol).value
    left = b_limit(u - 1, z, "left", constants, tol).value
    right = b_limit(y + 1, z, "right", constants, tol).value
    return abs(mid * full - left * right)


def _log1m(g: np.ndarray) -> np.ndarray:
    return np.log1p(-np.asarray(g))


def certified_truncated_bound(y, u_values: Iterable[int], z, constants: DerivedConstants,
                              tol: float = DEFAULT_TOL, v_extra: int = 400) -> np.ndarray:
    """Pointwise certified bound on ``truncated_norm_combination`` from the G+ ratios."""
    y = as_int_site(y)
    us = np.asarray(list(u_values), dtype=int)
    v_lo = int(us.min()) - 1
    v_hi = int(us.max()) + v_extra
    vs = np.arange(v_lo, v_hi + 1)
    g_inf = np.array([g_plus(-math.inf, int(v), z, constants) for v in vs])
    g_y = np.array([g_plus(y + 1, int(v), z, constants) for v in vs])
    # suffix sums over v >= u - 1
    s_inf = np.cumsum(_log1m(g_inf)[::-1])[::-1]
    s_y = np.cumsum(_log1m(g_y)[::-1])[::-1]
    full = b_limit(int(us.min()), z, "both", constants, tol)
    right = b_limit(y + 1, z, "right", constants, tol)
    pref = (full.value + full.error) * (right.value + right.error)
    idx = us - 1 - v_lo
    lo = -np.expm1(s_inf[idx])     # 1 - prod(1 - G)
    hi = np.expm1(-s_y[idx])       # prod 1/(1 - G) - 1
    return pref * np.maximum(lo, hi)


def truncated_norm_bound(y, u, z, constants: DerivedConstants, w: float | None = None, *,
                         span: int = 200, tol: float = DEFAULT_TOL) -> float:
    """C p^{-2(u - w)} with w = max(y, z).

    C is the largest value of (certified pointwise bound) * p^{2(u' - w)} over
    u' = w+1 .. w+span, so the returned envelope has exact decay ratio p^{-2}.
    """
    y, u = as_int_site(y), as_int_site(u)
    if z is None or math.isinf(z):
        return 0.0
    w = max(y, z) if w is None else w
    w_int = int(math.floor(w))
    us = np.arange(w_int + 1, w_int + 1 + span)
    us = us[us > y + 1]
    b = certified_truncated_bound(y, us, z, constants, tol)
    p = constants.p
    const = float(np.max(b * p ** (2.0 * (us - w))))
    return const * p ** (-2.0 * (u - w))
