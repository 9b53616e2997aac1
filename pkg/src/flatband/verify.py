"""Verification suites: analytic formulas against the oracles and the proven bounds.

Each suite returns a ``SuiteResult`` with the worst observed value of its
checked quantity next to the tolerance it must stay under.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .model import ModelParams, Site, derive_constants
from .normfunc import (
    a_closed_qunit, b_backward, b_differences, b_forward, b_limit, b_split, beta_upper, c_recursive,
    convergence_envelope, d_recursive, forward_A, g_minus, g_plus, log_prefactor,
)
from .observables import GroundState, density_bounds, electron_decay, fit_decay, truncated_correlation
from .oracle import operators as ops
from .oracle.analysis import ground_space_analysis
from .oracle.fock import DOWN, UP, SparseState, build_sector
from .oracle.gram import gram_determinant_A
from .oracle.hamiltonian import build_hamiltonian
from .oracle.states import construct_psi
from .oracle.symmetry import reflect, reflect_state

ED_MAX_L = 7

LAMBDAS = (0.6, 1.25, 2.0)
Q_ABS = (0.8, 1.2, 1.7)
THETAS = (0.0, 0.3, 1.1)
ZETAS = (0.3 * np.exp(0.2j), 1.0, 2.5)
ZS = (-3.3, 0.5, 2.0)
ED_POINTS = (
    dict(lam=1.25, q_abs=1.2, theta=0.0, zeta_abs=1.2 ** -0.5, zeta_phase=0.0),
    dict(lam=1.25, q_abs=1.2, theta=0.3, zeta_abs=0.5, zeta_phase=0.7),
    dict(lam=0.8, q_abs=0.7, theta=-1.1, zeta_abs=2.5, zeta_phase=0.2),
)
WALL_POINT = dict(lam=1.25, q_abs=1.2, theta=0.0, zeta_abs=1.2 ** -20, zeta_phase=0.0)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: worst={self.worst:.3e} tol={self.tolerance:.1e} ({self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        return asdict(self)


def _timed(fn):
    def wrapper(*args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _guard(Ls):
    for L in Ls:
        if L > ED_MAX_L:
            raise ValueError(f"ED suites are limited to L <= {ED_MAX_L}")


def param_grid(zeta=1.0) -> list[ModelParams]:
    z = complex(zeta)
    return [ModelParams(lam=lam, q_abs=q, theta=th, zeta_abs=abs(z), zeta_phase=float(np.angle(z)))
            for lam, q, th in itertools.product(LAMBDAS, Q_ABS, THETAS)]


# ---------------------------------------------------------------------------
# ED suites


@_timed
def suite_zero_energy(Ls=(3, 5), tol: float = 1e-10) -> SuiteResult:
    """||H Psi|| / ||Psi|| over the 27-point grid and three zeta values."""
    _guard(Ls)
    worst, n = 0.0, 0
    for L in Ls:
        sec = build_sector(L, L)
        for zeta in ZETAS:
            for p in param_grid(zeta):
                psi = construct_psi(p, L).to_vector(sec)
                H = build_hamiltonian(p, sec)
                worst = max(worst, np.linalg.norm(H @ psi.amps) / psi.norm())
                n += 1
    return SuiteResult("zero-energy ground state", worst <= tol, worst, tol, {"cases": n})


@_timed
def suite_ground_space(Ls=(3, 5), points=ED_POINTS) -> SuiteResult:
    """Kernel dimension 1 in every (N=L, M) sector, L+1 in total."""
    _guard(Ls)
    bad, reports = 0, []
    for L in Ls:
        for pt in points:
            rep = ground_space_analysis(ModelParams(**pt), L)
            ok = all(v == 1 for v in rep.kernel_dims.values()) and rep.total == L + 1
            bad += not ok
            reports.append({"L": L, "params": pt, "dims": rep.kernel_dims, "total": rep.total})
    return SuiteResult("ground-space degeneracy", bad == 0, float(bad), 0.0, {"reports": reports})


@_timed
def suite_observables_vs_ed(L: int = 5, points=ED_POINTS, tol: float = 1e-10) -> SuiteResult:
    """Every analytic observable against explicit expectation values in Psi."""
    _guard([L])
    worst = 0.0
    l = (L - 1) // 2
    for pt in points:
        p = ModelParams(**pt)
        gs = GroundState(p, L)
        psi = construct_psi(p, L)

        def ev(op):
            return ops.expectation(op, psi)
        for s in gs.lattice.sites:
            worst = max(worst, abs(ev(ops.density(s, L)) - gs.density(s)))
            for j in (1, 2, 3):
                worst = max(worst, abs(ev(ops.spin_op(s, j, L)) - gs.spin(s, j)))
        for x in range(-l, l + 1):
            for y in range(-l, l + 1):
                sx, sy = Site(2 * x), Site(2 * y)
                for a in (UP, DOWN):
                    for b in (UP, DOWN):
                        worst = max(worst, abs(ev(ops.hop(sx, a, sy, b, L)) - gs.electron_two_point(x, y, a, b)))
                if x == y:
                    continue
                worst = max(worst, abs(ev(ops.density(sx, L) @ ops.density(sy, L)) - gs.density_two_point(x, y)))
                for j in (1, 2, 3):
                    for k in (1, 2, 3):
                        e = ev(ops.spin_op(sx, j, L) @ ops.spin_op(sy, k, L))
                        worst = max(worst, abs(e - gs.spin_two_point(x, y, j, k)))
    return SuiteResult("observables vs ED", worst <= tol, worst, tol, {"L": L})


@_timed
def suite_symmetry(L: int = 3, tol: float = 1e-10) -> SuiteResult:
    """U(1) commutator, reflection covariance of H and its ground states, SU(2) at q = 1."""
    _guard([L])
    sec = build_sector(L, L)
    p = ModelParams(lam=1.25, q_abs=1.2, theta=0.3)
    H = build_hamiltonian(p, sec)
    S3 = ops.total_spin(3, L).matrix(sec)
    comm_u1 = abs(H @ S3 - S3 @ H).max()
    # reflection as a unitary on the full N = L sector, one basis state per column
    P = np.zeros((sec.dim, sec.dim), complex)
    for k, code in enumerate(sec.codes):
        s = reflect_state(SparseState(L, np.array([code]), np.ones(1, complex)))
        P[sec.positions(s.codes)[0], k] = s.amps[0]
    Hd = H.toarray()
    cov = abs(P @ Hd @ P.conj().T - Hd).max()
    s3_flip = abs(P @ S3.toarray() @ P.conj().T + S3.toarray()).max()
    # ground states of sector M are mapped to zero-energy states of sector -M
    worst_gs = 0.0
    for twoM in range(-L, L + 1, 2):
        sub = build_sector(L, L, twoM)
        w, v = np.linalg.eigh(build_hamiltonian(p, sub).toarray())
        g = SparseState(L, sub.codes.copy(), v[:, 0].astype(complex))
        rg = reflect_state(g)
        target = build_sector(L, L, -twoM)
        vec = rg.to_vector(target)
        worst_gs = max(worst_gs, np.linalg.norm(build_hamiltonian(p, target) @ vec.amps), abs(w[0]))
    # SU(2) at q = 1
    p1 = ModelParams(lam=1.25, q_abs=1.0, theta=0.0)
    H1 = build_hamiltonian(p1, sec)
    su2 = max(abs(H1 @ ops.total_spin(j, L).matrix(sec) - ops.total_spin(j, L).matrix(sec) @ H1).max()
              for j in (1, 2, 3))
    # negative control: q != 1 breaks the S1 commutator
    broken = abs(H @ ops.total_spin(1, L).matrix(sec) - ops.total_spin(1, L).matrix(sec) @ H).max()
    worst = max(comm_u1, cov, s3_flip, worst_gs, su2)
    ok = worst <= tol and broken > 1e-3
    return SuiteResult("symmetry", ok, float(worst), tol,
                       {"u1": float(comm_u1), "z2_cov": float(cov), "z2_s3": float(s3_flip),
                        "z2_ground_states": float(worst_gs), "su2": float(su2),
                        "su2_broken_for_q_ne_1": float(broken)})


# ---------------------------------------------------------------------------
# normalization-function suites


@_timed
def suite_recursion_vs_gram(max_len: int = 12, tol: float = 1e-11, perturb: float = 0.0) -> SuiteResult:
    """exp(log prefactor) * B against the Gram determinant on all windows up to ``max_len``."""
    worst, n = 0.0, 0
    for lam, q, z in itertools.product(LAMBDAS, (0.7, 1.2, 1.7), ZS):
        p = ModelParams(lam=lam, q_abs=q, theta=0.3, zeta_abs=q ** (-z))
        c = derive_constants(p)
        x0 = -6
        tab = b_forward(x0, x0 + max_len - 1, c.z, c, perturb=perturb)
        for y in range(x0, x0 + max_len):
            log_rec = log_prefactor(x0, y, p, c.r) + math.log(tab(y))
            log_gram = gram_determinant_A(x0, y, p)
            worst = max(worst, abs(math.expm1(log_rec - log_gram)))
            n += 1
    return SuiteResult("recursion vs Gram determinant", worst <= tol, worst, tol, {"cases": n})


@_timed
def suite_closed_form_qunit(max_len: int = 40, tol: float = 1e-12) -> SuiteResult:
    """Closed form at |q| = 1 against the unscaled and rescaled recursions."""
    worst = 0.0
    for lam, th, za in itertools.product(LAMBDAS, THETAS, (0.0, 0.5, 1.0, 2.0)):
        p = ModelParams(lam=lam, q_abs=1.0, theta=th, zeta_abs=za)
        c = derive_constants(p)
        tab = b_forward(0, max_len - 1, c.z, c)
        for y in range(-1, max_len):
            closed = a_closed_qunit(0, y, p, c)
            worst = max(worst, abs(tab(y) / closed.b_value - 1))
            if y < 25:
                worst = max(worst, abs(forward_A(0, y, p, c) / closed.value - 1))
    return SuiteResult("|q|=1 closed form vs recursion", worst <= tol, worst, tol)


def _bound_params():
    for lam, q, z in itertools.product(LAMBDAS, (0.7, 1.2, 1.7, 3.0), ZS):
        yield ModelParams(lam=lam, q_abs=q, zeta_abs=q ** (-z))


@_timed
def suite_bounds(span: int = 30) -> SuiteResult:
    """Monotonicity, ratio bounds, B <= C <= D, difference bound and |q| -> 1/|q| invariance."""
    viol = {"monotone": 0, "ratio_plus": 0, "ratio_minus": 0, "floor": 0, "sandwich": 0,
            "difference": 0, "inversion": 0, "density": 0}
    worst_inv = 0.0
    eps = 1e-13
    for p in _bound_params():
        c = derive_constants(p)
        z = c.z
        x0 = -span // 2
        tab = b_forward(x0, x0 + span, z, c)
        v = tab.values
        viol["monotone"] += int(np.sum(np.diff(v[1:]) < -eps))
        floor = c.r ** 2 / (1 + c.r ** 2)
        for y in range(x0 + 1, x0 + span):
            ratio = tab(y) / tab(y + 1)
            viol["ratio_plus"] += not (1 - g_plus(x0, y, z, c) - eps <= ratio <= 1 + eps)
            viol["floor"] += not ratio > floor - eps
        bt = b_backward(x0 - span, x0 + span // 2, z, c)
        for x in range(x0 - span + 1, x0 + span // 2):
            ratio = bt(x) / bt(x - 1)
            viol["ratio_minus"] += not (1 - g_minus(x, x0 + span // 2, z, c) - eps <= ratio <= 1 + eps)
            viol["floor"] += not ratio > floor - eps
        # sandwich with g = f(0), which dominates f everywhere
        g = c.f0
        ct = c_recursive(x0, x0 + span, z, g, c)
        d = d_recursive(span + 2, g, c)
        for k in range(1, len(v)):
            viol["sandwich"] += not (v[k] <= ct.values[k] * (1 + eps) and ct.values[k] <= d[k] * (1 + eps))
        viol["difference"] += int(np.sum(np.diff(ct.values[1:]) < np.diff(v[1:]) - eps))
        inv = derive_constants(p.with_(q_abs=1 / p.q_abs, zeta_abs=p.q_abs ** z))
        tinv = b_forward(x0, x0 + span, inv.z, inv)
        rel = np.max(np.abs(tinv.values[1:] / v[1:] - 1))
        worst_inv = max(worst_inv, rel)
        viol["inversion"] += rel > 1e-12
        gs = GroundState(p, 21)
        for s in gs.lattice.sites:
            lo, hi = density_bounds(gs, s)
            viol["density"] += not (lo - eps <= gs.density(s) <= hi + eps)
    total = sum(viol.values())
    return SuiteResult("bound suites", total == 0, float(total), 0.0,
                       {"violations": viol, "inversion_worst": worst_inv})


@_timed
def suite_convergence(tol_limit: float = 1e-10) -> SuiteResult:
    """beta < 1, B differences under the envelope at every step, certified limits."""
    bad = 0
    worst_err = 0.0
    worst_beta = 0.0
    for lam, q in itertools.product(LAMBDAS, (1.1, 1.2, 1.7, 3.0, 0.8)):
        for z in ZS:
            p = ModelParams(lam=lam, q_abs=q, zeta_abs=q ** (-z))
            c = derive_constants(p)
            for x in (-8, 0, 3):
                env = convergence_envelope(x, c.z, c)
                worst_beta = max(worst_beta, env.beta)
                bad += not env.beta < 1
                bad += not env.beta <= beta_upper(q) + 1e-15
                diffs = b_differences(x, x + 80, c.z, c)
                m = np.arange(len(diffs))
                bad += int(np.sum(diffs > env.bound(m) * (1 + 1e-12)))
                for direction in ("right", "left", "both"):
                    res = b_limit(x, c.z, direction, c, tol=1e-14)
                    worst_err = max(worst_err, res.error)
    ok = bad == 0 and worst_err < tol_limit
    return SuiteResult("convergence envelope", ok, worst_err, tol_limit,
                       {"violations": bad, "max_beta": worst_beta})


# ---------------------------------------------------------------------------
# large-L and limit-mode suites


@_timed
def suite_domain_wall(rel: float = 0.01, width_rel: float = 0.10) -> SuiteResult:
    """Density plateaus, S3 sign change and wall width for the L = 101 domain wall."""
    p = ModelParams(**WALL_POINT)
    gs = GroundState(p, 101)
    c = gs.c
    prof = gs.one_point_profile()
    e = prof.entries
    n_int = e[Site(0)]["n"]
    n_half = e[Site(1)]["n"]
    dev_int = abs(n_int / c.plateau_integer - 1)
    dev_half = abs(n_half / c.plateau_half - 1)
    sign_ok = e[Site(39)]["S3"] > 0 > e[Site(41)]["S3"]
    lengths = []
    for side in (-1, 1):
        d = np.arange(3, 26)
        xs = 20 + side * d
        vals = [e[Site(2 * int(x))]["n"] / 2 - abs(e[Site(2 * int(x))]["S3"]) for x in xs]
        lengths.append(fit_decay(d, vals).length)
    width = sum(lengths)
    dev_width = abs(width * math.log(1.2) - 1)
    ok = dev_int <= rel and dev_half <= rel and sign_ok and dev_width <= width_rel
    return SuiteResult("domain wall at L=101", ok, max(dev_int, dev_half), rel,
                       {"n_integer": n_int, "n_half": n_half, "plateau_integer": c.plateau_integer,
                        "plateau_half": c.plateau_half, "S3_19.5": e[Site(39)]["S3"],
                        "S3_20.5": e[Site(41)]["S3"], "width": width, "width_ref": 1 / math.log(1.2),
                        "width_rel_dev": dev_width})


CLUSTER_POINTS = (
    dict(lam=1.25, q_abs=1.2, zeta_abs=1.2 ** -20),
    dict(lam=1.25, q_abs=1.2, zeta_abs=1.0),
    dict(lam=0.6, q_abs=1.7, zeta_abs=1.0),
    dict(lam=2.0, q_abs=1.5, zeta_abs=1.5 ** -3),
)


@_timed
def suite_cluster(rate_rel: float = 0.02) -> SuiteResult:
    """Truncated correlations decay no slower than 1/(2 log p); electron rate log r."""
    worst_len, worst_rate, bad = 0.0, 0.0, 0
    details = []
    for pt in CLUSTER_POINTS:
        p = ModelParams(**pt)
        gs = GroundState(p, None)
        c = gs.c
        bound = 1.1 / (2 * math.log(c.p))
        for x0 in (int(round(c.z)) - 20, int(round(c.z)) + 6):
            for kind in ("density", "spin33"):
                _, fit = truncated_correlation(gs, x0, range(1, 41), kind)
                worst_len = max(worst_len, fit.length / bound)
                bad += fit.length > bound
                far = abs(gs.density_two_point(x0, x0 + 40) - gs.density(x0) * gs.density(x0 + 40))
                bad += far >= 1e-8
        # electron correlations inside the majority-up domain, away from the wall
        x0 = int(round(c.z)) - 40
        fit = electron_decay(gs, x0, range(5, 26), "up", "up")
        dev = abs(fit.rate / math.log(c.r) - 1)
        worst_rate = max(worst_rate, dev)
        bad += dev > rate_rel
        details.append({"params": pt, "electron_rate_rel_dev": dev})
    return SuiteResult("cluster property", bad == 0, worst_len, 1.0,
                       {"worst_rate_rel_dev": worst_rate, "points": details})


@_timed
def suite_sum_rule(tol: float = 1e-8, tol_spin: float = 1e-12) -> SuiteResult:
    worst_sum, worst_spin = 0.0, 0.0
    for L in (5, 101):
        for pt in ED_POINTS + (WALL_POINT,):
            gs = GroundState(ModelParams(**pt), L)
            prof = gs.one_point_profile()
            total = sum(v["n"] for v in prof.entries.values())
            worst_sum = max(worst_sum, abs(total - L))
            for v in prof.entries.values():
                worst_spin = max(worst_spin, abs(v["S1"] ** 2 + v["S2"] ** 2 + v["S3"] ** 2 - (v["n"] / 2) ** 2))
    ok = worst_sum <= tol and worst_spin <= tol_spin
    return SuiteResult("sum rule and spin length", ok, worst_sum, tol, {"spin_length_worst": worst_spin})


ALL_SUITES = {
    "zero_energy": suite_zero_energy,
    "ground_space": suite_ground_space,
    "recursion": suite_recursion_vs_gram,
    "closed_form": suite_closed_form_qunit,
    "bounds": suite_bounds,
    "convergence": suite_convergence,
    "domain_wall": suite_domain_wall,
    "observables": suite_observables_vs_ed,
    "cluster": suite_cluster,
    "sum_rule": suite_sum_rule,
    "symmetry": suite_symmetry,
}


def run_suites(names=None, *, perturb: float = 0.0, Ls=(3, 5), unit_q: bool = False) -> list[SuiteResult]:
    """Run the named suites (all by default).

    With ``unit_q`` the |q| = 1 closed-form suite replaces the rescaled
    recursion suite.  ``perturb`` injects a relative error into the leading
    recursion coefficient, which the recursion suite must detect.
    """
    names = list(ALL_SUITES) if names is None else list(names)
    if unit_q:
        names = [n for n in names if n != "recursion"]
        if "closed_form" not in names:
            names.append("closed_form")
    out = []
    for n in names:
        fn = ALL_SUITES[n]
        if n == "recursion":
            out.append(fn(perturb=perturb))
        elif n in ("zero_energy", "ground_space"):
            out.append(fn(Ls=Ls))
        else:
            out.append(fn())
    return out
