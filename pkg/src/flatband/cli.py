"""Command-line front end: ``flatband profile|correlation|verify|sweep|limits``.

Exit status: 0 on success, 1 when a verification suite reports a violation,
2 on usage or parameter errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .model import ModelParams, ParameterError, Site, derive_constants, params_from_mapping, read_config
from .normfunc import DEFAULT_TOL, b_limit, convergence_envelope
from .observables import GroundState, UnsupportedAnalyticForm, electron_decay, truncated_correlation

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
DEFAULT_L = 101


class UsageError(Exception):
    pass


def fmt(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def write_table(rows: list[dict], out: str | None, fmt_name: str) -> None:
    if fmt_name == "json":
        text = json.dumps(rows, indent=1) + "\n"
    else:
        buf = io.StringIO()
        if rows:
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(list(rows[0]))
            for r in rows:
                w.writerow([fmt(v) for v in r.values()])
        text = buf.getvalue()
    _emit(text, out)


def write_json(obj, out: str | None) -> None:
    _emit(json.dumps(obj, indent=1, sort_keys=True) + "\n", out)


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _sidecar(out: str | None, suffix: str) -> str | None:
    if out is None or out == "-":
        return None
    p = Path(out)
    return str(p.with_name(p.stem + suffix))


# ---------------------------------------------------------------------------
# configuration


def _window(text: str | None):
    if text is None:
        return None
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError as exc:
        raise UsageError(f"--window expects A:B, got {text!r}") from exc


def resolve(args) -> tuple[ModelParams, int | None, dict]:
    """Merge defaults < config file < flags into parameters and the run mode."""
    values: dict = {}
    if args.config:
        try:
            values.update(read_config(args.config))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    for flag, key in (("lam", "lambda"), ("q_abs", "q_abs"), ("theta", "theta"),
                      ("zeta_abs", "zeta_abs"), ("zeta_phase", "zeta_phase"), ("L", "L"),
                      ("t", "t"), ("U", "U")):
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = v
    params = params_from_mapping(values)
    L = int(values.get("L", DEFAULT_L))
    mode = getattr(args, "mode", "finite")
    return params, (None if mode == "limit" else L), values


# ---------------------------------------------------------------------------
# commands


def cmd_profile(args) -> int:
    params, L, _ = resolve(args)
    gs = GroundState(params, L, args.tol)
    window = _window(args.window)
    if gs.limit_mode and window is None:
        raise UsageError("--mode limit needs --window A:B")
    c = gs.c
    rows, prev_angle = [], {}
    for s in gs.sites(window):
        n = gs.density(s)
        s1, s2, s3 = gs.spin(s, 1), gs.spin(s, 2), gs.spin(s, 3)
        angle = math.atan2(s2, s1) if (s1 or s2) else float("nan")
        prev = prev_angle.get(s.half_units - 2)
        pitch = float("nan")
        if prev is not None and not math.isnan(angle) and not math.isnan(prev):
            pitch = (angle - prev + math.pi) % (2 * math.pi) - math.pi
        prev_angle[s.half_units] = angle
        rows.append({
            "site2x": s.half_units, "x": s.x, "sublattice": "o" if s.is_integer else "prime",
            "n": n, "S1": s1, "S2": s2, "S3": s3,
            "n_asymp": c.plateau_integer if s.is_integer else c.plateau_half,
            "spin_angle": angle, "pitch": pitch, "source": "analytic",
        })
    write_table(rows, args.out, args.format)
    if args.plot:
        from . import plotting
        plotting.profile_figure(rows, _require_plot_path(args.out, "_profile.png"))
    return EXIT_OK


def _require_plot_path(out, suffix):
    path = _sidecar(out, suffix)
    if path is None:
        raise UsageError("--plot needs --out PATH so figures can be written next to it")
    return path


def _parse_pairs(items) -> list[tuple[float, float]]:
    out = []
    for it in items or []:
        try:
            a, b = it.split(",")
            out.append((float(a), float(b)))
        except ValueError as exc:
            raise UsageError(f"--pair expects X,Y, got {it!r}") from exc
    return out


def cmd_correlation(args) -> int:
    params, L, _ = resolve(args)
    gs = GroundState(params, L, args.tol)
    c = gs.c
    pairs = _parse_pairs(args.pair)
    no_wall = c.z is None or math.isinf(c.z)
    x0 = args.x0
    if x0 is None:
        # reference deep in the majority-spin domain, where the electron rate is log r
        x0 = 0 if no_wall else int(round(c.z)) - 40
        if not gs.limit_mode:
            x0 = max(x0, -gs.l)
    window = _window(args.window) or (1, 30)
    seps = [d for d in range(int(window[0]), int(window[1]) + 1)
            if d > 0 and (gs.limit_mode or x0 + d <= gs.l)]
    if not pairs:
        pairs = [(x0, x0 + d) for d in seps]
    rows = []
    for x, y in pairs:
        sx, sy = Site.from_coord(x), Site.from_coord(y)
        if sx == sy:
            raise UsageError(f"coincident sites x = y = {sx.x:g}; use `flatband profile` for "
                             "on-site quantities")
        try:
            e = gs.electron_two_point(sx, sy, "up", "up")
            nn = gs.density_two_point(sx, sy)
            ss = gs.spin_two_point(sx, sy, 3, 3)
        except UnsupportedAnalyticForm as exc:
            raise UsageError(f"pair ({sx.x:g}, {sy.x:g}): {exc}") from exc
        rows.append({
            "site2x": sx.half_units, "site2y": sy.half_units, "x": sx.x, "y": sy.x,
            "cdc_up_re": e.real, "cdc_up_im": e.imag, "nn": nn,
            "nn_truncated": nn - gs.density(sx) * gs.density(sy),
            "s3s3": ss, "s3s3_truncated": ss - gs.spin(sx, 3) * gs.spin(sy, 3), "source": "analytic",
        })
    write_table(rows, args.out, args.format)
    fits = {}
    try:
        ef = electron_decay(gs, x0, seps)
        fits["electron_up_up"] = json.loads(ef.to_json()) | {"reference_rate": math.log(c.r)}
        for kind in ("density", "spin33"):
            _, f = truncated_correlation(gs, x0, seps, kind)
            fits[f"truncated_{kind}"] = json.loads(f.to_json()) | {"bound_length": 1 / (2 * math.log(c.p))}
    except ValueError as exc:
        fits["error"] = str(exc)
    fit_path = _sidecar(args.out, "_fits.json")
    if fit_path is not None:
        write_json(fits, fit_path)
    else:
        sys.stderr.write(json.dumps(fits, sort_keys=True) + "\n")
    if args.plot:
        from . import plotting
        plotting.correlation_figure(rows, _require_plot_path(args.out, "_correlation.png"))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import ED_MAX_L, run_suites
    params, _, values = resolve(args)
    Ls = (3, 5) if "L" not in values else (int(values["L"]),)
    if any(L > ED_MAX_L for L in Ls):
        raise UsageError(f"verify runs exact diagonalization; L must be <= {ED_MAX_L}")
    names = args.suite or None
    results = run_suites(names, perturb=args.inject_fault, Ls=Ls, unit_q=params.q_abs == 1.0)
    for r in results:
        sys.stderr.write(r.line() + "\n")
    ok = all(r.passed for r in results)
    report = {"passed": ok, "suites": [_jsonable(r.to_dict()) for r in results]}
    if args.out:
        write_json(report, args.out)
    failed = [r.name for r in results if not r.passed]
    if failed:
        sys.stderr.write("violated: " + ", ".join(failed) + "\n")
    return EXIT_OK if ok else EXIT_VIOLATION


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    return obj


SWEEP_KEYS = {"lambda", "q_abs", "theta", "z", "zeta_abs"}


def _parse_grid(items) -> dict[str, list[float]]:
    grid = {}
    for it in items or []:
        key, _, vals = it.partition("=")
        if key not in SWEEP_KEYS or not vals:
            raise UsageError(f"--grid expects KEY=a,b,c with KEY in {sorted(SWEEP_KEYS)}, got {it!r}")
        try:
            grid[key] = [float(v) for v in vals.split(",")]
        except ValueError as exc:
            raise UsageError(f"bad grid values in {it!r}") from exc
    if not grid:
        raise UsageError("sweep needs at least one --grid KEY=a,b,c")
    return grid


def sweep_point(point: dict) -> dict:
    """Summary of one parameter point in limit mode."""
    p = ModelParams(lam=point["lambda"], q_abs=point["q_abs"], theta=point["theta"],
                    zeta_abs=point["zeta_abs"])
    gs = GroundState(p, None)
    c = gs.c
    z = c.z if c.z is not None and not math.isinf(c.z) else 0.0
    far = int(round(z)) - 60
    row = dict(point)
    row.update({
        "z": c.z + 0.0 if c.z is not None else float("nan"),
        "epsilon": c.epsilon, "r": c.r, "p": c.p,
        "plateau_integer": c.plateau_integer, "plateau_half": c.plateau_half,
        "n_integer_far": gs.density(far), "n_half_far": gs.density(far + 0.5),
        "wall_width": 1 / abs(math.log(c.q_abs)) if c.q_abs != 1 else float("inf"),
        "electron_rate_ref": math.log(c.r),
    })
    try:
        row["electron_rate"] = electron_decay(gs, far, range(5, 26)).rate
    except ValueError:
        row["electron_rate"] = float("nan")
    try:
        _, f = truncated_correlation(gs, int(round(z)) + 6, range(1, 41), "density")
        row["density_decay_length"] = f.length
    except ValueError:
        row["density_decay_length"] = float("nan")
    row["density_length_bound"] = 1 / (2 * math.log(c.p))
    return row


def _threads() -> int:
    raw = os.environ.get("FLATBAND_THREADS")
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise UsageError("FLATBAND_THREADS must be a positive integer") from exc


def cmd_sweep(args) -> int:
    params, _, _ = resolve(args)
    grid = _parse_grid(args.grid)
    base = {"lambda": params.lam, "q_abs": params.q_abs, "theta": params.theta}
    keys = list(grid)
    points = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        pt = dict(base)
        pt.update(zip(keys, combo))
        if "z" in pt:
            pt["zeta_abs"] = pt["q_abs"] ** (-pt.pop("z"))
        pt.setdefault("zeta_abs", params.zeta_abs)
        ModelParams(lam=pt["lambda"], q_abs=pt["q_abs"], theta=pt["theta"], zeta_abs=pt["zeta_abs"])
        derive_constants(ModelParams(lam=pt["lambda"], q_abs=pt["q_abs"]))
        points.append({k: pt[k] for k in ("lambda", "q_abs", "theta", "zeta_abs")})
    n = _threads()
    if n == 1 or len(points) == 1:
        rows = [sweep_point(pt) for pt in points]
    else:
        with ProcessPoolExecutor(max_workers=min(n, len(points))) as ex:
            rows = list(ex.map(sweep_point, points))
    write_table(rows, args.out, args.format)
    if args.plot:
        from . import plotting
        plotting.sweep_figure(rows, _require_plot_path(args.out, "_sweep.png"))
    return EXIT_OK


def cmd_limits(args) -> int:
    params, _, _ = resolve(args)
    c = derive_constants(params)
    window = _window(args.window) or (-5, 5)
    rows = []
    for x in range(int(window[0]), int(window[1]) + 1):
        row = {"x": x}
        for direction in ("left", "right", "both"):
            res = b_limit(x, c.z, direction, c, args.tol)
            row[f"B_{direction}"] = res.value
            row[f"err_{direction}"] = res.error
            row[f"steps_{direction}"] = res.steps
        if not c.unit_q and c.z is not None and not math.isinf(c.z):
            env = convergence_envelope(x, c.z, c)
            row.update({"beta": env.beta, "K1": env.K1, "K2": env.K2, "K3": env.K3})
        rows.append(row)
    write_table(rows, args.out, args.format)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value parameter file")
    common.add_argument("--L", type=int, help="chain length (odd, >= 3)")
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--q-abs", dest="q_abs", type=float)
    common.add_argument("--theta", type=float, help="arg q in radians")
    common.add_argument("--zeta-abs", dest="zeta_abs", type=float)
    common.add_argument("--zeta-phase", dest="zeta_phase", type=float)
    common.add_argument("--mode", choices=("finite", "limit"), default="finite")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--out", help="output file (stdout if omitted)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--window", help="site or separation range A:B")
    common.add_argument("--plot", action="store_true", help="also render a PNG next to --out (needs matplotlib)")

    ap = argparse.ArgumentParser(prog="flatband", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("profile", parents=[common], help="density and spin one-point profiles")
    pc = sub.add_parser("correlation", parents=[common], help="two-point functions and decay fits")
    pc.add_argument("--x0", type=int, help="reference site for separation scans")
    pc.add_argument("--pair", action="append", help="explicit site pair X,Y (repeatable)")
    pv = sub.add_parser("verify", parents=[common], help="run the verification suites")
    pv.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    pv.add_argument("--inject-fault", type=float, default=0.0, metavar="EPS",
                    help="perturb the leading recursion coefficient by a relative EPS")
    ps = sub.add_parser("sweep", parents=[common], help="per-point summaries over a parameter grid")
    ps.add_argument("--grid", action="append", help="KEY=a,b,c (repeatable)")
    sub.add_parser("limits", parents=[common], help="certified infinite-window limits of B")
    return ap


COMMANDS = {"profile": cmd_profile, "correlation": cmd_correlation, "verify": cmd_verify,
            "sweep": cmd_sweep, "limits": cmd_limits}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "verify" and args.suite:
        from .verify import ALL_SUITES
        unknown = [s for s in args.suite if s not in ALL_SUITES]
        if unknown:
            ap.error(f"unknown suite(s) {unknown}; choose from {sorted(ALL_SUITES)}")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError) as exc:
        sys.stderr.write(f"flatband: error: {exc}\n")
        return EXIT_USAGE
    except ImportError as exc:
        sys.stderr.write(f"flatband: error: {exc} (install the 'plot' extra for --plot)\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
