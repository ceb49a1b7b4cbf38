"""Command line front end: ``expray <command> [--config FILE] [options]``.

Exit status is 2 for configuration errors, 1 when a verification fails or a
point cannot be evaluated, 0 otherwise.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .algebra import Poly, ProblemSpec, RationalFn, Tolerances, is_canonical, normalize
from .asymptotics import expand
from .logscale import TWO_PI, fmt17
from .paths import ray_point
from .reroute import (
    NearFieldError,
    PreconditionError,
    RerouteLedger,
    UnresolvedError,
    build_ledger,
    direct_solution,
    eval_H,
    identity_integrals,
    solution_from_H,
)
from . import verify as V


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    spec: ProblemSpec
    theta: float
    omega: float = 1.0
    epsilon: float = 0.1
    k_max: int = 20
    x_max: float | None = None
    tol: Tolerances = field(default_factory=Tolerances)
    out_dir: Path | None = None
    formats: tuple[str, ...] = ("csv",)


def _complex(val: Any, where: str) -> complex:
    if isinstance(val, bool):
        raise ConfigError(f"{where}: expected a number or [re, im], got {val!r}")
    if isinstance(val, (int, float)):
        return complex(val)
    if isinstance(val, list) and len(val) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val):
        return complex(val[0], val[1])
    raise ConfigError(f"{where}: expected a number or [re, im], got {val!r}")


def _coeffs(val: Any, where: str) -> list[complex]:
    if not isinstance(val, list) or not val:
        raise ConfigError(f"{where}: expected a non-empty list of ascending coefficients")
    return [_complex(v, f"{where}[{i}]") for i, v in enumerate(val)]


def _number(tbl: dict, key: str, where: str, default, kind=float):
    if key not in tbl:
        return default
    v = tbl[key]
    if kind is bool:
        if not isinstance(v, bool):
            raise ConfigError(f"{where}.{key}: expected true/false, got {v!r}")
        return v
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    if kind is int and not isinstance(v, int):
        raise ConfigError(f"{where}.{key}: expected an integer, got {v!r}")
    return kind(v)


_KNOWN = {
    "problem": {"P", "S_num", "S_den", "z0", "c", "pole_radius"},
    "geometry": {"theta", "omega", "epsilon", "k_max", "x_max"},
    "tolerances": {"trace_tol", "quad_tol", "high_accuracy"},
    "output": {"directory", "formats"},
}


def _cfmt(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.12g}" if z.imag == 0 else f"{z.real:.12g}{z.imag:+.12g}j"


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{source}: {e}") from None
    for sec, val in data.items():
        if sec not in _KNOWN:
            raise ConfigError(f"{source}: unknown table [{sec}]")
        if not isinstance(val, dict):
            raise ConfigError(f"{source}: [{sec}] must be a table")
        for key in val:
            if key not in _KNOWN[sec]:
                raise ConfigError(f"{source}: unknown field {sec}.{key}")
    prob = data.get("problem")
    if prob is None:
        raise ConfigError(f"{source}: missing [problem] table")
    if "P" not in prob or "S_num" not in prob:
        raise ConfigError(f"{source}: [problem] needs P and S_num")
    P = Poly(_coeffs(prob["P"], "problem.P"))
    if P.degree < 1:
        raise ConfigError("problem.P: degree must be at least 1")
    if not is_canonical(P):
        _, a, b = normalize(P)
        raise ConfigError(
            f"problem.P: must be monic with no z^{P.degree - 1} term; substitute z = alpha w + beta with "
            f"alpha = {_cfmt(a)}, beta = {_cfmt(b)} (and scale S by alpha)"
        )
    S = RationalFn(Poly(_coeffs(prob["S_num"], "problem.S_num")), Poly(_coeffs(prob.get("S_den", [1]), "problem.S_den")))
    z0 = _complex(prob.get("z0", 0), "problem.z0")
    c = _complex(prob.get("c", 0), "problem.c")
    pr = _number(prob, "pole_radius", "problem", 0.0)
    geo = data.get("geometry", {})
    tt = data.get("tolerances", {})
    tol = Tolerances(
        _number(tt, "trace_tol", "tolerances", 1e-10),
        _number(tt, "quad_tol", "tolerances", 1e-13),
        _number(tt, "high_accuracy", "tolerances", False, bool),
    )
    n = P.degree
    theta = _number(geo, "theta", "geometry", math.pi / (4 * n))
    try:
        spec = ProblemSpec(P, S, z0, c, pr, theta, tol)
    except ValueError as e:
        raise ConfigError(f"{source}: {e}") from None
    x_max = _number(geo, "x_max", "geometry", None)
    out = data.get("output", {})
    fmts = out.get("formats", ["csv"])
    if not isinstance(fmts, list) or not all(isinstance(f, str) for f in fmts):
        raise ConfigError("output.formats: expected a list of strings")
    d = out.get("directory")
    if d is not None and not isinstance(d, str):
        raise ConfigError("output.directory: expected a string")
    cfg = RunConfig(
        spec,
        theta,
        _number(geo, "omega", "geometry", 1.0),
        _number(geo, "epsilon", "geometry", 0.1),
        _number(geo, "k_max", "geometry", 20, int),
        x_max,
        tol,
        Path(d) if d else None,
        tuple(fmts),
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    hi = math.pi / (2 * cfg.spec.n)
    if not 0 < cfg.theta < hi:
        raise ConfigError(f"theta = {cfg.theta!r} outside the valid interval (0, pi/(2n)) = (0, {hi!r})")
    if not cfg.omega > 0:
        raise ConfigError(f"omega must be positive, got {cfg.omega!r}")
    if not 0 < cfg.epsilon < math.pi / 4:
        raise ConfigError(f"epsilon must lie in (0, pi/4), got {cfg.epsilon!r}")
    if cfg.k_max < 1:
        raise ConfigError(f"k_max must be at least 1, got {cfg.k_max}")


def load_config(path: str | os.PathLike) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {p}: {e.strerror}") from None
    return parse_config(text, str(p))


def default_config() -> RunConfig:
    spec = V.family("ez")
    return RunConfig(spec, spec.theta)


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.theta is not None:
        cfg.theta = args.theta
    if args.omega is not None:
        cfg.omega = args.omega
    if args.epsilon is not None:
        cfg.epsilon = args.epsilon
    if args.kmax is not None:
        cfg.k_max = args.kmax
    if args.out is not None:
        cfg.out_dir = Path(args.out)
    if args.high_accuracy:
        cfg.tol = Tolerances(cfg.tol.trace_tol, cfg.tol.quad_tol, True)
    _validate(cfg)
    cfg.spec = ProblemSpec(cfg.spec.P, cfg.spec.S, cfg.spec.z0, cfg.spec.c, cfg.spec.pole_radius, cfg.theta, cfg.tol)
    return cfg


def workers() -> int:
    v = os.environ.get("EXPRAY_THREADS")
    if v is None:
        return min(4, os.cpu_count() or 1)
    try:
        return max(1, int(v))
    except ValueError:
        raise ConfigError(f"EXPRAY_THREADS must be an integer, got {v!r}") from None


def _ledger(cfg: RunConfig, x_query: float = math.inf) -> RerouteLedger:
    return build_ledger(cfg.spec, None, cfg.theta, cfg.omega, cfg.epsilon, cfg.k_max, x_query)


def _emit(cfg: RunConfig, name: str, text: str, out) -> None:
    if cfg.out_dir is None:
        out.write(text)
        return
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    (cfg.out_dir / name).write_text(text)
    print(f"wrote {cfg.out_dir / name}", file=out)


# -- commands -----------------------------------------------------------------

def cmd_expand(cfg: RunConfig, args, out) -> int:
    exp = expand(cfg.spec)
    print(exp.describe(), file=out)
    return 0


def cmd_trace(cfg: RunConfig, args, out) -> int:
    L = _ledger(cfg)
    files = [("omega.csv", L.omega_path.to_csv())]
    files += [(f"level_{k}.csv", L.level_paths[k].to_csv()) for k in sorted(L.level_paths)]
    files.append(("ray.csv", L.windows.ray.to_csv()))
    if cfg.out_dir is None:
        for name, text in files:
            out.write(f"# {name}\n{text}")
    else:
        for name, text in files:
            _emit(cfg, name, text, out)
    return 0


def _ray_z(cfg: RunConfig, x: float) -> complex:
    return complex(x, x * math.tan(cfg.theta))


def _parse_z(s: str) -> complex:
    try:
        return complex(s.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"--z: cannot parse {s!r} as a complex number (use e.g. 3+4j)") from None


def _eval_point(L: RerouteLedger, z: complex, c: complex):
    try:
        h = eval_H(L, z=z)
    except UnresolvedError as e:
        return None, None, f"unresolved: {e}"
    except NearFieldError:
        # left of or below L_0: the ledger does not cover z, use chords from z0
        return None, direct_solution(L.fld, z, c), "direct"
    except PreconditionError as e:
        return None, None, f"not covered: {e}"
    except ArithmeticError as e:
        # e^{x^n} itself overflows a double
        return None, None, f"out of range: {e}"
    return h, solution_from_H(L, h, c), h.regime


def cmd_eval(cfg: RunConfig, args, out) -> int:
    pts = [_ray_z(cfg, x) for x in args.x or []] + [_parse_z(s) for s in args.z or []]
    if not pts:
        raise ConfigError("eval needs at least one --x or --z")
    xq = max(p.real for p in pts)
    L = _ledger(cfg, xq)
    status = 0
    for z in pts:
        h, f, note = _eval_point(L, z, cfg.spec.c)
        if f is None:
            print(f"z = {z.real:.17g}{z.imag:+.17g}j  {note}", file=out)
            status = 1
            continue
        where = f"K = {h.K}, zeta = {h.dv:.17g}, regime {note}" if h is not None else note
        print(f"z = {z.real:.17g}{z.imag:+.17g}j  lmag = {f.lmag:.17g}  arg = {f.arg:.17g}  ({where})", file=out)
    return status


SWEEP_COLUMNS = ["x", "y", "k", "zeta", "lmag_H", "arg_H", "lmag_f", "arg_f", "regime"]


def sweep_rows(cfg: RunConfig, L: RerouteLedger, per_window: int = 9) -> list[list[str]]:
    """Points spread over each window and anti-window along the ray, in ray order."""
    v_pts = []
    for k in range(1, cfg.k_max + 1):
        for j in range(2 * per_window):
            v_pts.append(TWO_PI * k - math.pi / 2 + math.pi * j / per_window)
    ray = L.windows.ray
    v_top = ray.frames[-1].v

    def one(v: float) -> list[str]:
        if v > v_top:
            return []
        fr = ray_point(L.fld, None, cfg.theta, v, ray)
        h, f, note = _eval_point(L, fr.z, cfg.spec.c)
        if f is None:
            regime = note.split(":")[0]
            return [fmt17(fr.x), fmt17(fr.y), "", "", "", "", "", "", regime]
        if h is None:
            return [fmt17(fr.x), fmt17(fr.y), "", "", "", "", fmt17(f.lmag), fmt17(f.arg), note]
        return [fmt17(fr.x), fmt17(fr.y), str(h.K), fmt17(h.dv), fmt17(h.H.lmag), fmt17(h.H.arg),
                fmt17(f.lmag), fmt17(f.arg), h.regime]

    nw = workers()
    if nw > 1:
        with ThreadPoolExecutor(nw) as pool:
            rows = list(pool.map(one, v_pts))
    else:
        rows = [one(v) for v in v_pts]
    return [r for r in rows if r]


def cmd_sweep(cfg: RunConfig, args, out) -> int:
    L = _ledger(cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    w.writerows(sweep_rows(cfg, L, args.per_window))
    _emit(cfg, "sweep.csv", buf.getvalue(), out)
    return 0


def cmd_ledger(cfg: RunConfig, args, out) -> int:
    L = _ledger(cfg)
    _emit(cfg, "ledger.csv", L.to_csv(), out)
    return 0


def cmd_verify(cfg: RunConfig, args, out) -> int:
    claim = args.claim
    if claim == "identities":
        omegas = [cfg.omega] if args.omega is not None else [0.5, 1.0, 2.0, 5.0]
        ok = True
        for w in omegas:
            a, b = identity_integrals(w, high_accuracy=True)
            print(f"omega = {w:g}", file=out)
            print(f"identity cos: {a:.9f} (target 1)", file=out)
            # avoid printing a negative zero
            print(f"identity sin: {b + 0.0 if abs(b) >= 5e-10 else 0.0:.9f} (target 0)", file=out)
            ok &= abs(a - 1) <= 1e-9 and abs(b) <= 1e-9
        return 0 if ok else 1
    claims = ["all"] if claim == "all" else [claim]
    reports = V.verify(claims, workers=workers(), k_max=cfg.k_max, epsilon=cfg.epsilon, omega=cfg.omega)
    for r in reports:
        print(r.summary(), file=out)
    if cfg.out_dir is not None:
        _emit(cfg, "verify.csv", V.reports_csv(reports), out)
    ok = all(r.passed for r in reports)
    print("verification passed" if ok else "verification FAILED", file=out)
    return 0 if ok else 1


COMMANDS = {
    "expand": cmd_expand,
    "trace": cmd_trace,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "ledger": cmd_ledger,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML run configuration")
    common.add_argument("--theta", type=float, help="ray angle in (0, pi/(2n))")
    common.add_argument("--omega", type=float, help="level |U| = omega of the base curve")
    common.add_argument("--epsilon", type=float, help="window shrink in (0, pi/4)")
    common.add_argument("--kmax", type=int, help="number of level curves L_1..L_kmax")
    common.add_argument("--out", metavar="DIR", help="write CSV files here instead of stdout")
    common.add_argument("--high-accuracy", action="store_true", help="compensated summation everywhere")
    p = argparse.ArgumentParser(prog="expray", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("expand", parents=[common], help="print the asymptotic expansion of the field")
    sub.add_parser("trace", parents=[common], help="emit |U| = omega, level-curve and ray CSVs")
    pe = sub.add_parser("eval", parents=[common], help="evaluate f at points")
    pe.add_argument("--x", type=float, action="append", help="point on the ray with this real part")
    pe.add_argument("--z", action="append", help="complex point, e.g. 3+4j")
    ps = sub.add_parser("sweep", parents=[common], help="f and H along the ray across the windows")
    ps.add_argument("--per-window", type=int, default=9, help="samples per half period (default 9)")
    pv = sub.add_parser("verify", parents=[common], help="run verification reports")
    pv.add_argument("claim", choices=["thm1", "thm2", "upper", "identities", "hyperorder", "oracles", "expexp", "all"])
    sub.add_parser("ledger", parents=[common], help="dump the F, G, J ledger")
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else default_config()
        cfg = apply_overrides(cfg, args)
        return COMMANDS[args.command](cfg, args, out)
    except ConfigError as e:
        print(f"expray: config error: {e}", file=sys.stderr)
        return 2
    except (UnresolvedError, PreconditionError, ArithmeticError) as e:
        print(f"expray: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
