"""Command-line entry point: ``tractforge <command> [action] [options]``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Any

from . import __version__
from .errors import ConfigError, IoError, TractForgeError
from .report import CertLine, CertReport, canonical_json, export_report
from .tower import TowerScalar

COMMANDS = ("datum", "theta", "toy", "map", "shoot", "certify", "growth")
DEFAULTS = {"C": 30.0, "nu0": 60.0, "tol": 1e-3}


# ------------------------------------------------------------------ config
@dataclass
class RunConfig:
    command: str
    action: str | None = None
    profile: Any = "loglog:1"
    r0: str = "1e6"
    C: float = DEFAULTS["C"]
    nu0: float = DEFAULTS["nu0"]
    N: int = 25
    toy: dict | None = None
    targets: Any = "forward"
    tol: float = DEFAULTS["tol"]
    grid: str | None = None
    alpha: float | None = None
    out: str | None = None
    format: str = "json"
    seed: int = 0
    threads: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        data = asdict(self)
        return {k: v for k, v in data.items() if v is not None and v != {}}

    def dumps(self) -> str:
        return canonical_json(self.to_json())


def _check_config(cfg: RunConfig) -> RunConfig:
    if cfg.command not in COMMANDS:
        raise ConfigError("command", f"unknown command {cfg.command!r}")
    for name in ("tol", "C", "nu0"):
        val = getattr(cfg, name)
        if not isinstance(val, (int, float)) or isinstance(val, bool) or not val > 0:
            raise ConfigError(name, "must be a positive number")
    if cfg.C <= 1:
        raise ConfigError("C", "must exceed 1")
    if not isinstance(cfg.N, int) or cfg.N < 1:
        raise ConfigError("N", "must be a positive integer")
    if cfg.format not in ("json", "csv", "text"):
        raise ConfigError("format", "must be json, csv or text")
    if not isinstance(cfg.seed, int):
        raise ConfigError("seed", "must be an integer")
    try:
        TowerScalar.parse(cfg.r0)
    except TractForgeError as exc:
        raise ConfigError("r0", str(exc)) from exc
    if cfg.threads is not None and (not isinstance(cfg.threads, int) or cfg.threads < 1):
        raise ConfigError("threads", "must be a positive integer")
    if cfg.out not in (None, "-"):
        parent = os.path.dirname(os.path.abspath(cfg.out))
        if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
            raise ConfigError("out", f"directory {parent} is not writable")
    return cfg


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    if "command" not in data:
        raise ConfigError("command", "missing")
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    cfg = RunConfig(**data)
    if isinstance(cfg.r0, (int, float)):
        cfg.r0 = repr(float(cfg.r0))
    if isinstance(cfg.N, float) and cfg.N.is_integer():
        cfg.N = int(cfg.N)
    return _check_config(cfg)


def config_load(path: str) -> RunConfig:
    """Read a JSON run configuration; defaults fill the gaps (C = 30, nu0 = 60, tol = 1e-3)."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"not valid JSON: {exc}") from exc
    return config_from_dict(data)


def thread_cap() -> int | None:
    """TRACTFORGE_THREADS, validated.  The engines run single-threaded below any cap."""
    raw = os.environ.get("TRACTFORGE_THREADS")
    if raw is None or raw == "":
        return None
    try:
        val = int(raw)
    except ValueError as exc:
        raise ConfigError("TRACTFORGE_THREADS", "must be a positive integer") from exc
    if val < 1:
        raise ConfigError("TRACTFORGE_THREADS", "must be a positive integer")
    return val


# ------------------------------------------------------------------ parser
def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=("json", "csv", "text"))
    p.add_argument("--dry-run", action="store_true", help="validate inputs and stop")
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tractforge", description="Tract data, toy maps and certificates.")
    parser.add_argument("--version", action="version", version=f"tractforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("datum", help="generate or validate tower-scale tract data")
    p.add_argument("action", choices=("gen", "validate"))
    p.add_argument("--profile")
    p.add_argument("--r0")
    p.add_argument("--C", type=float)
    p.add_argument("--nu0", type=float)
    p.add_argument("--n", dest="N", type=int)
    p.add_argument("--in", dest="input")
    _add_common(p)

    p = sub.add_parser("theta", help="check the growth-law properties on a grid")
    p.add_argument("action", choices=("check", "derivative"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--profile")
    p.add_argument("--grid")
    p.add_argument("--beta", type=float, default=0.5)
    _add_common(p)

    p = sub.add_parser("toy", help="build a toy tract")
    p.add_argument("action", choices=("build",))
    p.add_argument("--wiggle", action="append", default=[], metavar="r,R,eps")
    p.add_argument("--nu0", type=float)
    p.add_argument("--x-close", type=float)
    _add_common(p)

    p = sub.add_parser("map", help="map a toy tract")
    p.add_argument("action", choices=("build", "eval", "trace"))
    p.add_argument("--toy", required=True)
    p.add_argument("--z", help="point, e.g. 10+0.5j")
    p.add_argument("--rho", type=float)
    p.add_argument("--accuracy", type=float, default=1e-8)
    _add_common(p)

    p = sub.add_parser("shoot", help="solve the gate-selection problem")
    p.add_argument("action", choices=("solve", "faces"))
    p.add_argument("--toy", required=True)
    p.add_argument("--targets", help="'forward' or comma-separated moduli")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-rounds", type=int, default=25)
    p.add_argument("--transcript")
    _add_common(p)

    p = sub.add_parser("certify", help="check a solved toy model")
    p.add_argument("--toy", required=True)
    p.add_argument("--targets", help="'forward' or comma-separated moduli")
    p.add_argument("--tol", type=float)
    _add_common(p)

    p = sub.add_parser("growth", help="phi, its inverse, and empirical growth constants")
    p.add_argument("action", choices=("eval", "bracket", "report"))
    p.add_argument("--profile")
    p.add_argument("--t", help="argument of phi (tower syntax allowed)")
    p.add_argument("--w", help="argument of phi^-1 (tower syntax allowed)")
    p.add_argument("--grid")
    p.add_argument("--M", type=float, default=2.0)
    p.add_argument("--toy")
    p.add_argument("--samples", type=int, default=40)
    _add_common(p)
    return parser


def _merge(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if getattr(args, "config", None):
        base = config_load(args.config).to_json()
    base["command"] = args.command
    if getattr(args, "action", None):
        base["action"] = args.action
    for key in ("profile", "r0", "C", "nu0", "N", "targets", "tol", "grid", "alpha", "out", "format", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    base.pop("extra", None)
    cfg = config_from_dict(base)
    cfg.threads = thread_cap()
    return cfg


# ---------------------------------------------------------------- commands
def _emit(report, cfg: RunConfig, fmt: str | None = None) -> None:
    text = export_report(report, fmt or cfg.format, cfg.out)
    if cfg.out in (None, "-"):
        sys.stdout.write(text)


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _profile(spec):
    from .growth import parse_profile, profile_from_json
    if isinstance(spec, dict):
        return profile_from_json(spec)
    return parse_profile(str(spec))


def _load_toy(path: str):
    from .tract.toy import ToyTract
    return ToyTract.from_json(_read_json(path))


def _targets(spec, tract, handle=None) -> list[float]:
    from .shooting import forward_targets
    if spec in (None, "forward"):
        return forward_targets(tract, handle)
    if isinstance(spec, (list, tuple)):
        vals = [float(v) for v in spec]
    else:
        vals = [float(v) for v in str(spec).split(",")]
    if len(vals) != len(tract.wiggles):
        raise ConfigError("targets", f"need {len(tract.wiggles)} values")
    return vals


def cmd_datum(cfg: RunConfig, args) -> int:
    from .tract.datum import TractDatum, datum_generate, datum_validate, range_bounds_certify
    if args.action == "validate" and not args.input:
        raise ConfigError("in", "datum validate needs --in")
    profile = _profile(cfg.profile)
    if args.dry_run:
        print(f"datum {args.action}: inputs valid")
        return 0
    if args.action == "gen":
        datum = datum_generate(profile, cfg.r0, cfg.C, cfg.nu0, cfg.N)
    else:
        datum = TractDatum.from_json(_read_json(args.input))
    report = datum_validate(datum)
    chains = [range_bounds_certify(datum, j) for j in range(len(datum.terms))]
    ok = report.passed and all(c.passed for c in chains)
    if args.action == "gen":
        if cfg.out not in (None, "-"):
            try:
                with open(cfg.out, "w", encoding="utf-8") as fh:
                    fh.write(canonical_json(datum) + "\n")
            except OSError as exc:
                raise IoError(f"cannot write {cfg.out}: {exc}") from exc
        else:
            sys.stdout.write(canonical_json(datum) + "\n")
    else:
        cert = CertReport("datum validation", report.lines + chains)
        _emit(cert, cfg)
    dest = sys.stderr if cfg.out in (None, "-") else sys.stdout
    print(f"datum: {len(datum.terms)} records, validation {'pass' if ok else 'fail'}", file=dest)
    return 0 if ok else 1


def cmd_theta(cfg: RunConfig, args) -> int:
    from .growth import loglog_alpha, parse_grid, theta_derivative_check, theta_properties
    if cfg.alpha is not None:
        profile = loglog_alpha(cfg.alpha)
    else:
        profile = _profile(cfg.profile)
    grid = parse_grid(cfg.grid or "geometric:20:1e2:1e40")
    if args.dry_run:
        print(f"theta {args.action}: {len(grid)} grid points, inputs valid")
        return 0
    if args.action == "check":
        report = theta_properties(profile, grid, args.beta)
    else:
        report = theta_derivative_check(profile, grid)
    fmt = args.format or "csv"
    _emit(report, cfg, fmt)
    dest = sys.stderr if cfg.out in (None, "-") else sys.stdout
    print(f"theta {args.action}: {'pass' if report.passed else 'fail'}", file=dest)
    return 0 if report.passed else 1


def cmd_toy(cfg: RunConfig, args) -> int:
    from .tract.toy import toy_tract_build
    params = []
    for spec in args.wiggle:
        try:
            r, R, eps = (float(v) for v in spec.split(","))
        except ValueError as exc:
            raise ConfigError("wiggle", f"expected r,R,eps but got {spec!r}") from exc
        params.append({"r": r, "R": R, "eps": eps})
    if cfg.toy:
        params = params or cfg.toy.get("wiggles", [])
    nu0 = args.nu0 if args.nu0 is not None else (cfg.toy or {}).get("nu0")
    x_close = args.x_close if args.x_close is not None else (cfg.toy or {}).get("x_close")
    if nu0 is None or x_close is None:
        raise ConfigError("toy", "need --nu0 and --x-close")
    tract = toy_tract_build(params, nu0, x_close)
    if args.dry_run:
        print(f"toy build: {len(tract.wiggles)} wiggles, inputs valid")
        return 0
    text = canonical_json(tract.to_json()) + "\n"
    if cfg.out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"cannot write {cfg.out}: {exc}") from exc
        print(f"toy: {len(tract.wiggles)} wiggles written to {cfg.out}")
    return 0


def cmd_map(cfg: RunConfig, args) -> int:
    from .conformal import geodesic_trace, handle_to_json, map_build
    tract = _load_toy(args.toy)
    if args.action == "eval" and args.z is None:
        raise ConfigError("z", "map eval needs --z")
    if args.action == "trace" and args.rho is None:
        raise ConfigError("rho", "map trace needs --rho")
    z = complex(args.z.replace(" ", "")) if args.z else None
    if args.dry_run:
        print(f"map {args.action}: inputs valid")
        return 0
    handle = map_build(tract, args.accuracy)
    if args.action == "build":
        text = handle_to_json(handle) + "\n"
        summary = f"map: residual {handle.residual:.3e}"
    elif args.action == "eval":
        w = handle.eval(z)
        text = canonical_json({"z": [z.real, z.imag], "F": [w.real, w.imag], "abs": abs(w)}) + "\n"
        summary = f"map: F({z}) = {w}"
    else:
        tr = geodesic_trace(handle, args.rho)
        text = tr.to_csv()
        summary = f"map: trace rho={args.rho} diameter {tr.diameter:.6g}"
    if cfg.out in (None, "-"):
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    else:
        try:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"cannot write {cfg.out}: {exc}") from exc
        print(summary)
    return 0


def cmd_shoot(cfg: RunConfig, args) -> int:
    from .shooting import Evaluator, endpoint_sign_check, establish_brackets, shoot_solve
    tract = _load_toy(args.toy)
    if args.dry_run:
        print(f"shoot {args.action}: inputs valid")
        return 0
    targets = _targets(cfg.targets, tract)
    ev = Evaluator(tract)
    brackets = establish_brackets(tract, targets, evaluator=ev)
    faces = endpoint_sign_check(tract, len(targets), brackets, targets, evaluator=ev)
    if args.action == "faces":
        _emit(faces, cfg)
        return 0 if faces.passed else 1
    if not faces.passed:
        _emit(faces, cfg)
        print("shoot: endpoint faces fail; no solve attempted", file=sys.stderr)
        return 1
    gv, dv, log = shoot_solve(tract, targets, cfg.tol, args.max_rounds, brackets, ev)
    out = {"gates": gv.to_json(), "deltas": dv.to_json(), "targets": targets}
    text = canonical_json(out) + "\n"
    if cfg.out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"cannot write {cfg.out}: {exc}") from exc
    if args.transcript:
        export_report(log, "json", args.transcript)
    dest = sys.stderr if cfg.out in (None, "-") else sys.stdout
    print(f"shoot: residual {dv.residual:.3e} after {log.builds} map builds", file=dest)
    return 0


def cmd_certify(cfg: RunConfig, args) -> int:
    from .certify import chain_check, gate_condition_check, growth_report
    from .conformal import map_build
    tract = _load_toy(args.toy)
    if args.dry_run:
        print("certify: inputs valid")
        return 0
    handle = map_build(tract)
    targets = _targets(cfg.targets, tract, handle)
    tol = args.tol if args.tol is not None else 1e-2
    report = CertReport("certify", constants={"tol": tol})
    n = len(tract.wiggles)
    for j in range(n):
        report.add(gate_condition_check(handle, tract, j, targets[j], tol))
        nxt = tract.wiggles[j + 1] if j + 1 < n else None
        report.add(chain_check(handle, tract, j, targets[j], nxt.r if nxt else None, nxt.R if nxt else None))
    growth = growth_report(handle, tract, seed=cfg.seed)
    for line in growth.lines:
        report.add(line)
    report.constants.update(growth.constants)
    _emit(report, cfg, args.format or "text")
    return 0 if report.passed else 1


def cmd_growth(cfg: RunConfig, args) -> int:
    from .growth import parse_grid, phi_eval, phi_inverse, phiapp_threshold
    if args.action == "report":
        if not args.toy:
            raise ConfigError("toy", "growth report needs --toy")
        from .certify import growth_report
        from .conformal import map_build
        tract = _load_toy(args.toy)
        if args.dry_run:
            print("growth report: inputs valid")
            return 0
        report = growth_report(map_build(tract), tract, args.samples, cfg.seed)
        _emit(report, cfg, args.format or "text")
        return 0 if report.passed else 1
    profile = _profile(cfg.profile)
    if args.action == "eval":
        if args.t is None and args.w is None:
            raise ConfigError("t", "growth eval needs --t or --w")
        t = TowerScalar.parse(args.t) if args.t is not None else None
        w = TowerScalar.parse(args.w) if args.w is not None else None
        if args.dry_run:
            print("growth eval: inputs valid")
            return 0
        out = {}
        if t is not None:
            out["phi"] = str(phi_eval(profile, t))
        if w is not None:
            out["phi_inverse"] = str(phi_inverse(profile, w))
        sys.stdout.write(canonical_json(out) + "\n")
        return 0
    grid = parse_grid(cfg.grid or "geometric:40:1e3:1e12")
    if args.dry_run:
        print("growth bracket: inputs valid")
        return 0
    res = phiapp_threshold(profile, grid, args.M)
    report = CertReport("phi inverse bracket", constants={"threshold": res["threshold"], "M": args.M})
    for w, ok in zip(grid, res["holds"]):
        report.add(CertLine(f"bracket[w={w:.6g}]", bool(ok)))
    _emit(report, cfg, args.format or "text")
    return 0 if res["threshold"] is not None else 1


HANDLERS = {"datum": cmd_datum, "theta": cmd_theta, "toy": cmd_toy, "map": cmd_map,
            "shoot": cmd_shoot, "certify": cmd_certify, "growth": cmd_growth}


def cmd_dispatch(argv: list[str] | None = None) -> int:
    """Run one subcommand; 0 when every check passes, 1 when any fails, 2 on errors."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = _merge(args)
        return HANDLERS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"tractforge: config error in {exc.field}: {exc}", file=sys.stderr)
        return 2
    except TractForgeError as exc:
        print(f"tractforge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cmd_dispatch())


if __name__ == "__main__":
    main()
