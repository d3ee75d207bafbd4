"""Command-line front end: multlab <command> [args] --config FILE."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .audit import construct_aux, constants_sheet, dimension, run_audit
from .bipoly import ParseError, distinguished_point, ord_at, parse_bipoly
from .exactnum import DomainError, coeff_str
from .idealkit import IdealHandle
from .projgeo import ProjPoint, load_certificate, transference_check
from .stabledyn import stability_report
from .systems import MahlerSystem, Transformation, load_system, solve_system

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_INTERNAL = 0, 1, 2, 3


class ConfigError(Exception):
    pass


def default_config_path():
    return resources.files("multlab") / "data" / "default.json"


class RunConfig:
    """Parsed config with every cross-reference resolved at load time."""

    def __init__(self, data, source="<config>"):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        self.source = source
        self.seed = data.get("seed", 0)
        self.prec = int(data.get("prec", 64))
        self.out = data.get("out", ".")
        self.systems = dict(data.get("systems", {}))
        self.ideals = dict(data.get("ideals", {}))
        self.audits = dict(data.get("audits", {}))
        self.cycles = dict(data.get("cycles", {}))
        self.certificates = dict(data.get("certificates", {}))
        for name, spec in self.systems.items():
            try:
                load_system(spec)
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"system {name!r}: {e}") from e
        for name, spec in self.ideals.items():
            try:
                self.ideal(name)
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"ideal {name!r}: {e}") from e
        for name, spec in self.audits.items():
            if spec.get("system") not in self.systems:
                raise ConfigError(f"audit {name!r} refers to unknown system {spec.get('system')!r}")
            g = spec.get("grid", {})
            if "M_max" not in g or "N_max" not in g:
                raise ConfigError(f"audit {name!r} needs grid M_max and N_max")

    @classmethod
    def load(cls, path=None):
        try:
            if path is None:
                text = default_config_path().read_text(encoding="utf-8")
                source = "default.json"
            else:
                text = Path(path).read_text(encoding="utf-8")
                source = Path(path).name
            return cls(json.loads(text), source)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config: {e}") from e

    def system(self, name):
        if name not in self.systems:
            raise DomainError(f"unknown system {name!r}")
        return load_system(self.systems[name])

    def ideal(self, name):
        if name not in self.ideals:
            raise DomainError(f"unknown ideal {name!r}")
        spec = self.ideals[name]
        n = int(spec["n"])
        return IdealHandle([parse_bipoly(g, n) for g in spec["generators"]], n)


# ---------------------------------------------------------------- commands

def _header(args, cfg, what):
    return f"# multlab {what} config={cfg.source} seed={args.seed if args.seed is not None else cfg.seed}"


def _out_dir(args, cfg):
    d = Path(args.out or cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _prec(args, cfg):
    p = args.prec if args.prec is not None else cfg.prec
    if p < 1:
        raise DomainError(f"precision must be positive, got {p}")
    return p


def cmd_solve(args, cfg):
    prec = _prec(args, cfg)
    sys_ = cfg.system(args.system)
    fs = solve_system(sys_, prec)
    lines = [_header(args, cfg, f"solve {args.system} prec={prec}"),
             "# k " + " ".join(f"f{i + 1}" for i in range(len(fs)))]
    for k in range(prec):
        lines.append(f"{k} " + " ".join(coeff_str(f.coeffs[k]) for f in fs))
    path = _out_dir(args, cfg) / f"{args.system}.series.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(lines[0])
    print(f"wrote {len(fs)} series to precision {prec}: {path}")
    return EXIT_OK


def cmd_audit(args, cfg):
    if args.name not in cfg.audits:
        raise DomainError(f"unknown audit {args.name!r}")
    spec = cfg.audits[args.name]
    prec = args.prec if args.prec is not None else int(spec.get("prec", cfg.prec))
    if prec < 1:
        raise DomainError(f"precision must be positive, got {prec}")
    sys_ = cfg.system(spec["system"])
    fs = solve_system(sys_, prec)
    point = distinguished_point(fs)
    params = dict(spec.get("params", {}))
    g = spec["grid"]
    grid = run_audit(point, sys_.n, int(g["M_max"]), int(g["N_max"]), prec,
                     bounds=spec.get("bounds", ["mixed", "product"]), params=params,
                     threads=args.threads, name=args.name, fit_M=spec.get("fit_M"))
    out = _out_dir(args, cfg)
    (out / f"{args.name}.csv").write_text(grid.csv_text(), encoding="utf-8")
    summary = [_header(args, cfg, f"audit {args.name} prec={prec}")] + grid.summary()
    (out / f"{args.name}.summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
    print("\n".join(summary))
    print(f"wrote {out / (args.name + '.csv')}")
    return EXIT_OK


def cmd_stability(args, cfg):
    prec = _prec(args, cfg)
    sys_ = cfg.system(args.system)
    if not isinstance(sys_, MahlerSystem):
        raise DomainError("stability needs a Mahler system")
    ideals = [cfg.ideal(name) for name in args.ideals]
    fs = solve_system(sys_, prec)
    lines, _ = stability_report(args.system, sys_, ideals, fs)
    print(_header(args, cfg, f"stability {args.system} {' '.join(args.ideals)} prec={prec}"))
    print("\n".join(lines))
    return EXIT_OK


def cmd_constants(args, cfg):
    point = None
    n, mu, nu0, nu1, lam = args.n, args.mu, args.nu0, args.nu1, args.lam
    if args.system:
        sys_ = cfg.system(args.system)
        phi = Transformation.of(sys_)
        n = sys_.n
        mu = phi.mu if mu is None else mu
        nu0 = phi.nu0 if nu0 is None else nu0
        nu1 = phi.nu1 if nu1 is None else nu1
        lam = phi.lam if lam is None else lam
        fs = solve_system(sys_, _prec(args, cfg))
        one = fs[0].__class__.constant(1, fs[0].prec, fs[0].field)
        point = ProjPoint((one,) + tuple(fs))
    if n is None:
        raise DomainError("give --n or --system")
    sheet = constants_sheet(n, mu if mu is not None else 1, nu0 if nu0 is not None else 1,
                            nu1 if nu1 is not None else 0, lam if lam is not None else 0,
                            point, args.K0, args.C0, args.C1)
    print(_header(args, cfg, "constants"))
    print("\n".join(sheet.lines()))
    return EXIT_OK


def cmd_ord(args, cfg):
    prec = _prec(args, cfg)
    sys_ = cfg.system(args.system)
    P = parse_bipoly(args.poly, sys_.n, sys_.field)
    fs = solve_system(sys_, prec)
    print(_header(args, cfg, f"ord {args.system} prec={prec}"))
    print(f"ord_z P(f~) = {ord_at(P, distinguished_point(fs))} for P = {P}")
    return EXIT_OK


def cmd_aux(args, cfg):
    sys_ = cfg.system(args.system)
    dim = dimension(sys_.n, args.a, args.b)
    prec = args.prec if args.prec is not None else max(cfg.prec, dim + 1)
    fs = solve_system(sys_, prec)
    point = distinguished_point(fs)
    Q = construct_aux(point, args.a, args.b, prec)
    print(_header(args, cfg, f"aux {args.system} {args.a} {args.b} prec={prec}"))
    print(f"Q = {Q}")
    print(f"certified ord >= {dim - 1}; evaluated ord = {ord_at(Q, point)}")
    return EXIT_OK


def cmd_transfer(args, cfg):
    if args.certificate in cfg.certificates:
        spec = cfg.certificates[args.certificate]
    else:
        try:
            spec = json.loads(Path(args.certificate).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read certificate {args.certificate!r}: {e}") from e
    try:
        cert, f = load_certificate(spec)
    except (KeyError, TypeError) as e:
        raise ConfigError(f"malformed certificate: {e}") from e
    rep = transference_check(cert, f)
    print(_header(args, cfg, f"transfer {args.certificate}"))
    print("\n".join(rep.lines()))
    print("overall: " + ("pass" if rep.passed else "FAIL"))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file (default: bundled default.json)")
    common.add_argument("--prec", type=int, help="series precision")
    common.add_argument("--seed", type=int, help="global seed (default from config)")
    common.add_argument("--out", help="output directory")
    p = argparse.ArgumentParser(prog="multlab", description="Multiplicity-estimate laboratory.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", parents=[common], help="solve a system to a precision")
    s.add_argument("system")
    s.set_defaults(func=cmd_solve)
    s = sub.add_parser("audit", parents=[common], help="run an extremal-order audit grid")
    s.add_argument("name")
    s.add_argument("--threads", type=int, default=1)
    s.set_defaults(func=cmd_audit)
    s = sub.add_parser("stability", parents=[common], help="stability lab for a linear Mahler system")
    s.add_argument("system")
    s.add_argument("ideals", nargs="+")
    s.set_defaults(func=cmd_stability)
    s = sub.add_parser("constants", parents=[common], help="constants sheet")
    s.add_argument("--n", type=int)
    s.add_argument("--system")
    for name in ("mu", "nu0", "nu1", "lam"):
        s.add_argument(f"--{name}", type=Fraction)
    s.add_argument("--K0", type=Fraction, default=Fraction(1))
    s.add_argument("--C0", type=Fraction, default=Fraction(0))
    s.add_argument("--C1", type=Fraction, default=Fraction(0))
    s.set_defaults(func=cmd_constants)
    s = sub.add_parser("ord", parents=[common], help="order of a polynomial at the solution point")
    s.add_argument("poly")
    s.add_argument("system")
    s.set_defaults(func=cmd_ord)
    s = sub.add_parser("aux", parents=[common], help="construct an auxiliary polynomial")
    s.add_argument("system")
    s.add_argument("a", type=int)
    s.add_argument("b", type=int)
    s.set_defaults(func=cmd_aux)
    s = sub.add_parser("transfer", parents=[common], help="check a transference certificate")
    s.add_argument("certificate", help="certificate name in the config, or a JSON file")
    s.set_defaults(func=cmd_transfer)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        cfg = RunConfig.load(args.config)
        return args.func(args, cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
