"""Command-line interface.

Exit codes: 0 success, 1 self-check failure, 2 argument or configuration
error, 3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from fractions import Fraction
from typing import Optional, Sequence

from . import checks, export, regions
from .code import BudgetExceeded
from .config import ConfigError, ExperimentConfig, load_config
from .field import FieldError, make_field
from .sim import MwrcConfig, SimError, binary_config, preflight, run_cdf_batch, run_fdf_batch

EXIT_OK, EXIT_SELFCHECK, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

DEFAULT_RHO = ("0.1", "0.05", "0.2")


class UsageError(Exception):
    pass


def _rho_arg(text: str) -> Fraction:
    try:
        r = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0 <= r <= Fraction(1, 2):
        raise argparse.ArgumentTypeError(f"crossover probability {text} outside [0, 1/2]")
    return r


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=argparse.SUPPRESS,
                        help="master seed (default 0, or the config file's seed)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory (default .)")
    common.add_argument("--threads", type=_positive, default=argparse.SUPPRESS,
                        help="worker threads for Monte-Carlo trials (default 1)")

    p = argparse.ArgumentParser(prog="ffmwrc", parents=[common],
                                description="Functional-decode-forward on multi-way relay channels.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("region", parents=[common], help="capacity, FDF-separate and CDF region boundaries")
    r.add_argument("--rho0", type=_rho_arg, default=Fraction(DEFAULT_RHO[0]))
    r.add_argument("--rho1", type=_rho_arg, default=Fraction(DEFAULT_RHO[1]))
    r.add_argument("--rho2", type=_rho_arg, default=Fraction(DEFAULT_RHO[2]))
    r.add_argument("--beta-steps", type=int, default=2049)

    ph = sub.add_parser("phase", parents=[common], help="capacity-optimality flags for FDF-separate and CDF on a (rho1, rho2) grid")
    ph.add_argument("--rho0", type=_rho_arg, default=Fraction("0.25"))
    ph.add_argument("--grid", type=int, default=256)

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo error rates from a TOML config")
    s.add_argument("config", help="experiment TOML file")

    c = sub.add_parser("common-rate", parents=[common], help="common-rate capacity of a channel")
    c.add_argument("config", nargs="?", help="experiment TOML file (its channel table is used)")
    c.add_argument("--rho", type=_rho_arg, nargs="+",
                   help="binary crossover probabilities, relay first (L + 1 values)")

    sc = sub.add_parser("selfcheck", parents=[common], help="exhaustive field and code-ensemble checks")
    sc.add_argument("--fields", default="2,3,4,5,8",
                    help="comma-separated field orders (empty for none)")
    sc.add_argument("--modulus", action="append", default=[], metavar="CHAR:DEG:C0,C1,...",
                    help="also check GF(CHAR^DEG) built from this modulus")
    sc.add_argument("--no-ensemble", action="store_true", help="skip the code-ensemble suite")
    return p


def _outdir(args) -> str:
    out = getattr(args, "out", ".")
    os.makedirs(out, exist_ok=True)
    return out


def cmd_region(args) -> int:
    if args.beta_steps < 2:
        raise UsageError("--beta-steps must be at least 2")
    rho = (args.rho0, args.rho1, args.rho2)
    cap = regions.binary_capacity_region(*rho)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", regions.GridTooCoarse)
        fdf = regions.fdf_separate_region(*rho, beta_steps=args.beta_steps)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    cdf = regions.cdf_region(*rho)
    out = _outdir(args)
    for reg, fname in ((cap, "region_capacity.csv"), (fdf, "region_fdf_separate.csv"),
                       (cdf, "region_cdf.csv")):
        export.write_csv(os.path.join(out, fname), export.region_header(2), export.region_rows(reg))
    x, y = cap.upper_bounds()
    print(f"capacity corner ({x:.6f}, {y:.6f}); CDF sum-rate bound {cdf.b[2]:.6f}; "
          f"FDF-separate hull has {len(fdf.hull)} vertices")
    return EXIT_OK


def cmd_phase(args) -> int:
    if args.grid < 2:
        raise UsageError("--grid must be at least 2")
    cells = regions.phase_diagram(args.rho0, args.grid)
    path = os.path.join(_outdir(args), "phase.csv")
    export.write_csv(path, export.PHASE_HEADER, export.phase_rows(cells))
    n_fdf = sum(c.fdf_separate_optimal for c in cells)
    n_cdf = sum(c.cdf_optimal for c in cells)
    print(f"{len(cells)} cells: {n_fdf} FDF-separate optimal, {n_cdf} CDF optimal -> {path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg: ExperimentConfig = load_config(args.config)
    cfg.validate()
    channel = cfg.channel.build()
    rates = cfg.rate_allocation()
    seed = getattr(args, "seed", cfg.seed)
    threads = getattr(args, "threads", 1)
    opts = cfg.decoder.options()
    runner = run_fdf_batch if cfg.scheme == "fdf" else run_cdf_batch
    for n in cfg.n_list:
        preflight(cfg.scheme, channel, rates, n, opts)
    rows = []
    for n in cfg.n_list:
        res = runner(channel, rates, n, cfg.trials, seed, opts=opts, threads=threads)
        rows.append(export.sim_row(res, channel.L, channel.field.name, cfg.rates))
        lo, hi = res.ci
        print(f"{cfg.scheme} n={n}: p_e={res.p_e:.4g} [{lo:.4g}, {hi:.4g}] "
              f"relay={res.relay_errors} user={res.user_errors} of {res.trials}")
    path = os.path.join(_outdir(args), cfg.output or "simulate.csv")
    export.write_csv(path, export.SIM_HEADER, rows)
    return EXIT_OK


def _channel_from_rho(rho: Sequence[Fraction]) -> MwrcConfig:
    if len(rho) < 3:
        raise UsageError("--rho needs the relay's and at least two users' crossover probabilities")
    return binary_config(len(rho) - 1, rho[0], list(rho[1:]))


def cmd_common_rate(args) -> int:
    if (args.config is None) == (args.rho is None):
        raise UsageError("give either a config file or --rho")
    channel = load_config(args.config).channel.build() if args.config else _channel_from_rho(args.rho)
    c = regions.common_rate_capacity(channel)
    path = os.path.join(_outdir(args), "common_rate.csv")
    export.write_csv(path, ["L", "field", "common_rate"], [[channel.L, channel.field.name, c]])
    print(f"common-rate capacity {c:.10g} bits/use")
    return EXIT_OK


def _parse_modulus(text: str):
    try:
        char, deg, coeffs = text.split(":")
        return int(char), int(deg), [int(c) for c in coeffs.split(",")]
    except ValueError:
        raise UsageError(f"--modulus expects CHAR:DEG:C0,C1,..., got {text!r}")


def _order_to_field(order: int):
    for p in range(2, order + 1):
        if order % p == 0:
            deg, m = 0, order
            while m % p == 0:
                m //= p
                deg += 1
            if m != 1:
                raise UsageError(f"{order} is not a prime power")
            return make_field(p, deg)
    raise UsageError(f"{order} is not a field order")


def cmd_selfcheck(args) -> int:
    specs = [s.strip() for s in args.fields.split(",") if s.strip()]
    fields = []
    try:
        fields = [_order_to_field(int(s)) for s in specs]
    except ValueError:
        raise UsageError(f"--fields expects integers, got {args.fields!r}")
    failed = False
    for text in args.modulus:
        char, deg, coeffs = _parse_modulus(text)
        try:
            fields.append(make_field(char, deg, coeffs))
        except FieldError as exc:
            print(f"FAIL field construction GF({char}^{deg}) modulus {coeffs}: {exc}")
            failed = True
    suites = []
    for F in fields:
        suites.append(checks.field_axioms(F, getattr(args, "seed", 0)))
        suites.append(checks.field_solutions(F))
    if fields and not args.no_ensemble:
        suites.append(checks.code_ensemble())
    if not suites and not failed:
        print("warning: no fields given; nothing to check", file=sys.stderr)
    for s in suites:
        status = "PASS" if s.ok else "FAIL"
        line = f"{status} {s.name}: {s.passed} checks passed"
        if not s.ok:
            line += f"; counterexample: {s.failure}"
        print(line)
    failed = failed or any(not s.ok for s in suites)
    return EXIT_SELFCHECK if failed else EXIT_OK


COMMANDS = {
    "region": cmd_region,
    "phase": cmd_phase,
    "simulate": cmd_simulate,
    "common-rate": cmd_common_rate,
    "selfcheck": cmd_selfcheck,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        print(f"error: enumeration budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, ConfigError, SimError, FieldError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
