"""Command-line front end.

Results go to ``--out`` (or stdout); every run also writes a manifest, either
next to the output as ``<out>.manifest.json`` or to stderr.

Exit codes: 0 success, 1 input error, 2 reducible chain or capacity exceeded,
3 condition check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import metadata
from pathlib import Path

import numpy as np
import sympy

from . import tolerances
from .dynamics import RateSpec, build_generator, generator_to_csv, rate_table
from .exact import CapacityError, ReducibleError, check_capacity, distribution_to_dict, stationary
from .factorise import (
    CHECKERS, construct_rate_hpalrmp, construct_rate_palrmp, construct_rate_slrmp, target_one_point,
)
from .had import HadSystem, current_monotonicity, had_report
from .montecarlo import simulate, tv_distance
from .statespace import StateSpace

EXIT_OK, EXIT_INPUT, EXIT_STRUCTURE, EXIT_CHECK = 0, 1, 2, 3


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


# --- inputs ---------------------------------------------------------------


def parse_x(text: str | None, L: int) -> np.ndarray:
    if text is None:
        return np.ones(L)
    try:
        x = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"cannot parse site parameters {text!r}") from None
    if x.size != L:
        raise InputError(f"-x has {x.size} values but L={L}")
    return x


def _split_top_level(text: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        depth += ch == "("
        depth -= ch == ")"
        if ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return parts


def product_rates(phi: str, psi: str, n_max: int) -> np.ndarray:
    """u(m, n) = phi(m) psi(n) for m >= 1, with phi in ``m`` and psi in ``n``."""
    m, n = sympy.symbols("m n")
    try:
        f = sympy.lambdify(m, sympy.sympify(phi, locals={"m": m}), "math")
        g = sympy.lambdify(n, sympy.sympify(psi, locals={"n": n}), "math")
        return rate_table(lambda a, b: float(f(a)) * float(g(b)), n_max)
    except (sympy.SympifyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot evaluate product:{phi},{psi}: {exc}") from None


def builtin_rates(name: str, n_max: int) -> np.ndarray:
    if name == "had":
        return rate_table(lambda m, n: 1.0 / (n + 1), n_max)
    if name == "constant":
        return rate_table(lambda m, n: 1.0, n_max)
    if name.startswith("product:"):
        parts = _split_top_level(name[len("product:"):])
        if len(parts) != 2:
            raise InputError("product builtin needs two comma-separated expressions")
        return product_rates(parts[0], parts[1], n_max)
    raise InputError(f"unknown builtin rate {name!r}")


def rates_to_json(u) -> list:
    return [[None if math.isnan(v) else float(v) for v in row] for row in np.asarray(u, dtype=float)]


def rates_from_json(data) -> np.ndarray:
    try:
        u = np.array([[np.nan if v is None else float(v) for v in row] for row in data])
    except (TypeError, ValueError):
        raise InputError("rate table must be a 2-D JSON array of numbers") from None
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise InputError(f"rate table must be square, got shape {u.shape}")
    return u


def load_rates(args, n_max: int) -> np.ndarray:
    if args.rates:
        try:
            data = json.loads(Path(args.rates).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read rate table {args.rates}: {exc}") from None
        return rates_from_json(data)
    return builtin_rates(args.builtin or "constant", n_max)


def load_g(text: str, n_max: int | None) -> list[float]:
    if text in ("inv-factorial", "ones"):
        if n_max is None:
            n_max = 6
        if text == "ones":
            return [1.0] * (n_max + 2)
        return [1.0 / math.factorial(k) for k in range(n_max + 2)]
    try:
        source = Path(text).read_text() if Path(text).is_file() else text
        g = [float(v) for v in json.loads(source)]
    except (OSError, json.JSONDecodeError, TypeError, ValueError):
        raise InputError(f"--g must be inv-factorial, ones, or a JSON array, got {text!r}") from None
    if n_max is not None and len(g) != n_max + 2:
        raise InputError(f"--g needs {n_max + 2} values for n_max={n_max}, got {len(g)}")
    if any(not v > 0 for v in g):
        raise InputError("every g entry must be positive")
    return g


# --- output ---------------------------------------------------------------


def _manifest(args, tol: dict) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {
        "subcommand": args.command,
        "parameters": params,
        "inputs": [args.rates] if getattr(args, "rates", None) else [],
        "output": args.out,
        "seed": getattr(args, "seed", None),
        "tolerances": tol,
        "capacity": tolerances.capacity(),
        "version": _version(),
    }


def _emit(args, payload, tol: dict | None = None) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2)
    manifest = json.dumps(_manifest(args, tol or tolerances.as_dict()), indent=2)
    if args.out:
        out = Path(args.out)
        out.write_text(text if text.endswith("\n") else text + "\n")
        Path(str(out) + ".manifest.json").write_text(manifest + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        sys.stderr.write(manifest + "\n")


def _spec(args) -> RateSpec:
    u = load_rates(args, max(args.N, 1))
    try:
        return RateSpec(u, parse_x(args.x, args.L), args.q)
    except ValueError as exc:
        raise InputError(str(exc)) from None


# --- subcommands ----------------------------------------------------------


def cmd_enumerate(args) -> int:
    check_capacity(math.comb(args.L + args.N - 1, args.N))
    space = StateSpace(args.L, args.N)
    _emit(args, {"L": space.L, "N": space.N, "size": len(space), "configurations": [list(c) for c in space]})
    return EXIT_OK


def cmd_solve(args) -> int:
    spec = _spec(args)
    check_capacity(math.comb(args.L + args.N - 1, args.N))
    space = StateSpace(args.L, args.N)
    pi = stationary(build_generator(space, spec))
    _emit(args, distribution_to_dict(pi, space))
    return EXIT_OK


def cmd_generator(args) -> int:
    spec = _spec(args)
    check_capacity(math.comb(args.L + args.N - 1, args.N))
    _emit(args, generator_to_csv(build_generator(StateSpace(args.L, args.N), spec)))
    return EXIT_OK


def cmd_check(args) -> int:
    u = load_rates(args, args.nmax)
    rtol = args.tol if args.tol is not None else tolerances.CONDITION_RTOL
    names = ["palrmp", "hpalrmp", "hpalrmp_alt", "slrmp"] if args.variant == "all" else [args.variant]
    reports = {name: CHECKERS[name](u, rtol=rtol) for name in names}
    tol = dict(tolerances.as_dict(), condition_rtol=rtol)
    if len(names) == 1:
        _emit(args, reports[names[0]].to_dict(), tol)
    else:
        _emit(args, {name: r.to_dict() for name, r in reports.items()}, tol)
    return EXIT_OK if all(r.passed for r in reports.values()) else EXIT_CHECK


CONSTRUCTORS = {
    "palrmp": (construct_rate_palrmp, False),
    "hpalrmp": (construct_rate_hpalrmp, True),
    "slrmp": (construct_rate_slrmp, False),
}


def cmd_construct(args) -> int:
    g = load_g(args.g, args.nmax)
    build, homogeneous = CONSTRUCTORS[args.variant]
    u = build(g)
    _emit(args, {
        "variant": args.variant,
        "n_max": len(g) - 2,
        "rates": rates_to_json(u),
        "one_point": target_one_point(g, homogeneous).to_dict(),
    })
    return EXIT_OK


def cmd_had(args) -> int:
    x = parse_x(args.x, args.L)
    if args.sweep is not None:
        _emit(args, current_monotonicity(x, range(1, args.sweep + 1)).to_csv())
        return EXIT_OK
    check_capacity(math.comb(args.L + args.N, args.N + 1))
    _emit(args, had_report(HadSystem(args.L, args.N, x)))
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = _spec(args)
    if args.initial:
        try:
            initial = [int(v) for v in json.loads(args.initial)]
        except (json.JSONDecodeError, TypeError, ValueError):
            raise InputError(f"--initial must be a JSON integer array, got {args.initial!r}") from None
        if sum(initial) != args.N:
            raise InputError(f"initial configuration has {sum(initial)} particles, N={args.N}")
    else:
        initial = [args.N] + [0] * (args.L - 1)
    check_capacity(math.comb(args.L + args.N - 1, args.N))
    events = None if args.time is not None else int(float(args.events))
    measure = simulate(spec, initial, events=events, time=args.time, seed=args.seed)
    report = {"empirical": measure.to_dict(), "tv_exact": None}
    try:
        exact = stationary(build_generator(measure.space, spec))
        report["tv_exact"] = tv_distance(measure, exact)
    except (CapacityError, ReducibleError):
        pass
    _emit(args, report)
    return EXIT_OK


# --- parser ---------------------------------------------------------------


def _system_args(p, need_N=True):
    p.add_argument("-L", type=int, required=True, help="number of sites")
    p.add_argument("-N", type=int, required=need_N, default=0, help="number of particles")
    p.add_argument("-x", help="comma-separated site parameters (default all 1)")


def _rate_args(p, q=True):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--builtin", help="had, constant, or product:PHI,PSI (PHI in m, PSI in n)")
    group.add_argument("--rates", help="JSON file holding a square rate table")
    if q:
        p.add_argument("-q", type=float, default=0.0, help="left-hop factor")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lrmp", description="Long-range misanthrope processes on a ring.")
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--out", help="output file (default stdout)")
        p.set_defaults(func=func)
        return p

    p = add("enumerate", cmd_enumerate, "list the configurations in rank order")
    p.add_argument("-L", type=int, required=True)
    p.add_argument("-N", type=int, required=True)

    p = add("solve", cmd_solve, "exact stationary distribution")
    _system_args(p)
    _rate_args(p)

    p = add("generator", cmd_generator, "generator matrix as CSV")
    _system_args(p)
    _rate_args(p)

    p = add("check", cmd_check, "test a rate table against the factorisation conditions")
    _rate_args(p, q=False)
    p.add_argument("--variant", default="all", choices=["palrmp", "hpalrmp", "hpalrmp_alt", "slrmp", "all"])
    p.add_argument("--nmax", type=int, default=6, help="table size for builtin rates")
    p.add_argument("--tol", type=float, help="relative tolerance of the checks")

    p = add("construct", cmd_construct, "build a rate table with a given one-point function")
    p.add_argument("--g", required=True, help="inv-factorial, ones, or JSON array g(0..n_max+1)")
    p.add_argument("--variant", required=True, choices=sorted(CONSTRUCTORS))
    p.add_argument("--nmax", type=int, help="largest particle number covered")

    p = add("had", cmd_had, "HAD marginals, current and bijection check")
    _system_args(p, need_N=False)
    p.add_argument("--sweep", type=int, help="CSV of the formula current for N = 1..SWEEP")

    p = add("simulate", cmd_simulate, "kinetic Monte Carlo run")
    _system_args(p)
    _rate_args(p)
    p.add_argument("--events", default="100000", help="number of jumps (accepts 1e6)")
    p.add_argument("--time", type=float, help="simulated time budget instead of events")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--initial", help="JSON configuration (default all particles on site 1)")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "L", 1) is not None and getattr(args, "L", 1) < 1:
            raise InputError("L must be at least 1")
        if getattr(args, "N", 0) is not None and getattr(args, "N", 0) < 0:
            raise InputError("N must be non-negative")
        return args.func(args)
    except (ReducibleError, CapacityError, ArithmeticError) as exc:
        print(f"lrmp: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE
    except (ValueError, IndexError, OSError) as exc:
        print(f"lrmp: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
