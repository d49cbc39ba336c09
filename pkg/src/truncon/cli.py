"""Command-line front door.

Subcommands: orbit, exponent, fourier, spectrum, irregular, verify.  All
numeric output is written with 17 significant digits so golden files stay
byte-stable; identical configuration and seed produce identical artifacts.

Exit codes: 0 success, 1 verification failures, 2 malformed input,
3 numerical failure (refused fit / overflow).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import verify as verify_mod
from .analytic import expected_indicator, fourier_log_abs, indicator_estimate
from .errors import InvalidSpec, NumericalFailure
from .grid import FunctionSpec, is_power_of_two, make_grid_function
from .measure import Measure, atom_at_zero, to_kernel
from .operators import (
    add,
    apply,
    identity_kernel,
    riemann_liouville,
    scale,
    volterra_kernel,
)
from .orbit import (
    GrowthSpec,
    growth_exponent,
    growth_limit_prediction,
    irregular_regimes,
    iterate_orbit,
    operator_norm_orbit,
)

COMMANDS = ("orbit", "exponent", "fourier", "spectrum", "irregular", "verify")


@dataclass
class RunConfig:
    command: str
    N: int = 1024
    n_max: int = 100
    p: float = 1.0
    measure_path: str | None = None
    f_path: str | None = None
    out_path: str | None = None
    seed: int = 0


def _fmt(x):
    """Full-precision decimal (17 significant digits), stable across runs."""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_json_text(obj))
        fh.write("\n")


def _json_text(obj, indent=0):
    pad = "  " * indent
    if isinstance(obj, dict):
        inner = ",\n".join(
            f"{pad}  {json.dumps(k)}: {_json_text(v, indent + 1).lstrip()}"
            for k, v in obj.items()
        )
        return f"{pad}{{\n{inner}\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        inner = ",\n".join(f"{pad}  {_json_text(v, indent + 1).lstrip()}" for v in obj)
        return f"{pad}[\n{inner}\n{pad}]" if obj else f"{pad}[]"
    if isinstance(obj, bool):
        return pad + ("true" if obj else "false")
    if isinstance(obj, float):
        return pad + _fmt(obj)
    return pad + json.dumps(obj)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _parse_p(text):
    if text == "inf":
        return math.inf
    if text in ("1", "2"):
        return float(text)
    raise InvalidSpec(f"--p must be one of 1, 2, inf; got {text!r}")


def _load_measure(path):
    if path is None:
        raise InvalidSpec("--measure is required for this command")
    return Measure.from_path(path)


def _load_function(path, N):
    if path is None:
        raise InvalidSpec("--f is required for this command")
    return make_grid_function(FunctionSpec.from_path(path), N)


def _default_shrink_vector(N, depth=3):
    f = make_grid_function(FunctionSpec.poly([1]), N)
    V = volterra_kernel(N)
    for _ in range(depth):
        f = apply(V, f)
    return f


def _trace_rows(trace, r):
    rows = []
    base = trace.log_norms[0]
    for n, ln in enumerate(trace.log_norms):
        trend = (ln - base) / n ** (1.0 / (r + 1.0)) if n else math.nan
        rows.append((n, float(ln), float(trend)))
    return rows


def cmd_orbit(cfg, args):
    T = to_kernel(_load_measure(cfg.measure_path), cfg.N)
    f = _load_function(cfg.f_path, cfg.N)
    trace = iterate_orbit(T, f, cfg.p, cfg.n_max)
    _write_csv(cfg.out_path, "n,log_norm,trend", _trace_rows(trace, args.r))
    return 0


def cmd_exponent(cfg, args):
    if args.growth is None:
        raise InvalidSpec("--growth is required for the exponent command")
    with open(args.growth, "r", encoding="utf-8") as fh:
        gspec = GrowthSpec.from_json(json.load(fh))
    if cfg.measure_path is not None:
        T = to_kernel(_load_measure(cfg.measure_path), cfg.N)
    else:
        bump = scale(riemann_liouville(gspec.r, cfg.N),
                     gspec.b * complex(math.cos(gspec.alpha), math.sin(gspec.alpha)))
        T = add(identity_kernel(cfg.N), bump)
    if cfg.f_path is not None:
        f = _load_function(cfg.f_path, cfg.N)
    else:
        spec = FunctionSpec.poly([1])
        if gspec.s > 0:
            spec = FunctionSpec.shift(spec, gspec.s)
        f = make_grid_function(spec, cfg.N)
    trace = iterate_orbit(T, f, cfg.p, cfg.n_max)
    estimate, _ = growth_exponent(trace, gspec.r)
    prediction = growth_limit_prediction(gspec)
    rel = abs(estimate - prediction) / abs(prediction) if prediction else abs(estimate)
    _write_json(
        {"estimate": float(estimate), "prediction": float(prediction),
         "rel_error": float(rel)},
        cfg.out_path,
    )
    return 0


def cmd_fourier(cfg, args):
    mu = _load_measure(cfg.measure_path)
    thetas = args.theta if args.theta else [math.pi / 2, -math.pi / 2]
    R = args.R
    rows = []
    report = []
    for theta in thetas:
        radii = np.geomspace(R / 2.0, R, 64)
        for r in radii:
            la = fourier_log_abs(mu, r * complex(math.cos(theta), math.sin(theta)))
            rows.append((float(theta), float(r), float(la), float(la / r)))
        est = indicator_estimate(mu, theta, R)
        exp_val = expected_indicator(mu, theta)
        report.append(
            {"theta": float(theta), "estimate": float(est),
             "expected": float(exp_val), "abs_error": float(abs(est - exp_val))}
        )
    _write_csv(cfg.out_path, "theta,r,log_abs,ratio", rows)
    _write_json(report, _sibling(cfg.out_path, ".indicator.json"))
    return 0


def _sibling(path, suffix):
    base = path[: -len(".csv")] if path.endswith(".csv") else path
    return base + suffix


def cmd_spectrum(cfg, args):
    mu = _load_measure(cfg.measure_path)
    T = to_kernel(mu, cfg.N)
    c = atom_at_zero(mu)
    quasi = add(T, scale(identity_kernel(cfg.N), -c)) if c != 0 else T
    trace = operator_norm_orbit(quasi, cfg.n_max)
    rows = [
        (n, float(trace.log_norms[n]), float(trace.log_norms[n] / n))
        for n in range(1, cfg.n_max + 1)
    ]
    _write_csv(cfg.out_path, "n,log_norm,gelfand", rows)
    return 0


def cmd_irregular(cfg, args):
    if args.aplus is None or args.aminus is None:
        raise InvalidSpec("--aplus and --aminus are required for irregular")
    a_plus = FunctionSpec.from_path(args.aplus)
    a_minus = FunctionSpec.from_path(args.aminus)
    if cfg.f_path is not None:
        f = _load_function(cfg.f_path, cfg.N)
    else:
        f = _default_shrink_vector(cfg.N)
    grow, shrink = irregular_regimes(a_plus, a_minus, f, cfg.n_max)
    _write_csv(_sibling(cfg.out_path, "_grow.csv"), "n,log_norm,trend",
               _trace_rows(grow, 1.0))
    _write_csv(_sibling(cfg.out_path, "_shrink.csv"), "n,log_norm,trend",
               _trace_rows(shrink, 1.0))
    return 0


def cmd_verify(cfg, args):
    results = verify_mod.run_all(seed=cfg.seed)
    for res in results:
        status = "PASS" if res["passed"] else "FAIL"
        print(f"{status} {res['id']}: {res['detail']}")
    failed = [r for r in results if not r["passed"]]
    if cfg.out_path:
        _write_json(results, cfg.out_path)
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="truncon",
        description="Truncated convolution operators on [0,1]: orbits, "
        "exponent fits, transform diagnostics, self-verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--measure", default=None, help="measure JSON path")
        p.add_argument("--f", default=None, help="function spec JSON path")
        p.add_argument("--N", type=int, default=1024, help="grid size (power of two)")
        p.add_argument("--n", type=int, default=100, help="number of iterations")
        p.add_argument("--p", default="1", help="norm index: 1, 2 or inf")
        p.add_argument("--out", default=None, help="output artifact path")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
        if name == "orbit":
            p.add_argument("--r", type=float, default=1.0,
                           help="growth index for the trend column")
        if name == "exponent":
            p.add_argument("--growth", default=None,
                           help="growth spec JSON {r,b,alpha,s}")
        if name == "fourier":
            p.add_argument("--theta", type=float, action="append", default=None,
                           help="ray angle (repeatable; default +/- pi/2)")
            p.add_argument("--R", type=float, default=300.0, help="outer radius")
        if name == "irregular":
            p.add_argument("--aplus", default=None,
                           help="free-term +1 polynomial spec JSON")
            p.add_argument("--aminus", default=None,
                           help="free-term -1 polynomial spec JSON")
    return parser


HANDLERS = {
    "orbit": cmd_orbit,
    "exponent": cmd_exponent,
    "fourier": cmd_fourier,
    "spectrum": cmd_spectrum,
    "irregular": cmd_irregular,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            N=args.N,
            n_max=args.n,
            p=_parse_p(args.p),
            measure_path=args.measure,
            f_path=args.f,
            out_path=args.out,
            seed=args.seed,
        )
        if not is_power_of_two(cfg.N):
            raise InvalidSpec(f"--N must be a power of two, got {cfg.N}")
        if cfg.n_max < 1:
            raise InvalidSpec("--n must be at least 1")
        if cfg.out_path is None and args.command != "verify":
            raise InvalidSpec("--out is required for this command")
        return HANDLERS[args.command](cfg, args)
    except (InvalidSpec, json.JSONDecodeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
