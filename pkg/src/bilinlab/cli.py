"""Command-line entry point: ``bilinlab <command> [options]``.

Exit codes: 0 completed (and passed), 2 verdict failure, 1 usage error.
Options may also come from ``--config FILE`` (key=value lines, keys named like
the long options with dashes or underscores); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np
from scipy import fft as sfft

from bilinlab import reports
from bilinlab.weights import GRAMMAR, WeightSyntaxError, parse_weight

DEFAULT_SEED = 20240611
THREADS_ENV = "BILINLAB_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _ints(text: str) -> list:
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers like 4,8,16 or 2..6, got {text!r}") from None


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers like 0,0.5,1, got {text!r}") from None


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", help="JSON report path (a CSV with the same stem is written next to it)")
    p.add_argument("--plot", help="SVG plot path")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--n", type=int, default=1, help="dimension n")
    p.add_argument("--config", help="key=value file with option defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bilinlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("certify", help="per-radius trilinear form norms and a bounded/growing verdict")
    p.add_argument("--weight", required=True)
    p.add_argument("--radii", type=_ints, default=[4, 8, 16, 32])
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--bounded-slope", type=float, default=0.1)
    p.add_argument("--growing-slope", type=float, default=0.15)
    p.add_argument("--expect", choices=["bounded", "growing"])
    _common(p)

    p = sub.add_parser("norm", help="form norm of a weight on one box, or a norm of a saved grid function")
    p.add_argument("--weight")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--oracle", action="store_true", help="also run the brute-force oracle")
    p.add_argument("--grid-file", help="grid function container to measure")
    p.add_argument("--target", default="lr:2", help="lr:R or amalgam:Q[,Q2..]")
    _common(p)

    p = sub.add_parser("apply", help="apply a symbol to two inputs on a grid")
    p.add_argument("--symbol", required=True)
    p.add_argument("--f1", default="gauss", help="gauss, shifted-gauss or a grid container path")
    p.add_argument("--f2", default="gauss")
    p.add_argument("--L", type=int, default=16)
    p.add_argument("--N", type=int, default=512)
    p.add_argument("--check", choices=["product"])
    p.add_argument("--save", help="write T(f1, f2) as a grid container")
    _common(p)

    p = sub.add_parser("besov", help="Besov-type partial sums of a symbol")
    p.add_argument("--symbol", required=True)
    p.add_argument("--weight", default=None, help="normalizing weight W (default: the symbol's own)")
    p.add_argument("--s", type=_floats, default=[0.0, 0.0, 0.0])
    p.add_argument("--kind", choices=["star", "vec"], default="star")
    p.add_argument("--L", type=int, default=16)
    p.add_argument("--N", type=int, default=1024)
    p.add_argument("--margin", type=int, default=0)
    _common(p)

    p = sub.add_parser("sharpness", help="growth experiments for r and for smoothness")
    p.add_argument("--case", choices=["range", "s0", "s1", "s1s2"], required=True)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--K", type=int, default=5)
    p.add_argument("--J", type=int, default=5)
    p.add_argument("--s0", type=float, default=0.25)
    p.add_argument("--s1", type=float, default=0.0)
    p.add_argument("--s2", type=float, default=0.0)
    _common(p)

    p = sub.add_parser("randomsign", help="random-sign symbols over a radius schedule")
    p.add_argument("--weight", required=True)
    p.add_argument("--radii", type=_ints, default=[4, 8, 16, 32])
    p.add_argument("--trials", type=int, default=9)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--expect-slope", type=float, default=None)
    _common(p)

    p = sub.add_parser("ghs", help="dyadic pieces of <(xi1, xi2)>^m")
    p.add_argument("--m", type=float, default=-0.625)
    p.add_argument("--q", type=float, default=3.6)
    p.add_argument("--K", type=int, default=6)
    p.add_argument("--trials", type=int, default=8)
    _common(p)

    p = sub.add_parser("sweep", help="empirical operator-norm ratios over bandwidths")
    p.add_argument("--symbol", required=True)
    p.add_argument("--target", default="amalgam:1")
    p.add_argument("--bands", type=_ints, default=list(range(2, 7)), help="exponents k, bandwidth 2^k")
    p.add_argument("--trials", type=int, default=16)
    p.add_argument("--max-slope", type=float, default=None, help="exit 2 when the fitted slope exceeds this")
    _common(p)

    p = sub.add_parser("selftest", help="run the acceptance checks")
    p.add_argument("--only", type=_ints, default=None, help="criterion numbers to run")
    _common(p)
    return parser


def _read_config(path) -> dict:
    out = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}: expected key=value, got {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        if not os.path.exists(args.config):
            raise UsageError(f"config file {args.config} does not exist")
        cfg = _read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        unknown = set(cfg) - set(known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        defaults = {}
        for k, v in cfg.items():
            act = known[k]
            if act.const is True and act.nargs == 0:
                defaults[k] = v.lower() in ("1", "true", "yes")
            else:
                defaults[k] = act.type(v) if act.type else v
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    path = getattr(args, "grid_file", None)
    if path and not os.path.exists(path):
        raise UsageError(f"grid file {path} does not exist")
    return args


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items()}


def _emit(args, payload: dict, csv_header=None, csv_rows=None, plot=None):
    if args.out:
        reports.write_json(args.out, payload, _config(args))
        if csv_header is not None:
            reports.write_csv(Path(args.out).with_suffix(".csv"), csv_header, csv_rows)
    if args.plot and plot is not None:
        reports.emit_plot(plot, args.plot)
    print(json.dumps(reports.to_jsonable(_summary(payload)), sort_keys=True))


def _summary(payload: dict) -> dict:
    keep = ("verdict", "slope", "predicted", "estimate", "passed", "value", "total", "weight", "symbol")
    return {k: payload[k] for k in keep if k in payload}


# --------------------------------------------------------------------------
# commands


def cmd_certify(args) -> int:
    from bilinlab.trilinear import certify_weight

    V = parse_weight(args.weight, args.n)
    cert = certify_weight(V, args.radii, restarts=args.restarts, max_iters=args.max_iters, tol=args.tol,
                          seed=args.seed, bounded_slope=args.bounded_slope, growing_slope=args.growing_slope,
                          label=args.weight)

    _emit(args, cert.to_dict(), ["radius", "norm"], zip(cert.radii, cert.norms), cert)
    if args.expect and cert.verdict != args.expect:
        return 2
    return 0


def cmd_norm(args) -> int:
    if args.grid_file:
        from bilinlab.bilinop import target_norm
        from bilinlab.fieldgrid import GridFunction

        f = GridFunction.load(args.grid_file)
        _emit(args, {"target": args.target, "value": target_norm(f, args.target)})
        return 0
    if not args.weight:
        raise UsageError("norm needs --weight or --grid-file")
    from bilinlab.lattice import IndexBox
    from bilinlab.trilinear import form_norm_alt, form_norm_oracle
    from bilinlab.weights import weak_l4_norm

    V = parse_weight(args.weight, args.n)
    box = IndexBox(V.dim, args.radius)
    res = form_norm_alt(V, box, seed=args.seed)
    payload = {"weight": args.weight, "radius": args.radius, "estimate": res.estimate,
               "restart_values": res.restart_values, "residual": res.residual, "converged": res.converged,
               "degenerate": res.degenerate,
               "weak_l4": weak_l4_norm(V, IndexBox(2 * V.dim, args.radius))}
    if args.oracle:
        payload["oracle"] = form_norm_oracle(V, box)
    _emit(args, payload)
    return 0


def _input(spec: str, grid):
    from bilinlab.fieldgrid import GridFunction

    if spec == "gauss":
        return GridFunction.from_function(grid, lambda *x: np.exp(-sum(t * t for t in x) / 2))
    if spec == "shifted-gauss":
        return GridFunction.from_function(grid, lambda *x: np.exp(-sum((t - 1) ** 2 for t in x)))
    if os.path.exists(spec):
        f = GridFunction.load(spec)
        if f.grid != grid:
            raise UsageError(f"{spec} lives on {f.grid}, expected {grid}")
        return f
    raise UsageError(f"unknown input {spec!r}; use gauss, shifted-gauss or a container path")


def cmd_apply(args) -> int:
    from bilinlab.bilinop import apply
    from bilinlab.fieldgrid import Grid, check_wraparound, lr_norm

    sigma = _symbol(args.symbol, args.n)
    grid = Grid(args.n, args.L, args.N)
    f1, f2 = _input(args.f1, grid), _input(args.f2, grid)
    T = apply(sigma, f1, f2)
    check_wraparound(T)
    payload = {"symbol": args.symbol, "l2": lr_norm(T, 2), "l1": lr_norm(T, 1), "warnings": T.warnings}
    code = 0
    if args.check == "product":
        err = float(np.abs(T.values - f1.values * f2.values).max())
        payload.update(product_error=err, passed=err <= 1e-8)
        code = 0 if err <= 1e-8 else 2
    if args.save:
        T.save(args.save)
    _emit(args, payload)
    return code


def _symbol(text, n):
    from bilinlab.lpcalc import parse_symbol

    try:
        return parse_symbol(text, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_besov(args) -> int:
    from bilinlab.fieldgrid import Grid
    from bilinlab.lpcalc import besov_norm_star, besov_norm_vec, sample_symbol

    sigma = _symbol(args.symbol, args.n)
    W = parse_weight(args.weight, args.n) if args.weight else sigma.weight
    gx = Grid(1, 1, 2) if sigma.x_independent else Grid(1, 4, 64)
    s = sample_symbol(sigma, gx, Grid(1, args.L, args.N))
    if args.kind == "star":
        rep = besov_norm_star(s, W, args.s, margin=args.margin)
    else:
        rep = besov_norm_vec(s, W, args.s, margin=args.margin)
    payload = reports.to_jsonable(rep)
    payload["terms"] = {",".join(map(str, k)): v for k, v in rep.terms.items()}
    payload["total"] = rep.total
    _emit(args, payload, ["shell", "partial_sum", "increment"],
          [(m, p, i) for m, (p, i) in enumerate(zip(rep.partial_sums, rep.increments))])
    return 0


def _growth(args, rep) -> int:
    payload = reports.to_jsonable(rep)
    payload["passed"] = rep.passed
    _emit(args, payload, ["step", "value"], zip(rep.schedule, rep.values), rep)
    return 0 if rep.passed else 2


def cmd_sharpness(args) -> int:
    from bilinlab.experiments import exp_range, exp_smoothness

    if args.case == "range":
        rep = exp_range((args.r,), args.K)[args.r]
    else:
        rep = exp_smoothness(args.case, s0=args.s0, s1=args.s1, s2=args.s2, r=args.r, J=args.J)
    return _growth(args, rep)


def cmd_randomsign(args) -> int:
    from bilinlab.experiments import exp_random_sign

    V = parse_weight(args.weight, 1)
    rep = exp_random_sign(V, args.radii, args.trials, args.r, args.seed, predicted=args.expect_slope)
    return _growth(args, rep)


def cmd_ghs(args) -> int:
    from bilinlab.experiments import exp_ghs, ghs_preset

    try:
        sigma = ghs_preset(args.m, args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep = exp_ghs(sigma, args.q, args.K, trials=args.trials, seed=args.seed)
    payload = reports.to_jsonable(rep)
    payload["passed"] = bool(rep.ratio_after(3) <= 0.8)
    _emit(args, payload, ["k", "sup_piece", "surrogate"],
          zip(range(rep.K + 1), rep.sup_pieces, rep.surrogates))
    return 0 if payload["passed"] else 2


def cmd_sweep(args) -> int:
    from bilinlab.bilinop import op_ratio_sweep

    sigma = _symbol(args.symbol, args.n)
    rep = op_ratio_sweep(sigma, args.target, args.bands, args.trials, args.seed)
    payload = reports.to_jsonable(rep)
    _emit(args, payload, ["bandwidth", "ratio"], zip(rep.bandwidths, rep.ratios), rep)
    if args.max_slope is not None and rep.slope > args.max_slope:
        return 2
    return 0


def cmd_selftest(args) -> int:
    from bilinlab import acceptance

    failed = 0
    results = []
    for num in acceptance.CHECKS:
        if args.only and num not in args.only:
            continue
        for name, ok, detail in acceptance.run_check(num):
            results.append({"criterion": num, "name": name, "passed": ok, "detail": detail})
            print(f"[{'PASS' if ok else 'FAIL'}] {num:2d} {name}: {detail}", flush=True)
            failed += not ok
    if args.out:
        reports.write_json(args.out, {"results": results, "failed": failed}, _config(args))
    return 2 if failed else 0


COMMANDS = {"certify": cmd_certify, "norm": cmd_norm, "apply": cmd_apply, "besov": cmd_besov,
            "sharpness": cmd_sharpness, "randomsign": cmd_randomsign, "ghs": cmd_ghs,
            "sweep": cmd_sweep, "selftest": cmd_selftest}


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
        with sfft.set_workers(max(threads, 1)):
            return COMMANDS[args.command](args)
    except WeightSyntaxError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        if "weight" in str(exc):
            print(GRAMMAR, file=sys.stderr)
        return 1
    except ValueError as exc:
        # library preconditions (schedule too short, unresolved shells, ...)
        print(f"bilinlab: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
