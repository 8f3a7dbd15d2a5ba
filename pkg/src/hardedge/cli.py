"""Command-line front end: gap tables, cross-representation comparisons and checks.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 a verification
check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import partial

import numpy as np

from . import checks, kernels, painleve
from . import coupled_p3 as cp
from . import rh_asymptotics as rh

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3
ASYMPTOTIC_S_MIN = 50.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which is our numeric-failure code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: float = 0.0
    s: float = None
    lam: float = 0.0
    k: int = 1
    nodes: int = None
    tol: float = 1e-12
    output: str = "csv"
    seed: int = 0


def parse_range(text, geometric=False):
    """'a:b:n' -> n points from a to b (geometric spacing when asked)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"range must look like a:b:n, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"range must look like a:b:n, got {text!r}") from None
    if n < 1:
        raise UsageError("range needs n >= 1")
    if geometric:
        if a <= 0 or b <= 0:
            raise UsageError("geometric range needs positive end points")
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def _s_values(args):
    if args.s_range is not None:
        return [float(v) for v in parse_range(args.s_range, args.geometric)]
    if args.s is None:
        raise UsageError("give --s or --s-range")
    return [args.s]


def _pmap(fun, items, jobs):
    """Map preserving input order; a process pool when jobs > 1."""
    if jobs <= 1 or len(items) <= 1:
        return [fun(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fun, items))


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _emit(columns, rows, fmt, out, extra=None):
    if fmt == "json":
        # JSON has no NaN: missing values become null
        clean = [[None if isinstance(v, float) and math.isnan(v) else v for v in r] for r in rows]
        doc = {"columns": columns, "rows": [dict(zip(columns, r)) for r in clean]}
        doc.update(extra or {})
        out.write(json.dumps(doc, indent=2) + "\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])


def _params(args, s):
    try:
        return kernels.HardEdgeParams(args.alpha, s, args.lam, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# --- gap -------------------------------------------------------------------------------


def _gap_row(s, alpha, nodes, psi_path=None, lam=0.0, k=1):
    p = kernels.HardEdgeParams(alpha, s, lam, k)
    if psi_path is None:
        f = kernels.gap_log_det(p, nodes)
    else:
        f = kernels.gap_log_det_psi(p, kernels.read_psi_csv(psi_path), nodes)
    return (s, f, math.exp(f))


def cmd_gap(args, out):
    svals = _s_values(args)
    for s in svals:
        _params(args, s)
    if args.lam != 0 and args.psi is None:
        raise UsageError("lambda > 0 needs sampled psi values (--psi FILE)")
    fun = partial(_gap_row, alpha=args.alpha, nodes=args.nodes, psi_path=args.psi,
                  lam=args.lam, k=args.k)
    rows = _pmap(fun, svals, args.jobs)
    _emit(["s", "log_det", "gap_probability"], rows, args.output, out,
          {"command": "gap", "config": _config(args)})
    return EXIT_OK


# --- compare ---------------------------------------------------------------------------


def _compare_row(s, alpha, nodes, tol):
    fh = kernels.gap_log_det(kernels.HardEdgeParams(alpha, s), nodes)
    try:
        tw = painleve.tw_log_det(alpha, s, tol)
        # forward integration amplifies local errors ~ exp(2 sqrt s); a run at
        # 10x the tolerance bounds the damage (conservatively, in practice)
        tw_err = abs(tw - painleve.tw_log_det(alpha, s, 10 * tol))
    except painleve.IntegrationError:
        tw = tw_err = math.nan
    asy = painleve.asy_log_det_bessel(alpha, s)
    regime = "asymptotic" if s >= ASYMPTOTIC_S_MIN else "out of asymptotic regime"
    return (s, fh, tw, tw_err, asy, abs(fh - tw), abs(fh - asy), regime)


def cmd_compare(args, out):
    if args.lam != 0:
        raise UsageError("compare covers lambda = 0 only")
    svals = _s_values(args)
    for s in svals:
        _params(args, s)
    fun = partial(_compare_row, alpha=args.alpha, nodes=args.nodes, tol=args.tol)
    rows = _pmap(fun, svals, args.jobs)
    cols = ["s", "fredholm", "tracy_widom", "tw_error_estimate", "asymptotic", "abs_fh_tw",
            "abs_fh_asy", "regime"]
    _emit(cols, rows, args.output, out, {"command": "compare", "config": _config(args)})
    return EXIT_OK


# --- verify ----------------------------------------------------------------------------


def cmd_verify(args, out):
    only = [n for item in (args.only or []) for n in item.split(",") if n]
    if args.list:
        out.write("\n".join(checks.REGISTRY) + "\n")
        return EXIT_OK
    try:
        results = checks.run_checks(args.seed, only)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    ok = all(r.passed for r in results)
    if args.output == "csv":
        cols = ["check_name", "points", "max_residual", "tolerance", "pass"]
        rows = [(r.check_name, r.points, r.max_residual, r.tolerance, r.passed) for r in results]
        _emit(cols, rows, "csv", out)
    else:
        doc = {"command": "verify", "seed": args.seed, "pass": ok,
               "checks": [r.to_dict() for r in results]}
        out.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK if ok else EXIT_VERIFY


# --- painleve --------------------------------------------------------------------------


def _exact(v):
    return str(Fraction(v)) if isinstance(v, (int, Fraction)) else repr(v)


def painleve_constants(k):
    """Exact constants for member k, with alpha-dependent ones as 'coefficient*alpha'."""
    import sympy

    a = sympy.Symbol("alpha")
    taus = painleve.hierarchy_params(k, a)
    lams = cp.lambda_constants(k, a)
    e = rh.eta_constants(k)
    rc = painleve.r_large_constants(k)
    return {
        "k": k,
        "tau": [str(sympy.sympify(t)) for t in taus],
        "tau0": int(taus[0]),
        "lambda_constants": {str(j): str(sympy.sympify(v)) for j, v in lams.items()},
        "c": [_exact(c) for c in rh.solve_cj(k)],
        "eta0": _exact(e.eta0),
        "eta1": _exact(e.eta1),
        "z0": rc.z0,
        "beta": {str(j): rc.beta(j) for j in range(-1, k + 1)},
        "notes": list(rc.notes),
    }


def cmd_painleve(args, out):
    if args.what == "constants":
        if args.k < 1:
            raise UsageError("k must be >= 1")
        doc = {"command": "painleve-constants", "constants": painleve_constants(args.k)}
        out.write(json.dumps(doc, indent=2) + "\n")
        return EXIT_OK
    if not args.alpha > -1:
        raise UsageError("alpha must be > -1")
    if not args.tau_max > 0:
        raise UsageError("--tau-max must be positive")
    tr = painleve.integrate_q(args.alpha, args.tau_max, args.tol)
    taus = np.geomspace(tr.tau0, args.tau_max, args.points)
    if args.output == "json":
        q, dq = tr.q_dq(taus)
        res = tr.residual(taus)
        rows = list(zip(taus.tolist(), q.tolist(), (dq / taus).tolist(), res.tolist()))
        _emit(["tau", "q", "qprime", "residual"], rows, "json", out,
              {"command": "painleve-q", "config": _config(args)})
    else:
        tr.write_csv(out, taus)
    return EXIT_OK


# --- coupled ---------------------------------------------------------------------------


def cmd_coupled(args, out):
    if args.generate:
        lam = parse_range(args.lambda_range, args.geometric)
        states = cp.k1_pipeline_states(args.alpha, lam, tol=min(args.tol, 1e-13))
        cp.write_states_csv(states, out)
        return EXIT_OK
    if args.states is None:
        raise UsageError("coupled needs --states FILE (or --generate)")
    try:
        states = cp.read_states_csv(args.states)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    # np.max propagates NaN, the builtin max does not
    resid = float(np.max([np.abs(cp.coupled_residual(st)) for st in states]))
    dets = float(np.max([abs(cp.det_a0(st)) for st in states]))
    report = {"command": "coupled", "points": len(states), "k": states[0].k,
              "s": states[0].s, "alpha": states[0].alpha,
              "coupled_residual": resid, "det_a0": dets}
    if states[0].s > 0:
        report["a_s_residual"] = float(np.max([abs(cp.a_s_residual(st)) for st in states]))
    if len(states) >= 9:
        rng = np.random.default_rng(args.seed)
        ang = rng.uniform(-math.pi, math.pi, 8)
        z = np.concatenate([r * np.exp(1j * ang) for r in (0.5, 1.0, 2.0, 5.0)])
        curv = cp.zero_curvature_residual(states, z, tol=args.fd_tol)
        report["zero_curvature"] = curv.residual
        report["fd_error"] = curv.fd_error
    gated = [report[key] for key in ("coupled_residual", "det_a0", "a_s_residual", "zero_curvature")
             if key in report]
    report["tolerance"] = args.check_tol
    report["pass"] = all(math.isfinite(v) and v < args.check_tol for v in gated)
    for key, v in report.items():
        if isinstance(v, float) and not math.isfinite(v):
            report[key] = None
    out.write(json.dumps(report, indent=2) + "\n")
    return EXIT_OK if report["pass"] else EXIT_VERIFY


# --- plumbing --------------------------------------------------------------------------


def run_config(args):
    return RunConfig(args.command, args.alpha, args.s, args.lam, args.k, args.nodes,
                     args.tol, args.output, args.seed)


def _config(args):
    c = run_config(args)
    return {"alpha": c.alpha, "s": c.s, "lambda": c.lam, "k": c.k, "nodes": c.nodes,
            "tol": c.tol, "seed": c.seed, "s_range": args.s_range, "geometric": args.geometric}


def _global_flags():
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--alpha", type=float, default=0.0, help="Bessel order alpha > -1")
    g.add_argument("--s", type=float, help="gap size s > 0")
    g.add_argument("--lambda", dest="lam", type=float, default=0.0, help="pole strength lambda >= 0")
    g.add_argument("--k", type=int, default=1, help="pole order k >= 1")
    g.add_argument("--nodes", type=int, help="quadrature nodes (default grows with sqrt s)")
    g.add_argument("--tol", type=float, default=1e-12, help="ODE tolerance")
    g.add_argument("--output", choices=("csv", "json"), default=None)
    g.add_argument("--seed", type=int, default=0, help="seed for randomized check points")
    g.add_argument("--s-range", help="a:b:n sweep over s")
    g.add_argument("--geometric", action="store_true", help="geometric spacing for ranges")
    g.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    return g


def build_parser():
    g = _global_flags()
    p = _Parser(prog="hardedge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("gap", parents=[g], help="log det and gap probability")
    c.add_argument("--psi", help="CSV of sampled psi values (needed for lambda > 0)")
    c.set_defaults(func=cmd_gap, default_output="csv")

    c = sub.add_parser("compare", parents=[g], help="Fredholm vs Tracy-Widom vs asymptotics")
    c.set_defaults(func=cmd_compare, default_output="csv")

    c = sub.add_parser("verify", parents=[g], help="run the registered checks")
    c.add_argument("--only", action="append", help="check name(s), comma separated")
    c.add_argument("--list", action="store_true", help="list check names")
    c.set_defaults(func=cmd_verify, default_output="json")

    c = sub.add_parser("painleve", parents=[g], help="hierarchy constants or the q trajectory")
    c.add_argument("what", choices=("constants", "q"))
    c.add_argument("--tau-max", type=float, default=20.0)
    c.add_argument("--points", type=int, default=201)
    c.set_defaults(func=cmd_painleve, default_output="csv")

    c = sub.add_parser("coupled", parents=[g], help="residual and Lax checks on coupled states")
    c.add_argument("--states", help="coupled-state CSV")
    c.add_argument("--generate", action="store_true", help="write k = 1, s = 0 states instead")
    c.add_argument("--lambda-range", default="1:1.5:201")
    c.add_argument("--check-tol", type=float, default=1e-5)
    c.add_argument("--fd-tol", type=float, default=1e-6)
    c.set_defaults(func=cmd_coupled, default_output="json")
    return p


def main(argv=None, out=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.output is None:
        args.output = args.default_output
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    if args.nodes is not None and args.nodes < 2:
        parser.error("--nodes must be >= 2")
    out = out or sys.stdout
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except UsageError as exc:
        parser.error(str(exc))
    except (ArithmeticError, ValueError) as exc:
        sys.stderr.write(f"hardedge: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
